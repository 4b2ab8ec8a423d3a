//! Spectrum scans in the complex energy plane, checked against the exactly
//! solvable families.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{free_laplacian_le, uh_detect, Classification, CocycleSpec, LyapunovOptions, Potential, UhOptions};
use crate::diophantine::Frequency;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReference {
    pub on_spectrum: bool,
    /// Distance from `E` to the reference set.
    pub distance: f64,
    /// `|(Re E / cosh g)^2 + (Im E / sinh g)^2 - 4|` with `g = ln|lambda|`,
    /// or the distance to `[-2, 2]` when `|lambda| <= 1`.
    pub equation_residual: f64,
}

/// Nearest point on `t -> a cos t + i b sin t`, by a coarse scan refined
/// with golden-section search.
fn ellipse_distance(e: Complex64, a: f64, b: f64) -> f64 {
    let d = |t: f64| (e - Complex64::new(a * t.cos(), b * t.sin())).norm();
    let samples = 720;
    let step = std::f64::consts::TAU / samples as f64;
    let best = (0..samples).map(|i| i as f64 * step).min_by(|x, y| d(*x).total_cmp(&d(*y))).unwrap_or(0.0);
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if d(m1) < d(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    d(0.5 * (lo + hi))
}

/// Spectrum of the operator with potential `lambda e^{i x}`: the segment
/// `[-2, 2]` for `|lambda| <= 1`, otherwise the ellipse with semi-axes
/// `2 cosh g`, `2 sinh g`, `g = ln|lambda|`.
pub fn sarnak_spectrum_reference(lambda: f64, energy: Complex64, tol: f64) -> Result<SpectrumReference> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("coupling must be non-zero and finite, got {lambda}")));
    }
    if lambda.abs() <= 1.0 {
        let distance = (energy - Complex64::new(energy.re.clamp(-2.0, 2.0), 0.0)).norm();
        return Ok(SpectrumReference { on_spectrum: distance <= tol, distance, equation_residual: distance });
    }
    let g = lambda.abs().ln();
    let residual = ((energy.re / g.cosh()).powi(2) + (energy.im / g.sinh()).powi(2) - 4.0).abs();
    let distance = ellipse_distance(energy, 2.0 * g.cosh(), 2.0 * g.sinh());
    Ok(SpectrumReference { on_spectrum: distance <= tol, distance, equation_residual: residual })
}

/// `max(L_free(E), ln|lambda|)`.
pub fn sarnak_le_reference(lambda: f64, energy: Complex64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::InvalidInput("coupling must be non-zero".into()));
    }
    Ok(free_laplacian_le(energy).max(lambda.abs().ln()))
}

/// `max(ln|lambda| + |eps|, L(E, 0))` for `2 lambda cos x`.
pub fn amo_shift_le_reference(lambda: f64, eps: f64, unshifted: f64) -> f64 {
    (lambda.abs().ln() + eps.abs()).max(unshifted)
}

/// `count` points `scale (a cos t + i b sin t)` at equally spaced `t`,
/// with `a, b` the reference ellipse for `|lambda| > 1`.
pub fn sarnak_ellipse_points(lambda: f64, count: usize, scale: f64) -> Vec<Complex64> {
    let g = lambda.abs().ln();
    let (a, b) = (2.0 * g.cosh(), 2.0 * g.sinh());
    (0..count)
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
            Complex64::new(scale * a * t.cos(), scale * b * t.sin())
        })
        .collect()
}

/// Rectangle `[re_min, re_max] x [im_min, im_max]` sampled on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub resolution: (usize, usize),
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        if self.resolution.0 < 2 || self.resolution.1 < 2 {
            return Err(Error::InvalidInput(format!("resolution must be at least 2 per axis, got {:?}", self.resolution)));
        }
        if !(self.re.0 < self.re.1) || !(self.im.0 <= self.im.1) {
            return Err(Error::InvalidInput("region bounds are not ordered".into()));
        }
        Ok(())
    }

    /// Energies in row-major order, imaginary part outermost.
    pub fn energies(&self) -> Vec<Complex64> {
        let (nx, ny) = self.resolution;
        let at = |lo: f64, hi: f64, i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| Complex64::new(at(self.re.0, self.re.1, i, nx), at(self.im.0, self.im.1, j, ny))))
            .collect()
    }

    /// Larger grid spacing.
    pub fn cell(&self) -> f64 {
        let dx = (self.re.1 - self.re.0) / (self.resolution.0 - 1) as f64;
        let dy = (self.im.1 - self.im.0) / (self.resolution.1 - 1) as f64;
        dx.max(dy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVerdict {
    pub energy: [f64; 2],
    pub classification: Classification,
    pub lyapunov: f64,
    pub affinity_defect: Option<f64>,
    pub splitting_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub total: usize,
    pub spectrum: usize,
    pub resolvent: usize,
    pub undecided: usize,
    pub undecided_fraction: f64,
    /// Largest exponent among points classified as spectrum.
    pub max_le_on_spectrum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub verdicts: Vec<SpectrumVerdict>,
    pub summary: ScanSummary,
}

pub fn classify_energies(
    spec: &CocycleSpec,
    energies: &[Complex64],
    lyap: &LyapunovOptions,
    uh: &UhOptions,
) -> Result<Vec<SpectrumVerdict>> {
    energies
        .par_iter()
        .map(|&e| {
            let v = uh_detect(&spec.with_energy(e), lyap, uh)?;
            Ok(SpectrumVerdict {
                energy: [e.re, e.im],
                classification: v.classification,
                lyapunov: v.lyapunov,
                affinity_defect: v.affinity_defect,
                splitting_angle: v.splitting_angle,
            })
        })
        .collect()
}

pub fn summarize(verdicts: &[SpectrumVerdict]) -> ScanSummary {
    let count = |c: Classification| verdicts.iter().filter(|v| v.classification == c).count();
    let undecided = count(Classification::Undecided);
    ScanSummary {
        total: verdicts.len(),
        spectrum: count(Classification::NotUh),
        resolvent: count(Classification::Uh),
        undecided,
        undecided_fraction: if verdicts.is_empty() { 0.0 } else { undecided as f64 / verdicts.len() as f64 },
        max_le_on_spectrum: verdicts
            .iter()
            .filter(|v| v.classification == Classification::NotUh)
            .map(|v| v.lyapunov)
            .fold(0.0, f64::max),
    }
}

/// Classify every grid energy by the uniform hyperbolicity test.
pub fn spectrum_scan(spec: &CocycleSpec, region: &Region, lyap: &LyapunovOptions, uh: &UhOptions) -> Result<SpectrumScan> {
    region.validate()?;
    let verdicts = classify_energies(spec, &region.energies(), lyap, uh)?;
    let summary = summarize(&verdicts);
    Ok(SpectrumScan { verdicts, summary })
}

/// Eigenvalues of the `n x n` truncation with diagonal
/// `lambda v(x + j 2 pi alpha)`, `j = 0..n`, and unit off-diagonals, sorted
/// by real then imaginary part. Diagnostic only: finite sections of
/// non-self-adjoint operators need not approximate the spectrum.
pub fn finite_section_eigenvalues(
    potential: &Potential,
    freq: &Frequency,
    phase: &[f64],
    n: usize,
) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidInput("section size must be positive".into()));
    }
    if phase.len() != freq.dim() || potential.dim() != freq.dim() {
        return Err(Error::InvalidInput("phase, frequency and potential dimensions differ".into()));
    }
    let omega = freq.angles();
    let one = Complex64::new(1.0, 0.0);
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let x: Vec<f64> = phase.iter().zip(&omega).map(|(p, w)| p + i as f64 * w).collect();
            potential.profile.evaluate_real(&x) * potential.coupling
        } else if i.abs_diff(j) == 1 {
            one
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let schur = Schur::try_new(m, 1e-14, 10_000 * n)
        .ok_or_else(|| Error::Numerical(format!("eigenvalue iteration did not converge for n = {n}")))?;
    let mut ev: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("triangular factor has no eigenvalue diagonal".into()))?
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn segment_and_ellipse_membership() {
        let r = sarnak_spectrum_reference(0.5, Complex64::new(1.5, 0.0), 1e-12).unwrap();
        assert!(r.on_spectrum && r.distance == 0.0);
        let r = sarnak_spectrum_reference(2.0, Complex64::new(2.5, 0.0), 1e-12).unwrap();
        assert!(r.on_spectrum && r.equation_residual < 1e-14);
        let r = sarnak_spectrum_reference(2.0, Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!(!r.on_spectrum && (r.distance - 1.5).abs() < 1e-9);
        assert!(sarnak_spectrum_reference(0.0, Complex64::new(0.0, 0.0), 1e-12).is_err());
    }

    #[test]
    fn le_references() {
        assert!((sarnak_le_reference(2.0, Complex64::new(0.0, 0.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(sarnak_le_reference(0.5, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let e10 = ((10.0 + 96f64.sqrt()) / 2.0).ln();
        assert!((sarnak_le_reference(2.0, Complex64::new(10.0, 0.0)).unwrap() - e10).abs() < 1e-14);
        assert_eq!(amo_shift_le_reference(0.5, 0.3, 0.0), 0.0);
        assert!((amo_shift_le_reference(2.0, 0.5, 2f64.ln()) - (2f64.ln() + 0.5)).abs() < 1e-15);
        assert_eq!(amo_shift_le_reference(3.0, 0.0, 0.1), 3f64.ln());
    }

    #[test]
    fn free_finite_section_has_closed_form() {
        let p = Potential::sarnak(0.0, 1.0);
        let ev = finite_section_eigenvalues(&p, &Frequency::golden(), &[0.2], 5).unwrap();
        let mut want: Vec<f64> = (1..=5).map(|k| 2.0 * (k as f64 * PI / 6.0).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_section_is_the_potential_value() {
        let p = Potential::sarnak(1.5, 1.0);
        let ev = finite_section_eigenvalues(&p, &Frequency::golden(), &[0.7], 1).unwrap();
        assert!((ev[0] - Complex64::from_polar(1.5, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn region_grid_shape() {
        let r = Region { re: (-3.0, 3.0), im: (-1.0, 1.0), resolution: (7, 3) };
        let e = r.energies();
        assert_eq!(e.len(), 21);
        assert_eq!(e[0], Complex64::new(-3.0, -1.0));
        assert_eq!(e[20], Complex64::new(3.0, 1.0));
        assert!((r.cell() - 1.0).abs() < 1e-15);
        assert!(Region { resolution: (1, 3), ..r }.validate().is_err());
    }
}
