use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lyapunov::{draw_phases, lyapunov, LyapunovOptions};
use super::{CocycleSpec, OrbitPotential};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UhOptions {
    /// Exponents at or below this count as zero.
    pub l_min: f64,
    /// Smallest admissible angle between stable and unstable directions.
    pub angle_min: f64,
    /// Largest midpoint defect `|L(eps+d) + L(eps-d) - 2 L(eps)| / 2` treated as affine.
    pub affinity_tol: f64,
    /// Offset `d` used by the affinity test.
    pub affinity_step: f64,
    pub split_phases: usize,
    pub split_min_iterates: usize,
    pub split_max_iterates: usize,
    /// Two directions agreeing to this angle count as converged.
    pub split_convergence: f64,
}

impl Default for UhOptions {
    fn default() -> Self {
        UhOptions {
            l_min: 5e-3,
            angle_min: 1e-3,
            affinity_tol: 1e-2,
            affinity_step: 0.05,
            split_phases: 16,
            split_min_iterates: 200,
            split_max_iterates: 20_000,
            split_convergence: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Uniformly hyperbolic: `E` is in the resolvent set.
    Uh,
    /// Not uniformly hyperbolic: `E` is in the spectrum.
    NotUh,
    Undecided,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Uh => "resolvent",
            Classification::NotUh => "spectrum",
            Classification::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingOutcome {
    /// Directions converged at every sampled phase and stayed apart.
    Passed,
    /// Directions met, or failed to converge anywhere.
    Collapsed,
    Inconclusive,
    /// Skipped because the exponent already decided.
    NotRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UhVerdict {
    pub classification: Classification,
    pub lyapunov: f64,
    pub lyapunov_std_error: f64,
    /// Midpoint defect of `L` in the phase shift; one-dimensional only.
    pub affinity_defect: Option<f64>,
    pub splitting: SplittingOutcome,
    /// Smallest stable/unstable angle over converged phases.
    pub splitting_angle: Option<f64>,
    pub reason: String,
}

/// Angle between two directions in `CP^1`, accurate near zero.
fn direction_angle(u: [Complex64; 2], v: [Complex64; 2]) -> f64 {
    let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    ((u[0] * v[1] - u[1] * v[0]).norm() / (nu * nv)).min(1.0).asin()
}

fn normalize(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

struct PhaseSplit {
    converged: bool,
    angle: f64,
}

/// Unstable direction from forward iteration over `[-n, 0)`, stable
/// direction from backward iteration over `[0, n)`, each from two starts.
fn split_at(orbit: &OrbitPotential, n: usize, tol: f64) -> PhaseSplit {
    let starts = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let mut unstable = starts;
    let mut stable = starts;
    for j in -(n as i64)..0 {
        let m = orbit.matrix(j);
        for v in unstable.iter_mut() {
            *v = normalize(m.apply(*v));
        }
    }
    for j in (0..n as i64).rev() {
        let inv = orbit.matrix(j).inverse_unimodular();
        for v in stable.iter_mut() {
            *v = normalize(inv.apply(*v));
        }
    }
    let converged = direction_angle(unstable[0], unstable[1]) < tol && direction_angle(stable[0], stable[1]) < tol;
    PhaseSplit { converged, angle: direction_angle(unstable[0], stable[0]) }
}

fn splitting_test(spec: &CocycleSpec, exponent: f64, opts: &UhOptions, seed: u64) -> (SplittingOutcome, Option<f64>) {
    let n = if exponent > 0.0 {
        ((40.0 / exponent).ceil() as usize).clamp(opts.split_min_iterates, opts.split_max_iterates)
    } else {
        opts.split_max_iterates
    };
    let phases = draw_phases(spec.dim(), opts.split_phases, seed.wrapping_add(0x9e37_79b9));
    let results: Vec<PhaseSplit> = phases
        .iter()
        .map(|p| split_at(&OrbitPotential::new(spec, p), n, opts.split_convergence))
        .collect();
    let angle = results.iter().filter(|r| r.converged).map(|r| r.angle).fold(None, |acc: Option<f64>, a| {
        Some(acc.map_or(a, |b| b.min(a)))
    });
    let converged = results.iter().filter(|r| r.converged).count();
    let outcome = match angle {
        Some(a) if a < opts.angle_min => SplittingOutcome::Collapsed,
        _ if converged == 0 => SplittingOutcome::Collapsed,
        _ if converged == results.len() => SplittingOutcome::Passed,
        _ => SplittingOutcome::Inconclusive,
    };
    (outcome, angle)
}

/// Classify `E` as uniformly hyperbolic, not, or undecided.
///
/// An exponent at or below `l_min` means not uniformly hyperbolic. In one
/// frequency a positive exponent is uniformly hyperbolic exactly when it is
/// affine in the phase shift near `eps`, so the affinity test decides there
/// and a collapsed splitting against an affine exponent is reported as
/// undecided. With several frequencies the splitting test decides alone.
pub fn uh_detect(spec: &CocycleSpec, lyap: &LyapunovOptions, opts: &UhOptions) -> Result<UhVerdict> {
    let base = lyapunov(spec, lyap)?;
    let l0 = base.value;
    let mut verdict = UhVerdict {
        classification: Classification::NotUh,
        lyapunov: l0,
        lyapunov_std_error: base.std_error,
        affinity_defect: None,
        splitting: SplittingOutcome::NotRun,
        splitting_angle: None,
        reason: format!("exponent {l0:.3e} at or below {:.1e}", opts.l_min),
    };
    if l0 <= opts.l_min {
        return Ok(verdict);
    }
    let (splitting, splitting_angle) = splitting_test(spec, l0, opts, lyap.seed);
    verdict.splitting = splitting;
    verdict.splitting_angle = splitting_angle;
    let affinity = if spec.dim() == 1 {
        let d = opts.affinity_step;
        match (spec.with_shift(spec.phase_shift + d), spec.with_shift(spec.phase_shift - d)) {
            (Ok(up), Ok(down)) => {
                let lu = lyapunov(&up, lyap)?.value;
                let ld = lyapunov(&down, lyap)?.value;
                Some((lu + ld - 2.0 * l0).abs() / 2.0)
            }
            _ => None,
        }
    } else {
        None
    };
    verdict.affinity_defect = affinity;
    let (class, reason) = match affinity {
        Some(defect) if defect > opts.affinity_tol => {
            (Classification::NotUh, format!("exponent not affine in the shift (defect {defect:.3e})"))
        }
        Some(_) if splitting == SplittingOutcome::Collapsed => {
            (Classification::Undecided, "affine exponent but invariant directions collapse".to_string())
        }
        Some(defect) => (Classification::Uh, format!("positive exponent, affine in the shift (defect {defect:.3e})")),
        None => match splitting {
            SplittingOutcome::Passed => (Classification::Uh, "invariant directions split".to_string()),
            SplittingOutcome::Collapsed => (Classification::NotUh, "invariant directions collapse".to_string()),
            SplittingOutcome::Inconclusive | SplittingOutcome::NotRun => {
                (Classification::Undecided, "splitting converged at some phases only".to_string())
            }
        },
    };
    verdict.classification = class;
    verdict.reason = reason;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::Potential;
    use crate::diophantine::Frequency;

    fn quick() -> LyapunovOptions {
        LyapunovOptions { iterates: 5_000, phases: 4, seed: 2 }
    }

    #[test]
    fn free_cocycle_off_interval_is_uh() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(2.6, 0.0), Potential::sarnak(0.0, 1.0), 0.0).unwrap();
        let v = uh_detect(&spec, &quick(), &UhOptions::default()).unwrap();
        assert_eq!(v.classification, Classification::Uh);
        assert_eq!(v.splitting, SplittingOutcome::Passed);
    }

    #[test]
    fn free_cocycle_on_interval_is_not_uh() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(0.7, 0.0), Potential::sarnak(0.0, 1.0), 0.0).unwrap();
        let v = uh_detect(&spec, &quick(), &UhOptions::default()).unwrap();
        assert_eq!(v.classification, Classification::NotUh);
    }

    #[test]
    fn angle_is_accurate_near_zero() {
        let u = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let v = [Complex64::new(1.0, 0.0), Complex64::new(1e-12, 0.0)];
        assert!((direction_angle(u, v) - 1e-12).abs() < 1e-24);
    }
}
