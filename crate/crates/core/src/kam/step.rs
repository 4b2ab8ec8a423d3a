//! One KAM step: cancel the low Fourier modes of the perturbation by a
//! near-identity conjugation, and in the resonant case rotate the
//! resonant mode into the constant part.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conjugation::{conjugation_residual, Conjugation, Factor};
use super::constant::{ConstantPart, Orientation};
use super::homological::{homological_solve, Exclusion};
use super::resonance::{Branch, ResonantSite};
use crate::algebra::{Coefficient,
    mat_exp_traceless, mat_log_near_identity, ConeSpec, Mat2, MatrixSeries, MultiIndex, TorusGrid, DEFAULT_K_MAX,
};
use crate::diophantine::Frequency;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepOptions {
    /// Largest `|k|_eta` kept in any series.
    pub k_max: f64,
    /// Recovered coefficients at or below this magnitude are treated as roundoff.
    pub coefficient_floor: f64,
    pub max_rounds: usize,
    /// Target low-part norm for the cancellation loop.
    pub fixed_point_tol: f64,
    /// Points per axis of the doubled-torus residual grid; 0 picks by dimension.
    pub residual_grid: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            k_max: DEFAULT_K_MAX,
            coefficient_floor: 1e-14,
            max_rounds: 16,
            fixed_point_tol: 1e-15,
            residual_grid: 0,
        }
    }
}

impl StepOptions {
    pub fn residual_points(&self, dim: usize) -> usize {
        if self.residual_grid > 0 {
            return self.residual_grid;
        }
        match dim {
            1 => 256,
            2 => 32,
            _ => 8,
        }
    }
}

/// `(alpha, A e^{F})` with `F` supported in a cone.
#[derive(Clone, Debug, PartialEq)]
pub struct KamProblem {
    pub constant: ConstantPart,
    pub perturbation: MatrixSeries,
    pub frequency: Frequency,
    pub cone: ConeSpec,
}

impl KamProblem {
    pub fn new(
        constant: ConstantPart,
        perturbation: MatrixSeries,
        frequency: Frequency,
        cone: ConeSpec,
    ) -> Result<Self> {
        if perturbation.scheme != cone.scheme || frequency.dim() != cone.scheme.dim() {
            return Err(Error::InvalidInput("perturbation, frequency and cone disagree on dimension or weights".into()));
        }
        if let Some((k, _)) = perturbation.iter().find(|(k, _)| !cone.contains(k)) {
            return Err(Error::InvalidInput(format!("perturbation mode {k} lies outside the cone")));
        }
        for (k, c) in perturbation.iter() {
            if c.trace().norm() > 1e-12 {
                return Err(Error::InvalidInput(format!("perturbation coefficient at {k} is not traceless")));
            }
        }
        Ok(KamProblem { constant, perturbation, frequency, cone })
    }

    pub fn dim(&self) -> usize {
        self.frequency.dim()
    }

    pub fn width(&self) -> f64 {
        self.perturbation.width
    }
}

/// Parameters of the step after this one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTargets {
    pub width_next: f64,
    pub aperture_next: f64,
    /// Modes with `|k|_eta <= cutoff` are cancelled.
    pub cutoff: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Low-part norm at the start of each round.
    pub low_norms: Vec<f64>,
    /// Largest recovered coefficient outside the next cone, zero mode included.
    pub off_cone_max: f64,
    pub zero_mode: f64,
    /// Mass of cone modes beyond `k_max`.
    pub dropped_mass: f64,
    /// Sum of `||Y_j||_h` over the rounds.
    pub generator_norm: f64,
    pub residual: f64,
    pub grid: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub conjugation: Conjugation,
    pub problem: KamProblem,
    pub diagnostics: StepDiagnostics,
}

pub(super) struct Cancelled {
    pub generators: Vec<MatrixSeries>,
    pub grid: TorusGrid,
    pub samples: Vec<Mat2>,
    pub coeffs: BTreeMap<MultiIndex, Mat2>,
    pub low_norms: Vec<f64>,
}

fn pointwise<F>(n: usize, f: F) -> Result<Vec<Mat2>>
where
    F: Fn(usize) -> Result<Mat2> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Repeatedly solve the homological equation on the low cone modes of the
/// grid-recovered perturbation and conjugate exactly, until the low part is
/// at the noise level.
#[allow(clippy::too_many_arguments)]
pub(super) fn cancel(
    a: &ConstantPart,
    f: &MatrixSeries,
    freq: &Frequency,
    cone: &ConeSpec,
    cutoff: f64,
    exclusions: &[Exclusion],
    opts: &StepOptions,
    margin: i64,
) -> Result<Cancelled> {
    let scheme = &f.scheme;
    let fext = f.axis_extents();
    let extents: Vec<i64> =
        (0..scheme.dim()).map(|j| scheme.axis_extent(j, opts.k_max).max(fext[j]) + margin).collect();
    let grid = TorusGrid::resolving(&extents);
    let omega = freq.angles();
    let am = a.matrix();
    let ainv = am.inverse_unimodular();
    let eps = f.norm();
    let accept = eps.powf(1.5);
    let limit = cutoff.min(opts.k_max);

    let mut samples = grid.synthesize(f, None);
    let mut generators = Vec::new();
    let mut low_norms = Vec::new();
    loop {
        let coeffs = grid.analyze(&samples)?;
        let mut low = MatrixSeries::new(scheme.clone(), f.width);
        for (k, c) in &coeffs {
            if cone.contains(k) && scheme.norm(k) <= limit + 1e-9 && c.magnitude() > opts.coefficient_floor {
                let mut c = *c;
                for e in exclusions.iter().filter(|e| &e.mode == k) {
                    e.component.clear(&mut c);
                }
                low.add_mode(k.clone(), c.traceless_part())?;
            }
        }
        let low_norm = low.norm();
        let stalled = low_norms.last().is_some_and(|&p: &f64| low_norm > 0.5 * p);
        low_norms.push(low_norm);
        if low_norm <= opts.fixed_point_tol || (stalled && low_norm <= accept) {
            return Ok(Cancelled { generators, grid, samples, coeffs, low_norms });
        }
        if generators.len() >= opts.max_rounds {
            if low_norm <= accept {
                return Ok(Cancelled { generators, grid, samples, coeffs, low_norms });
            }
            return Err(Error::FixedPoint(low_norms));
        }
        let y = homological_solve(a, &low, freq, exclusions)?;
        let at_x = grid.synthesize(&y, None);
        let at_shift = grid.synthesize(&y, Some(&omega));
        let prev = samples;
        samples = pointwise(prev.len(), |i| {
            let m = ainv * mat_exp_traceless(&-at_shift[i]) * am * mat_exp_traceless(&prev[i]) * mat_exp_traceless(&at_x[i]);
            mat_log_near_identity(&m)
        })?;
        generators.push(y);
    }
}

fn exp_factors(generators: &[MatrixSeries]) -> Conjugation {
    let mut b = Conjugation::identity();
    for y in generators {
        b.push(Factor::Exp(y.clone()));
    }
    b
}

/// Collect the next perturbation from grid coefficients: cone modes of
/// `cone_next` with `lower < |k|_eta <= k_max` above the floor.
pub(super) fn collect_next(
    coeffs: &BTreeMap<MultiIndex, Mat2>,
    problem: &KamProblem,
    cone_next: &ConeSpec,
    targets: &StepTargets,
    lower: f64,
    opts: &StepOptions,
    diag: &mut StepDiagnostics,
) -> Result<MatrixSeries> {
    let scheme = &problem.perturbation.scheme;
    let mut out = MatrixSeries::new(scheme.clone(), targets.width_next);
    for (k, c) in coeffs {
        let mag = c.magnitude();
        if k.is_zero() {
            diag.zero_mode = mag;
        }
        if !cone_next.contains(k) {
            diag.off_cone_max = diag.off_cone_max.max(mag);
            continue;
        }
        let n = scheme.norm(k);
        if n > opts.k_max + 1e-9 {
            if mag > opts.coefficient_floor {
                diag.dropped_mass += mag;
            }
        } else if n > lower + 1e-9 && mag > opts.coefficient_floor {
            out.add_mode(k.clone(), c.traceless_part())?;
        }
    }
    out.cone = Some(cone_next.aperture);
    Ok(out)
}

/// Step with no resonance below the cutoff: `A_+ = A`, `F_+` is the part of
/// the conjugated perturbation above the cutoff.
pub fn nonresonant_step(problem: &KamProblem, targets: &StepTargets, opts: &StepOptions) -> Result<StepOutcome> {
    let cone_next = problem.cone.with_aperture(targets.aperture_next)?;
    let c = cancel(
        &problem.constant,
        &problem.perturbation,
        &problem.frequency,
        &problem.cone,
        targets.cutoff,
        &[],
        opts,
        0,
    )?;
    let mut diag = StepDiagnostics { low_norms: c.low_norms.clone(), grid: c.grid.sizes.clone(), ..Default::default() };
    let lower = targets.cutoff.min(opts.k_max);
    let f_next = collect_next(&c.coeffs, problem, &cone_next, targets, lower, opts, &mut diag)?;
    diag.generator_norm = c.generators.iter().map(|y| y.norm()).sum::<f64>() + 0.0;
    let conjugation = exp_factors(&c.generators);
    let next = KamProblem {
        constant: problem.constant,
        perturbation: f_next,
        frequency: problem.frequency.clone(),
        cone: cone_next,
    };
    diag.residual = step_residual(problem, &next, &conjugation, opts);
    Ok(StepOutcome { conjugation, problem: next, diagnostics: diag })
}

/// Step at a resonant site: diagonalize, cancel the modes up to the cutoff
/// except the resonant entry, then rotate it into the constant part.
pub fn resonant_step(
    problem: &KamProblem,
    site: &ResonantSite,
    targets: &StepTargets,
    opts: &StepOptions,
) -> Result<StepOutcome> {
    let cone_next = problem.cone.with_aperture(targets.aperture_next)?;
    let a = problem.constant;
    let p = a.diagonalizer()?;
    let diag_a = ConstantPart::diagonal(a.xi);
    let f_diag = problem.perturbation.conjugate_by(&p);
    let comp = site.branch.component();
    let exclusions = [Exclusion { mode: site.mode.clone(), component: comp }];
    let c = cancel(
        &diag_a,
        &f_diag,
        &problem.frequency,
        &problem.cone,
        targets.cutoff,
        &exclusions,
        opts,
        site.mode.max_abs(),
    )?;

    let b = comp.read(&c.coeffs.get(&site.mode).copied().unwrap_or_else(Mat2::zero));
    let s = site.branch.sign();
    let theta = site.mode.dot(&problem.frequency.angles());
    let xi_next = a.xi - Complex64::new(s as f64 * theta / 2.0, 0.0);
    let constant = match site.branch {
        Branch::Minus => ConstantPart::upper(xi_next, b * (Complex64::i() * xi_next).exp()),
        Branch::Plus => ConstantPart::lower(xi_next, b * (-Complex64::i() * xi_next).exp()),
    };
    let lifted = comp.embed(b);
    let unlift = mat_exp_traceless(&-lifted);
    let rot = if s > 0 { site.mode.clone() } else { site.mode.neg() };
    let samples = pointwise(c.samples.len(), |i| {
        let x = c.grid.point(i);
        let ph = Complex64::from_polar(1.0, rot.dot(&x));
        let mut g = c.samples[i];
        g.b *= ph.conj();
        g.c *= ph;
        mat_log_near_identity(&(unlift * mat_exp_traceless(&g)))
    })?;
    let coeffs = c.grid.analyze(&samples)?;
    let mut diag = StepDiagnostics { low_norms: c.low_norms.clone(), grid: c.grid.sizes.clone(), ..Default::default() };
    let f_next = collect_next(&coeffs, problem, &cone_next, targets, 0.0, opts, &mut diag)?;
    diag.generator_norm = c.generators.iter().map(|y| y.norm()).sum::<f64>() + 0.0;

    let mut conjugation = Conjugation::identity();
    if p != Mat2::identity() {
        conjugation.push(Factor::Constant(p));
    }
    conjugation.then(exp_factors(&c.generators));
    conjugation.push(Factor::Rotation(rot));
    let next = KamProblem { constant, perturbation: f_next, frequency: problem.frequency.clone(), cone: cone_next };
    diag.residual = step_residual(problem, &next, &conjugation, opts);
    Ok(StepOutcome { conjugation, problem: next, diagnostics: diag })
}

pub(crate) fn step_residual(before: &KamProblem, after: &KamProblem, b: &Conjugation, opts: &StepOptions) -> f64 {
    conjugation_residual(
        b,
        &before.frequency.angles(),
        (&before.constant.matrix(), &before.perturbation),
        (&after.constant.matrix(), &after.perturbation),
        opts.residual_points(before.dim()),
    )
}

/// Upper-triangular view of a constant part, for reporting.
pub fn upper_form(a: &ConstantPart) -> ConstantPart {
    match a.orientation {
        Orientation::Upper => *a,
        Orientation::Lower => ConstantPart::upper(-a.xi, a.zeta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightScheme;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cone1() -> ConeSpec {
        ConeSpec::new(1.0, WeightScheme::scalar()).unwrap()
    }

    #[test]
    fn zero_perturbation_is_a_fixed_point() {
        let f = MatrixSeries::new(WeightScheme::scalar(), 0.6);
        let p = KamProblem::new(ConstantPart::diagonal(c(0.7, 0.0)), f, Frequency::golden(), cone1()).unwrap();
        let t = StepTargets { width_next: 0.4, aperture_next: 0.9, cutoff: 20.0 };
        let out = nonresonant_step(&p, &t, &StepOptions::default()).unwrap();
        assert!(out.conjugation.factors.is_empty());
        assert!(out.problem.perturbation.is_empty());
        assert_eq!(out.diagnostics.residual, 0.0);
    }

    #[test]
    fn pure_resonant_mode_becomes_constant() {
        let freq = Frequency::golden();
        let k = MultiIndex(vec![1]);
        let xi = c(k.dot(&freq.angles()) / 2.0, 0.0);
        let bval = c(3e-4, -1e-4);
        let f = MatrixSeries::from_modes(WeightScheme::scalar(), 0.6, [(k.clone(), Mat2::traceless(c(0.0, 0.0), bval, c(0.0, 0.0)))])
            .unwrap();
        let p = KamProblem::new(ConstantPart::diagonal(xi), f, freq, cone1()).unwrap();
        let site = ResonantSite { mode: k, branch: Branch::Minus, value: 0.0 };
        let t = StepTargets { width_next: 0.4, aperture_next: 0.9, cutoff: 20.0 };
        let out = resonant_step(&p, &site, &t, &StepOptions::default()).unwrap();
        let a = out.problem.constant;
        assert!(a.xi.norm() < 1e-15);
        assert!((a.zeta - bval).norm() < 1e-15);
        assert!(out.problem.perturbation.norm() < 1e-13);
        assert!(out.diagnostics.residual < 1e-12);
    }
}
