//! Reducibility drivers: iterate KAM steps along a shrinking schedule of
//! widths and cone apertures, recording one trace line per step.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::conjugation::{conjugation_residual, Conjugation, Factor};
use super::constant::{ConstantPart, Orientation};
use super::homological::{Component, Exclusion, DENOMINATOR_FLOOR};
use super::resonance::{classify_resonance, Branch, ResonanceReport};
use super::step::{cancel, collect_next, nonresonant_step, resonant_step};
use super::step::{step_residual, KamProblem, StepDiagnostics, StepOptions, StepOutcome, StepTargets};
use crate::algebra::{mat_exp_traceless, mat_log_near_identity, Coefficient, ConeSpec, Mat2, MatrixSeries, MultiIndex};
use crate::cocycle::CocycleSpec;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KamOptions {
    /// Limit `h'` of the widths.
    pub width_final: f64,
    /// Limit `r'` of the apertures.
    pub aperture_final: f64,
    pub max_steps: usize,
    /// Stop once `||F_n|| < target`.
    pub target: f64,
    /// Fixed resonance threshold instead of `||F||^{1/10}`.
    pub delta: Option<f64>,
    /// Fixed cutoff instead of `2|ln ||F||| / (h_n - h_{n+1})`.
    pub cutoff: Option<f64>,
    /// Largest accepted conjugation residual per step.
    pub residual_tol: f64,
    pub step: StepOptions,
}

impl Default for KamOptions {
    fn default() -> Self {
        KamOptions {
            width_final: 0.0,
            aperture_final: 0.0,
            max_steps: 8,
            target: 1e-12,
            delta: None,
            cutoff: None,
            residual_tol: 1e-9,
            step: StepOptions::default(),
        }
    }
}

/// `h_{n+1} = h_n - (h - h')/(n+2)^2`, and likewise for the aperture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KamSchedule {
    pub width: f64,
    pub width_final: f64,
    pub aperture: f64,
    pub aperture_final: f64,
}

impl KamSchedule {
    /// A final value of 0 is read as half the initial one.
    pub fn new(width: f64, aperture: f64, width_final: f64, aperture_final: f64) -> Result<Self> {
        let wf = if width_final > 0.0 { width_final } else { width / 2.0 };
        let af = if aperture_final > 0.0 { aperture_final } else { aperture / 2.0 };
        if !(wf < width) || !(af <= aperture) || af <= 0.0 {
            return Err(Error::Config(format!(
                "schedule needs 0 < h' < h and 0 < r' <= r, got h={width}, h'={wf}, r={aperture}, r'={af}"
            )));
        }
        Ok(KamSchedule { width, width_final: wf, aperture, aperture_final: af })
    }

    fn sequence(start: f64, end: f64, n: usize) -> f64 {
        (0..n).fold(start, |v, i| v - (start - end) / ((i + 2) * (i + 2)) as f64)
    }

    pub fn width_at(&self, n: usize) -> f64 {
        Self::sequence(self.width, self.width_final, n)
    }

    pub fn aperture_at(&self, n: usize) -> f64 {
        Self::sequence(self.aperture, self.aperture_final, n)
    }

    pub fn cutoff_at(&self, n: usize, eps: f64) -> f64 {
        2.0 * eps.ln().abs() / (self.width_at(n) - self.width_at(n + 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Nonresonant,
    Resonant,
    /// Final diagonalization of a hyperbolic constant part.
    HyperbolicFinish,
}

/// One trace line. Angles are in turns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub kind: StepKind,
    pub k_star: Option<Vec<i64>>,
    pub branch: Option<Branch>,
    pub offending_value: f64,
    pub delta: f64,
    pub cutoff: f64,
    pub near_threshold: bool,
    pub resonant_sites: usize,
    pub width: f64,
    pub aperture: f64,
    pub xi_turns: [f64; 2],
    pub rho_turns: f64,
    pub zeta: [f64; 2],
    pub orientation: Orientation,
    pub norm_before: f64,
    pub norm_after: f64,
    /// `|rho_{n+1} - (rho_n - s <k*, 2 pi alpha>/2)|` on resonant steps.
    pub rho_update_error: Option<f64>,
    pub diagnostics: StepDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormalForm {
    /// Reducible to a rotation by `rho`.
    Elliptic { rho_turns: f64 },
    /// Reducible to `sign * [[1, zeta], [0, 1]]`.
    Parabolic { sign: f64, zeta: [f64; 2] },
    /// Reducible to `diag(e^{i xi}, e^{-i xi})` with `Im xi != 0`.
    Hyperbolic { xi_turns: [f64; 2] },
    /// The perturbation was not removed within the step budget.
    Unfinished,
}

#[derive(Clone, Debug)]
pub struct KamTrace {
    pub steps: Vec<StepRecord>,
    pub initial: ConstantPart,
    pub terminal: KamProblem,
    pub conjugation: Conjugation,
    pub normal_form: NormalForm,
    /// Resonant modes in order, with `|k_{j+1}| >= |k_j|^{1 + eta/(4+eta)}` checked pairwise.
    pub resonance_gaps_grow: Option<bool>,
    pub im_xi_drift: f64,
}

impl KamTrace {
    pub fn resonances(&self) -> usize {
        self.steps.iter().filter(|s| s.kind == StepKind::Resonant).count()
    }

    /// JSON-lines text, one step per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).map_err(|e| Error::Numerical(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn turns(z: Complex64) -> [f64; 2] {
    [z.re / TAU, z.im / TAU]
}

struct Iteration {
    steps: Vec<StepRecord>,
    problem: KamProblem,
    conjugation: Conjugation,
}

/// Run KAM steps until `stop(problem, eps)` holds or the budget is spent.
fn iterate<S>(problem: &KamProblem, opts: &KamOptions, mut stop: S) -> Result<Iteration>
where
    S: FnMut(&KamProblem, f64) -> bool,
{
    let schedule = KamSchedule::new(problem.width(), problem.cone.aperture, opts.width_final, opts.aperture_final)?;
    let mut current = problem.clone();
    let mut conjugation = Conjugation::identity();
    let mut steps = Vec::new();
    let omega = problem.frequency.angles();
    for n in 0..opts.max_steps {
        let eps = current.perturbation.norm();
        if eps == 0.0 || eps < opts.target || stop(&current, eps) {
            break;
        }
        let targets = StepTargets {
            width_next: schedule.width_at(n + 1),
            aperture_next: schedule.aperture_at(n + 1),
            cutoff: opts.cutoff.unwrap_or_else(|| schedule.cutoff_at(n, eps)),
        };
        let delta = opts.delta.unwrap_or_else(|| eps.powf(0.1));
        let scan_radius = targets.cutoff.min(opts.step.k_max);
        let report: ResonanceReport =
            classify_resonance(&current.constant, &current.frequency, &current.cone, scan_radius, delta);
        let outcome: StepOutcome = match &report.chosen {
            None => nonresonant_step(&current, &targets, &opts.step),
            Some(site) => resonant_step(&current, site, &targets, &opts.step),
        }
        .map_err(|e| context(n, e))?;
        if !(outcome.diagnostics.residual < opts.residual_tol) {
            return Err(Error::Numerical(format!(
                "step {n}: conjugation residual {:.3e} exceeds {:.1e}",
                outcome.diagnostics.residual, opts.residual_tol
            )));
        }
        let next = &outcome.problem;
        let rho_update_error = report.chosen.as_ref().map(|site| {
            let s = site.branch.sign() as f64;
            let expected = current.constant.xi.re - s * site.mode.dot(&omega) / 2.0;
            (next.constant.xi.re - expected).abs()
        });
        steps.push(StepRecord {
            n,
            kind: if report.chosen.is_some() { StepKind::Resonant } else { StepKind::Nonresonant },
            k_star: report.chosen.as_ref().map(|s| s.mode.0.clone()),
            branch: report.chosen.as_ref().map(|s| s.branch),
            offending_value: report.min_value,
            delta,
            cutoff: targets.cutoff,
            near_threshold: report.near_threshold,
            resonant_sites: report.site_count,
            width: current.width(),
            aperture: current.cone.aperture,
            xi_turns: turns(next.constant.xi),
            rho_turns: next.constant.rho_mod_pi() / TAU,
            zeta: [next.constant.zeta.re, next.constant.zeta.im],
            orientation: next.constant.orientation,
            norm_before: eps,
            norm_after: next.perturbation.norm(),
            rho_update_error,
            diagnostics: outcome.diagnostics,
        });
        conjugation.then(outcome.conjugation);
        current = outcome.problem;
    }
    Ok(Iteration { steps, problem: current, conjugation })
}

fn context(n: usize, e: Error) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("step {n}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("step {n}: {m}")),
        other => other,
    }
}

fn gaps_grow(steps: &[StepRecord], problem: &KamProblem) -> Option<bool> {
    let scheme = &problem.cone.scheme;
    let norms: Vec<f64> = steps
        .iter()
        .filter_map(|s| s.k_star.as_ref())
        .map(|k| scheme.norm(&MultiIndex(k.clone())))
        .collect();
    if norms.len() < 2 {
        return None;
    }
    let p = 1.0 + scheme.eta / (4.0 + scheme.eta);
    Some(norms.windows(2).all(|w| w[1] >= w[0].powf(p) - 1e-9))
}

fn elliptic_normal_form(p: &KamProblem, opts: &KamOptions) -> NormalForm {
    if p.perturbation.norm() >= opts.target {
        return NormalForm::Unfinished;
    }
    let a = &p.constant;
    let e = a.eigenvalue();
    // A zeta below the target is no larger than the perturbation already dropped.
    if (e - e.inv()).norm() < 1e-8 && a.zeta.norm() > opts.target.max(1e-14) {
        NormalForm::Parabolic { sign: e.re.signum(), zeta: [a.zeta.re, a.zeta.im] }
    } else {
        NormalForm::Elliptic { rho_turns: a.rho_mod_pi() / TAU }
    }
}

/// Reduce `(alpha, A e^F)` with real `xi`.
pub fn reduce_elliptic(problem: &KamProblem, opts: &KamOptions) -> Result<KamTrace> {
    if problem.constant.xi.im.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "elliptic reduction needs real xi, got Im xi = {:.3e}",
            problem.constant.xi.im
        )));
    }
    let it = iterate(problem, opts, |_, _| false)?;
    let drift = it.steps.iter().map(|s| (s.xi_turns[1] * TAU).abs()).fold(0.0, f64::max);
    Ok(KamTrace {
        resonance_gaps_grow: gaps_grow(&it.steps, problem),
        normal_form: elliptic_normal_form(&it.problem, opts),
        steps: it.steps,
        initial: problem.constant,
        terminal: it.problem,
        conjugation: it.conjugation,
        im_xi_drift: drift,
    })
}

/// Reduce `(alpha, A e^F)` with `Im xi != 0` to `diag(e^{i xi'}, e^{-i xi'})`.
/// Weakly hyperbolic constants are first brought to
/// `||F||^{9/10} <= min(1e-8, |Im xi|^3)` by KAM steps.
pub fn reduce_hyperbolic(problem: &KamProblem, opts: &KamOptions) -> Result<KamTrace> {
    let im0 = problem.constant.xi.im;
    if im0 == 0.0 {
        return Err(Error::InvalidInput("hyperbolic reduction needs Im xi != 0".into()));
    }
    let it = if im0.abs() >= 0.5 {
        Iteration { steps: Vec::new(), problem: problem.clone(), conjugation: Conjugation::identity() }
    } else {
        iterate(problem, opts, |p, eps| eps.powf(0.9) <= 1e-8f64.min(p.constant.xi.im.abs().powi(3)))?
    };
    let mut steps = it.steps;
    let mut conjugation = it.conjugation;
    let n = steps.len();
    let before = it.problem;
    let (finish, diag) = hyperbolic_finish(&before, &opts.step).map_err(|e| context(n, e))?;
    if !(diag.residual < opts.residual_tol) {
        return Err(Error::Numerical(format!(
            "hyperbolic finish: conjugation residual {:.3e} exceeds {:.1e}",
            diag.residual, opts.residual_tol
        )));
    }
    let after = finish.problem;
    steps.push(StepRecord {
        n,
        kind: StepKind::HyperbolicFinish,
        k_star: None,
        branch: None,
        offending_value: f64::NAN,
        delta: 0.0,
        cutoff: opts.step.k_max,
        near_threshold: false,
        resonant_sites: 0,
        width: before.width(),
        aperture: before.cone.aperture,
        xi_turns: turns(after.constant.xi),
        rho_turns: after.constant.rho_mod_pi() / TAU,
        zeta: [after.constant.zeta.re, after.constant.zeta.im],
        orientation: after.constant.orientation,
        norm_before: before.perturbation.norm(),
        norm_after: after.perturbation.norm(),
        rho_update_error: None,
        diagnostics: diag,
    });
    conjugation.then(finish.conjugation);
    let drift = steps.iter().map(|s| (s.xi_turns[1] * TAU - im0).abs()).fold(0.0, f64::max);
    let normal_form = if after.perturbation.norm() < opts.target {
        NormalForm::Hyperbolic { xi_turns: turns(after.constant.xi) }
    } else {
        NormalForm::Unfinished
    };
    Ok(KamTrace {
        resonance_gaps_grow: gaps_grow(&steps, problem),
        steps,
        initial: problem.constant,
        terminal: after,
        conjugation,
        normal_form,
        im_xi_drift: drift,
    })
}

struct Finish {
    problem: KamProblem,
    conjugation: Conjugation,
}

/// Diagonalize, cancel everything except the diagonal entries at modes with
/// `|e^{i<k,w>} - 1| < ||F||^{1/3}`, then remove those by the scalar
/// equation `phi(x + w) - phi(x) = f(x)`.
fn hyperbolic_finish(problem: &KamProblem, opts: &StepOptions) -> Result<(Finish, StepDiagnostics)> {
    let a = problem.constant;
    let p = a.diagonalizer()?;
    let diag_a = ConstantPart::diagonal(a.xi);
    let f = problem.perturbation.conjugate_by(&p);
    let sigma = f.norm().powf(1.0 / 3.0);
    let freq = &problem.frequency;
    let exclusions: Vec<Exclusion> = problem
        .cone
        .members_up_to(opts.k_max)
        .into_iter()
        .filter(|k| (Complex64::from_polar(1.0, freq.pairing_angle(k)) - 1.0).norm() < sigma)
        .map(|mode| Exclusion { mode, component: Component::Diagonal })
        .collect();
    let c = cancel(&diag_a, &f, freq, &problem.cone, opts.k_max, &exclusions, opts, 0)?;

    let mut phi = MatrixSeries::new(f.scheme.clone(), f.width);
    for e in &exclusions {
        let Some(coef) = c.coeffs.get(&e.mode) else { continue };
        let v = coef.a;
        if v.norm() <= opts.coefficient_floor {
            continue;
        }
        let den = Complex64::from_polar(1.0, freq.pairing_angle(&e.mode)) - 1.0;
        if den.norm() < DENOMINATOR_FLOOR {
            return Err(Error::SmallDenominator {
                mode: e.mode.to_string(),
                component: Component::Diagonal.label().into(),
                value: den.norm(),
            });
        }
        phi.add_mode(e.mode.clone(), Component::Diagonal.embed(v / den))?;
    }
    let omega = freq.angles();
    let at_x = c.grid.synthesize(&phi, None);
    let at_shift = c.grid.synthesize(&phi, Some(&omega));
    let am = diag_a.matrix();
    let ainv = am.inverse_unimodular();
    let samples: Vec<Mat2> = (0..c.samples.len())
        .map(|i| {
            let m = ainv * mat_exp_traceless(&-at_shift[i]) * am * mat_exp_traceless(&c.samples[i]) * mat_exp_traceless(&at_x[i]);
            mat_log_near_identity(&m)
        })
        .collect::<Result<_>>()?;
    let coeffs = c.grid.analyze(&samples)?;
    let mut diag = StepDiagnostics { low_norms: c.low_norms.clone(), grid: c.grid.sizes.clone(), ..Default::default() };
    let targets = StepTargets { width_next: problem.width(), aperture_next: problem.cone.aperture, cutoff: opts.k_max };
    let f_next = collect_next(&coeffs, problem, &problem.cone, &targets, 0.0, opts, &mut diag)?;
    diag.generator_norm = c.generators.iter().map(|y| y.norm()).sum::<f64>() + phi.norm();

    let mut conjugation = Conjugation::identity();
    if p != Mat2::identity() {
        conjugation.push(Factor::Constant(p));
    }
    for y in c.generators {
        conjugation.push(Factor::Exp(y));
    }
    if !phi.is_empty() {
        conjugation.push(Factor::Exp(phi));
    }
    let next = KamProblem {
        constant: diag_a,
        perturbation: f_next,
        frequency: problem.frequency.clone(),
        cone: problem.cone.clone(),
    };
    diag.residual = step_residual(problem, &next, &conjugation, opts);
    Ok((Finish { problem: next, conjugation }, diag))
}

/// Schrodinger cocycle written as `U0 (A e^{F}) U0^{-1}` with `A` upper
/// triangular and `U0` unitary.
#[derive(Clone, Debug)]
pub struct SchrodingerEmbedding {
    pub problem: KamProblem,
    pub frame: Mat2,
    /// Constant Schrodinger matrix at the energy.
    pub base: Mat2,
}

/// `xi` with `e^{i xi}` an eigenvalue of `[[E, -1], [1, 0]]`: real
/// `arccos(E/2)` inside `(-2, 2)`, otherwise the root of modulus above one.
pub fn energy_exponent(energy: Complex64) -> Complex64 {
    if energy.im == 0.0 && energy.re.abs() <= 2.0 {
        return Complex64::new((energy.re / 2.0).acos(), 0.0);
    }
    let half = energy / 2.0;
    let root = (half * half - 1.0).sqrt();
    let (p, m) = (half + root, half - root);
    let mu = if p.norm() >= m.norm() { p } else { m };
    -Complex64::i() * mu.ln()
}

pub fn schrodinger_embedding(spec: &CocycleSpec, aperture: f64) -> Result<SchrodingerEmbedding> {
    let xi = energy_exponent(spec.energy);
    let lam = (Complex64::i() * xi).exp();
    let s = 1.0 / (lam.norm_sqr() + 1.0).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let frame = Mat2::new(lam, -one, one, lam.conj()).scale_real(s);
    let base = Mat2::new(spec.energy, -one, one, Complex64::new(0.0, 0.0));
    let finv = frame.inverse_unimodular();
    let conj = finv * base * frame;
    let constant = ConstantPart::upper(xi, conj.b);
    let scheme = spec.potential.profile.scheme.clone();
    let eps = spec.phase_shift;
    let width = spec.potential.width() - eps.abs();
    let mut f = MatrixSeries::new(scheme.clone(), width);
    for (k, c) in spec.potential.profile.iter() {
        let damp = (-(k.0[0] as f64) * eps).exp();
        let raw = Mat2::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), c * (spec.potential.coupling * damp), Complex64::new(0.0, 0.0));
        f.add_mode(k.clone(), finv * raw * frame)?;
    }
    let f = f.filter(|_, c| c.magnitude() > 0.0);
    let cone = ConeSpec::new(aperture, scheme)?;
    let problem = KamProblem::new(constant, f, spec.frequency.clone(), cone)?;
    Ok(SchrodingerEmbedding { problem, frame, base })
}

/// Elliptic or hyperbolic reduction depending on `Im xi`.
pub fn reduce(problem: &KamProblem, opts: &KamOptions) -> Result<KamTrace> {
    if problem.constant.xi.im == 0.0 {
        reduce_elliptic(problem, opts)
    } else {
        reduce_hyperbolic(problem, opts)
    }
}

/// Doubled-torus residual of the whole conjugation against the original.
pub fn trace_residual(trace: &KamTrace, original: &KamProblem, opts: &StepOptions) -> f64 {
    conjugation_residual(
        &trace.conjugation,
        &original.frequency.angles(),
        (&original.constant.matrix(), &original.perturbation),
        (&trace.terminal.constant.matrix(), &trace.terminal.perturbation),
        opts.residual_points(original.dim()),
    )
}
