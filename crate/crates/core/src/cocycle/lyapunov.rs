use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CocycleSpec, OrbitPotential};
use crate::algebra::Mat2;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub iterates: usize,
    pub phases: usize,
    pub seed: u64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { iterates: 100_000, phases: 8, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    /// Standard error of the mean over phases.
    pub std_error: f64,
    pub per_phase: Vec<f64>,
    pub iterates: usize,
}

/// Base phases in turns, drawn from a seeded stream.
pub(crate) fn draw_phases(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// `A_n(x_0)` written as `exp(log_scale) * normalized`, renormalizing by the
/// Frobenius norm each step. `start` is in turns.
pub fn transfer_product(spec: &CocycleSpec, start: &[f64], n: usize) -> (Mat2, f64) {
    let orbit = OrbitPotential::new(spec, start);
    let mut m = Mat2::identity();
    let mut log_scale = 0.0;
    for j in 0..n {
        m = orbit.matrix(j as i64) * m;
        let f = m.frobenius();
        m = m.scale_real(1.0 / f);
        log_scale += f.ln();
    }
    (m, log_scale)
}

fn finite_exponent(spec: &CocycleSpec, start: &[f64], n: usize) -> f64 {
    let (m, log_scale) = transfer_product(spec, start, n);
    (log_scale + m.op_norm().ln()) / n as f64
}

/// Finite-time exponent `(1/n) log ||A_n||` averaged over seeded phases.
pub fn lyapunov(spec: &CocycleSpec, opts: &LyapunovOptions) -> Result<LyapunovEstimate> {
    if opts.iterates == 0 || opts.phases == 0 {
        return Err(Error::InvalidInput("iterates and phases must be positive".into()));
    }
    spec.check_strip(spec.phase_shift)?;
    let starts = draw_phases(spec.dim(), opts.phases, opts.seed);
    let per_phase: Vec<f64> = starts.par_iter().map(|s| finite_exponent(spec, s, opts.iterates)).collect();
    if let Some(bad) = per_phase.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite exponent {bad}")));
    }
    let m = per_phase.len() as f64;
    let value = per_phase.iter().sum::<f64>() / m;
    let var = if per_phase.len() > 1 {
        per_phase.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(LyapunovEstimate { value, std_error: (var / m).sqrt(), per_phase, iterates: opts.iterates })
}

/// Exponent of the constant cocycle `[[E, -1], [1, 0]]`.
pub fn free_laplacian_le(energy: Complex64) -> f64 {
    let half = energy * 0.5;
    let root = (half * half - 1.0).sqrt();
    (half + root).norm().ln().max((half - root).norm().ln())
}

/// Central difference `(L(eps + step) - L(eps - step)) / (2 step)`.
pub fn acceleration(spec: &CocycleSpec, eps: f64, step: f64, opts: &LyapunovOptions) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("difference step must be positive, got {step}")));
    }
    let up = lyapunov(&spec.with_shift(eps + step)?, opts)?.value;
    let down = lyapunov(&spec.with_shift(eps - step)?, opts)?.value;
    Ok((up - down) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::Potential;
    use crate::diophantine::Frequency;

    #[test]
    fn free_exponent_values() {
        assert!(free_laplacian_le(Complex64::new(0.0, 0.0)).abs() < 1e-15);
        assert!(free_laplacian_le(Complex64::new(1.9, 0.0)).abs() < 1e-15);
        let e = free_laplacian_le(Complex64::new(3.0, 0.0));
        assert!((e - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_reproduces_free_exponent() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(2.5, 0.3), Potential::sarnak(0.0, 1.0), 0.0).unwrap();
        let est = lyapunov(&spec, &LyapunovOptions { iterates: 20_000, phases: 4, seed: 3 }).unwrap();
        assert!((est.value - free_laplacian_le(spec.energy)).abs() < 1e-3);
    }

    #[test]
    fn renormalized_product_preserves_determinant() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(0.4, 0.0), Potential::sarnak(0.3, 1.0), 0.0).unwrap();
        let (m, log_scale) = transfer_product(&spec, &[0.31], 100_000);
        let det = m.det() * (2.0 * log_scale).exp();
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn same_seed_same_result() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(0.1, 0.5), Potential::sarnak(2.0, 2.0), 0.0).unwrap();
        let o = LyapunovOptions { iterates: 5_000, phases: 8, seed: 9 };
        assert_eq!(lyapunov(&spec, &o).unwrap(), lyapunov(&spec, &o).unwrap());
    }
}
