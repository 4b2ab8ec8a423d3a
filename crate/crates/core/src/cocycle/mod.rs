//! Schrodinger cocycles `x -> [[E - lambda v(x + i eps e_0), -1], [1, 0]]`
//! over a torus rotation, with their Lyapunov exponents.

mod lyapunov;
mod uh;

pub use lyapunov::{
    acceleration, free_laplacian_le, lyapunov, transfer_product, LyapunovEstimate, LyapunovOptions,
};
pub use uh::{uh_detect, Classification, SplittingOutcome, UhOptions, UhVerdict};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::algebra::{Mat2, MultiIndex, ScalarSeries, WeightScheme};
use crate::diophantine::Frequency;
use crate::error::{Error, Result};

/// `lambda * v` with `v` a scalar Fourier series analytic on `|Im x_j| < h <j>^eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub coupling: f64,
    pub profile: ScalarSeries,
}

impl Potential {
    pub fn new(coupling: f64, profile: ScalarSeries) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidInput(format!("coupling must be finite, got {coupling}")));
        }
        Ok(Potential { coupling, profile })
    }

    /// `v(x) = e^{i x}` on the circle.
    pub fn sarnak(coupling: f64, width: f64) -> Self {
        let profile = ScalarSeries::from_modes(
            WeightScheme::scalar(),
            width,
            [(MultiIndex(vec![1]), Complex64::new(1.0, 0.0))],
        )
        .expect("one-dimensional mode");
        Potential { coupling, profile }
    }

    /// `v(x) = 2 cos x` on the circle.
    pub fn cosine(coupling: f64, width: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let profile = ScalarSeries::from_modes(
            WeightScheme::scalar(),
            width,
            [(MultiIndex(vec![1]), one), (MultiIndex(vec![-1]), one)],
        )
        .expect("one-dimensional modes");
        Potential { coupling, profile }
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn width(&self) -> f64 {
        self.profile.width
    }
}

/// A Schrodinger cocycle at energy `E` and imaginary phase shift `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleSpec {
    pub frequency: Frequency,
    pub energy: Complex64,
    pub potential: Potential,
    pub phase_shift: f64,
}

impl CocycleSpec {
    pub fn new(frequency: Frequency, energy: Complex64, potential: Potential, phase_shift: f64) -> Result<Self> {
        if frequency.dim() != potential.dim() {
            return Err(Error::InvalidInput(format!(
                "frequency has dimension {}, potential has dimension {}",
                frequency.dim(),
                potential.dim()
            )));
        }
        let spec = CocycleSpec { frequency, energy, potential, phase_shift };
        spec.check_strip(phase_shift)?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.frequency.dim()
    }

    /// Reject shifts at or beyond the analytic strip.
    pub fn check_strip(&self, eps: f64) -> Result<()> {
        let h = self.potential.width();
        if !(eps.abs() < h) {
            return Err(Error::Domain(format!("phase shift |eps| = {} is not inside the strip of width {h}", eps.abs())));
        }
        Ok(())
    }

    pub fn with_shift(&self, eps: f64) -> Result<Self> {
        self.check_strip(eps)?;
        Ok(CocycleSpec { phase_shift: eps, ..self.clone() })
    }

    pub fn with_energy(&self, energy: Complex64) -> Self {
        CocycleSpec { energy, ..self.clone() }
    }
}

/// Transfer matrix at a real phase `x` (radians).
pub fn transfer_matrix(spec: &CocycleSpec, x: &[f64]) -> Mat2 {
    let mut z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    z[0].im += spec.phase_shift;
    let v = spec.potential.profile.evaluate_unchecked(&z);
    schrodinger_matrix(spec.energy - v * spec.potential.coupling)
}

fn schrodinger_matrix(top_left: Complex64) -> Mat2 {
    Mat2::from_real(0.0, -1.0, 1.0, 0.0) + Mat2::diag(top_left, Complex64::new(0.0, 0.0))
}

/// Evaluates the potential along one orbit `x_0 + j 2 pi alpha`, tracking
/// phases in turns to keep the reduction mod 1 exact.
pub(crate) struct OrbitPotential {
    terms: Vec<(Complex64, f64, f64)>,
    energy: Complex64,
}

impl OrbitPotential {
    /// `start` is the base phase in turns.
    pub(crate) fn new(spec: &CocycleSpec, start: &[f64]) -> Self {
        let lambda = spec.potential.coupling;
        let terms = spec
            .potential
            .profile
            .iter()
            .map(|(k, c)| {
                let damp = (-(k.0[0] as f64) * spec.phase_shift).exp();
                let base = k.dot(start);
                let step = spec.frequency.pairing_turns(k);
                (c * (lambda * damp), base - base.floor(), step)
            })
            .collect();
        OrbitPotential { terms, energy: spec.energy }
    }

    /// Transfer matrix at orbit point `j` (may be negative).
    pub(crate) fn matrix(&self, j: i64) -> Mat2 {
        let mut v = Complex64::new(0.0, 0.0);
        for &(c, base, step) in &self.terms {
            let t = base + j as f64 * step;
            v += c * Complex64::from_polar(1.0, TAU * (t - t.floor()));
        }
        schrodinger_matrix(self.energy - v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_matches_direct_transfer_matrix() {
        let spec = CocycleSpec::new(
            Frequency::golden(),
            Complex64::new(0.3, 0.2),
            Potential::sarnak(1.5, 2.0),
            0.4,
        )
        .unwrap();
        let start = [0.123];
        let orbit = OrbitPotential::new(&spec, &start);
        for j in [-3i64, 0, 5, 1000] {
            let x = TAU * (start[0] + j as f64 * spec.frequency.turns[0]);
            let direct = transfer_matrix(&spec, &[x]);
            assert!((orbit.matrix(j) - direct).max_abs() < 1e-10);
        }
    }

    #[test]
    fn strip_violation_rejected() {
        let r = CocycleSpec::new(Frequency::golden(), Complex64::new(0.0, 0.0), Potential::sarnak(1.0, 0.5), 0.6);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn transfer_matrix_is_unimodular() {
        let spec =
            CocycleSpec::new(Frequency::golden(), Complex64::new(1.0, -0.5), Potential::cosine(2.0, 1.0), 0.3).unwrap();
        let m = transfer_matrix(&spec, &[0.77]);
        assert!((m.det() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
