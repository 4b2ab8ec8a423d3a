//! Rotation vectors and their small denominators.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::algebra::{MultiIndex, WeightScheme};
use crate::error::{Error, Result};

/// Rotation vector stored in turns (fractions of the circle).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub turns: Vec<f64>,
}

impl Frequency {
    pub fn new(turns: Vec<f64>) -> Result<Self> {
        if turns.is_empty() || turns.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid frequency {turns:?}")));
        }
        Ok(Frequency { turns })
    }

    /// `(sqrt 5 - 1)/2`.
    pub fn golden() -> Self {
        Frequency { turns: vec![(5f64.sqrt() - 1.0) / 2.0] }
    }

    /// `sqrt 2 - 1`.
    pub fn silver() -> Self {
        Frequency { turns: vec![2f64.sqrt() - 1.0] }
    }

    /// Golden and silver means together; `1, sqrt 2, sqrt 5` are rationally
    /// independent.
    pub fn golden_silver() -> Self {
        Frequency { turns: vec![(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0] }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "golden" => Ok(Frequency::golden()),
            "silver" => Ok(Frequency::silver()),
            "golden-silver" => Ok(Frequency::golden_silver()),
            other => Err(Error::Config(format!(
                "unknown frequency preset `{other}` (known: golden, silver, golden-silver)"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.turns.len()
    }

    /// Rotation in radians, `2 pi alpha`.
    pub fn angles(&self) -> Vec<f64> {
        self.turns.iter().map(|t| TAU * t).collect()
    }

    /// `<k, alpha>` reduced to `[-1/2, 1/2)` turns.
    pub fn pairing_turns(&self, k: &MultiIndex) -> f64 {
        let t: f64 = k.0.iter().zip(&self.turns).map(|(&kj, a)| kj as f64 * a).sum();
        t - (t + 0.5).floor()
    }

    /// `<k, 2 pi alpha>` reduced to `[-pi, pi)`.
    pub fn pairing_angle(&self, k: &MultiIndex) -> f64 {
        TAU * self.pairing_turns(k)
    }
}

/// `(gamma, tau)` in `|<k, alpha>|_T >= gamma / prod (1 + <j>^tau |k_j|^tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
}

/// Distance from `theta` to the nearest multiple of `2 pi`.
pub fn torus_distance(theta: f64) -> f64 {
    (theta - TAU * (theta / TAU).round()).abs()
}

/// `|| <k, 2 pi alpha> ||_T`.
pub fn small_denominator(k: &MultiIndex, freq: &Frequency) -> f64 {
    freq.pairing_angle(k).abs()
}

/// `prod_j (1 + <j>^tau |k_j|^tau)`.
pub fn diophantine_weight(k: &MultiIndex, tau: f64) -> f64 {
    k.0.iter()
        .enumerate()
        .map(|(j, &kj)| 1.0 + (j.max(1) as f64).powf(tau) * (kj.abs() as f64).powf(tau))
        .product()
}

/// Empirical Diophantine constant over `0 < |k|_eta <= k_max`; infinite when
/// that range is empty.
pub fn estimate_gamma(freq: &Frequency, tau: f64, k_max: f64, scheme: &WeightScheme) -> Result<f64> {
    if freq.dim() != scheme.dim() {
        return Err(Error::InvalidInput("frequency and weight scheme dimensions differ".into()));
    }
    Ok(scheme
        .ball(k_max)
        .into_iter()
        .filter(|k| !k.is_zero())
        .map(|k| small_denominator(&k, freq) * diophantine_weight(&k, tau))
        .fold(f64::INFINITY, f64::min))
}

/// Lower bound `gamma (1 + n)^(-c1 n^(1/(eta+1)))` on denominators up to
/// `|k|_eta <= n`. At `n = 0` this is `gamma`.
pub fn small_denom_bound(n: f64, params: &DiophantineParams, eta: f64, c1: f64) -> f64 {
    if n <= 0.0 {
        return params.gamma;
    }
    params.gamma * (1.0 + n).powf(-c1 * n.powf(1.0 / (eta + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_distance_wraps() {
        assert!((torus_distance(TAU + 0.1) - 0.1).abs() < 1e-15);
        assert!((torus_distance(-0.2) - 0.2).abs() < 1e-15);
        assert!((torus_distance(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn golden_first_denominator() {
        // |<1, 2 pi (sqrt5-1)/2>|_T = 2 pi (1 - 0.618...) = pi (3 - sqrt 5).
        let d = small_denominator(&MultiIndex(vec![1]), &Frequency::golden());
        assert!((d - std::f64::consts::PI * (3.0 - 5f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn rational_frequency_has_zero_gamma() {
        let g = estimate_gamma(&Frequency::new(vec![0.5]).unwrap(), 1.0, 2.0, &WeightScheme::scalar()).unwrap();
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn empty_range_gives_infinity() {
        let g = estimate_gamma(&Frequency::golden(), 1.0, 0.5, &WeightScheme::scalar()).unwrap();
        assert!(g.is_infinite());
    }

    #[test]
    fn bound_examples() {
        let p = DiophantineParams { gamma: 0.1, tau: 2.0 };
        assert!((small_denom_bound(1.0, &p, 1.0, 1.0) - 0.05).abs() < 1e-15);
        assert_eq!(small_denom_bound(0.0, &p, 1.0, 1.0), 0.1);
    }

    #[test]
    fn unknown_preset_is_error() {
        assert!(Frequency::preset("bronze").is_err());
    }
}
