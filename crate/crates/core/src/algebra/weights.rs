//! Multi-indices, the weighted norm `|k|_eta = sum <j>^eta |k_j|` and the
//! cones `{k != 0 : sum <j>^eta w_j k_j >= r |k|_eta}`.
//!
//! Coordinates are indexed from zero, with `<j> = max(1, j)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer frequency vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }

    /// `<k, x>` for a real vector.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Exponent `eta` with one positive weight `w_j` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub eta: f64,
    pub weights: Vec<f64>,
}

impl WeightScheme {
    pub fn new(eta: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidInput(format!("eta must be >= 0, got {eta}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput(format!("weights must be positive, got {w}")));
        }
        Ok(WeightScheme { eta, weights })
    }

    /// One-dimensional scheme with unit weight.
    pub fn scalar() -> Self {
        WeightScheme { eta: 1.0, weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `<j>^eta`.
    pub fn axis_weight(&self, j: usize) -> f64 {
        (j.max(1) as f64).powf(self.eta)
    }

    pub fn check_dim(&self, k: &MultiIndex) -> Result<()> {
        if k.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "multi-index {k} has dimension {}, expected {}",
                k.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `|k|_eta`.
    pub fn norm(&self, k: &MultiIndex) -> f64 {
        k.0.iter().enumerate().map(|(j, &kj)| self.axis_weight(j) * kj.abs() as f64).sum()
    }

    /// Cone value `sum <j>^eta k_j w_j`.
    pub fn cone_value(&self, k: &MultiIndex) -> f64 {
        k.0.iter()
            .enumerate()
            .map(|(j, &kj)| self.axis_weight(j) * kj as f64 * self.weights[j])
            .sum()
    }

    /// Largest `|k_j|` allowed on axis `j` inside the ball `|k|_eta <= radius`.
    pub fn axis_extent(&self, j: usize, radius: f64) -> i64 {
        (radius / self.axis_weight(j) + 1e-9).floor() as i64
    }

    /// All multi-indices with `|k|_eta <= radius`, in lexicographic order.
    pub fn ball(&self, radius: f64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; self.dim()];
        self.ball_rec(0, radius + 1e-9, &mut cur, &mut out);
        out
    }

    fn ball_rec(&self, axis: usize, budget: f64, cur: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
        if axis == self.dim() {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        let w = self.axis_weight(axis);
        let m = (budget / w).floor() as i64;
        for k in -m..=m {
            cur[axis] = k;
            self.ball_rec(axis + 1, budget - w * k.abs() as f64, cur, out);
        }
        cur[axis] = 0;
    }
}

/// Cone `Gamma_r` of aperture `r` for a weight scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub aperture: f64,
    pub scheme: WeightScheme,
}

impl ConeSpec {
    /// `0 < r <= min_j w_j` guarantees the cone is non-empty.
    pub fn new(aperture: f64, scheme: WeightScheme) -> Result<Self> {
        let wmin = scheme.weights.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(aperture > 0.0) || aperture > wmin + 1e-15 {
            return Err(Error::InvalidInput(format!(
                "cone aperture must lie in (0, {wmin}], got {aperture}"
            )));
        }
        Ok(ConeSpec { aperture, scheme })
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        !k.is_zero()
            && self.scheme.cone_value(k) >= self.aperture * self.scheme.norm(k) - 1e-12
    }

    /// Cone members with `|k|_eta <= radius`, ordered by `|k|_eta` and then
    /// lexicographically.
    pub fn members_up_to(&self, radius: f64) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> =
            self.scheme.ball(radius).into_iter().filter(|k| self.contains(k)).collect();
        v.sort_by(|a, b| {
            self.scheme.norm(a).partial_cmp(&self.scheme.norm(b)).unwrap().then_with(|| a.cmp(b))
        });
        v
    }

    pub fn with_aperture(&self, aperture: f64) -> Result<ConeSpec> {
        ConeSpec::new(aperture, self.scheme.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_uses_bracket_weights() {
        let s = WeightScheme::new(2.0, vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.norm(&MultiIndex(vec![1, -2, 3])), 1.0 + 2.0 + 3.0 * 4.0);
    }

    #[test]
    fn one_dimensional_cone_is_positive_integers() {
        let cone = ConeSpec::new(0.5, WeightScheme::scalar()).unwrap();
        for k in -20..=20 {
            assert_eq!(cone.contains(&MultiIndex(vec![k])), k > 0);
        }
    }

    #[test]
    fn two_dimensional_cone_membership() {
        let cone = ConeSpec::new(0.5, WeightScheme::new(1.0, vec![1.0, 1.0]).unwrap()).unwrap();
        assert!(cone.contains(&MultiIndex(vec![1, 0])));
        assert!(!cone.contains(&MultiIndex(vec![1, -1])));
        assert!(!cone.contains(&MultiIndex(vec![0, 0])));
    }

    #[test]
    fn ball_size_matches_count() {
        let s = WeightScheme::new(1.0, vec![1.0, 1.0]).unwrap();
        // |k0| + |k1| <= 3 has 2*3^2 + 2*3 + 1 = 25 points.
        assert_eq!(s.ball(3.0).len(), 25);
    }

    #[test]
    fn aperture_bounds_checked() {
        let s = WeightScheme::new(1.0, vec![0.4, 1.0]).unwrap();
        assert!(ConeSpec::new(0.5, s.clone()).is_err());
        assert!(ConeSpec::new(0.0, s.clone()).is_err());
        assert!(ConeSpec::new(0.4, s).is_ok());
    }
}
