//! Sparse Fourier series on the torus, with scalar or traceless 2x2
//! coefficients, and the weighted analytic norm
//! `||F||_h = sum_k |F_k| exp(h |k|_eta)`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::mat2::Mat2;
use super::weights::{ConeSpec, MultiIndex, WeightScheme};
use crate::error::{Error, Result};

/// Ring elements a Fourier coefficient can take.
pub trait Coefficient:
    Copy + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    /// Modulus for scalars, operator norm for matrices.
    fn magnitude(&self) -> f64;
    fn scale(&self, s: Complex64) -> Self;
    /// Ring product (matrix product for `Mat2`).
    fn product(&self, other: &Self) -> Self;
    /// Number of complex entries.
    const CHANNELS: usize;
    fn channel(&self, i: usize) -> Complex64;
    fn from_channels(v: &[Complex64]) -> Self;
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn scale(&self, s: Complex64) -> Self {
        self * s
    }
    fn product(&self, other: &Self) -> Self {
        self * other
    }
    const CHANNELS: usize = 1;
    fn channel(&self, _i: usize) -> Complex64 {
        *self
    }
    fn from_channels(v: &[Complex64]) -> Self {
        v[0]
    }
}

impl Coefficient for Mat2 {
    fn zero() -> Self {
        Mat2::zero()
    }
    fn magnitude(&self) -> f64 {
        self.op_norm()
    }
    fn scale(&self, s: Complex64) -> Self {
        Mat2::scale(self, s)
    }
    fn product(&self, other: &Self) -> Self {
        *self * *other
    }
    const CHANNELS: usize = 4;
    fn channel(&self, i: usize) -> Complex64 {
        self.entry(i / 2, i % 2)
    }
    fn from_channels(v: &[Complex64]) -> Self {
        Mat2::new(v[0], v[1], v[2], v[3])
    }
}

/// Truncation ceiling applied to products when none is given.
pub const DEFAULT_K_MAX: f64 = 64.0;

/// `sum_k c_k exp(i <k, x>)` with finitely many non-zero `c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries<T: Coefficient> {
    pub scheme: WeightScheme,
    /// Analytic strip width `h`.
    pub width: f64,
    /// Aperture of the cone the support is declared to lie in, if any.
    pub cone: Option<f64>,
    coeffs: BTreeMap<MultiIndex, T>,
}

/// Result of a truncated product.
#[derive(Clone, Debug)]
pub struct Product<T: Coefficient> {
    pub series: FourierSeries<T>,
    /// `sum |c_k|` over product modes beyond the ceiling.
    pub dropped_mass: f64,
}

pub type ScalarSeries = FourierSeries<Complex64>;
pub type MatrixSeries = FourierSeries<Mat2>;

impl<T: Coefficient> FourierSeries<T> {
    pub fn new(scheme: WeightScheme, width: f64) -> Self {
        FourierSeries { scheme, width, cone: None, coeffs: BTreeMap::new() }
    }

    /// Build from `(k, c)` pairs; repeated modes are summed.
    pub fn from_modes<I>(scheme: WeightScheme, width: f64, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut s = FourierSeries::new(scheme, width);
        for (k, c) in modes {
            s.add_mode(k, c)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.scheme.dim()
    }

    /// Attach a cone tag after checking every mode lies in the cone.
    pub fn with_cone(mut self, aperture: f64) -> Result<Self> {
        let cone = ConeSpec::new(aperture, self.scheme.clone())?;
        if let Some(k) = self.coeffs.keys().find(|k| !cone.contains(k)) {
            return Err(Error::InvalidInput(format!("mode {k} lies outside the cone r={aperture}")));
        }
        self.cone = Some(aperture);
        Ok(self)
    }

    pub fn add_mode(&mut self, k: MultiIndex, c: T) -> Result<()> {
        self.scheme.check_dim(&k)?;
        let entry = self.coeffs.entry(k).or_insert_with(T::zero);
        *entry = *entry + c;
        Ok(())
    }

    /// Overwrite a coefficient, removing the mode if `c` is `None`.
    pub fn set_mode(&mut self, k: MultiIndex, c: Option<T>) {
        match c {
            Some(c) => {
                self.coeffs.insert(k, c);
            }
            None => {
                self.coeffs.remove(&k);
            }
        }
    }

    pub fn get(&self, k: &MultiIndex) -> Option<&T> {
        self.coeffs.get(k)
    }

    pub fn coefficient(&self, k: &MultiIndex) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Weighted norm at the series' own width.
    pub fn norm(&self) -> f64 {
        self.norm_at(self.width)
    }

    pub fn norm_at(&self, h: f64) -> f64 {
        self.coeffs.iter().map(|(k, c)| c.magnitude() * (h * self.scheme.norm(k)).exp()).sum::<f64>() + 0.0
    }

    /// Largest `|k_j|` per axis over the support.
    pub fn axis_extents(&self) -> Vec<i64> {
        let mut ext = vec![0; self.dim()];
        for k in self.coeffs.keys() {
            for (e, kj) in ext.iter_mut().zip(&k.0) {
                *e = (*e).max(kj.abs());
            }
        }
        ext
    }

    /// Largest `|k|_eta` over the support.
    pub fn max_weighted_index(&self) -> f64 {
        self.coeffs.keys().map(|k| self.scheme.norm(k)).fold(0.0, f64::max)
    }

    fn empty_like(&self) -> Self {
        FourierSeries { scheme: self.scheme.clone(), width: self.width, cone: self.cone, coeffs: BTreeMap::new() }
    }

    /// Keep modes satisfying a predicate.
    pub fn filter<P: Fn(&MultiIndex, &T) -> bool>(&self, keep: P) -> Self {
        let mut out = self.empty_like();
        out.coeffs = self.coeffs.iter().filter(|(k, c)| keep(k, c)).map(|(k, c)| (k.clone(), *c)).collect();
        out
    }

    /// Modes with `|k|_eta <= n`.
    pub fn truncate_low(&self, n: f64) -> Self {
        self.filter(|k, _| self.scheme.norm(k) <= n + 1e-9)
    }

    /// Modes with `|k|_eta > n`.
    pub fn truncate_high(&self, n: f64) -> Self {
        self.filter(|k, _| self.scheme.norm(k) > n + 1e-9)
    }

    /// Drop coefficients of magnitude at most `floor`.
    pub fn prune(&self, floor: f64) -> Self {
        self.filter(|_, c| c.magnitude() > floor)
    }

    pub fn map<F: Fn(&MultiIndex, &T) -> T>(&self, f: F) -> Self {
        let mut out = self.empty_like();
        out.coeffs = self.coeffs.iter().map(|(k, c)| (k.clone(), f(k, c))).collect();
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, c| c.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert_with(T::zero);
            *e = *e + *c;
        }
        out.cone = match (self.cone, other.cone) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Series of `x -> F(x + theta)`.
    pub fn shifted(&self, theta: &[f64]) -> Self {
        self.map(|k, c| c.scale(Complex64::from_polar(1.0, k.dot(theta))))
    }

    /// Truncated Cauchy product. Product modes with `|k|_eta > k_max` are
    /// dropped and their mass reported.
    pub fn multiply(&self, other: &Self, k_max: f64) -> Result<Product<T>> {
        if self.scheme != other.scheme {
            return Err(Error::InvalidInput("series use different weight schemes".into()));
        }
        let mut out = self.empty_like();
        out.width = self.width.min(other.width);
        out.cone = match (self.cone, other.cone) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        let mut dropped: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                let m = k.add(l);
                let target = if self.scheme.norm(&m) <= k_max + 1e-9 { &mut out.coeffs } else { &mut dropped };
                let e = target.entry(m).or_insert_with(T::zero);
                *e = *e + a.product(b);
            }
        }
        let dropped_mass = dropped.values().map(|c| c.magnitude()).sum();
        Ok(Product { series: out, dropped_mass })
    }

    /// Value at a complex point, checking `|Im x_j| < h <j>^eta`.
    pub fn evaluate(&self, x: &[Complex64]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!("point has dimension {}, expected {}", x.len(), self.dim())));
        }
        for (j, xj) in x.iter().enumerate() {
            let bound = self.width * self.scheme.axis_weight(j);
            if !(xj.im.abs() < bound) {
                return Err(Error::Domain(format!(
                    "|Im x_{j}| = {} is outside the analytic strip (width {bound})",
                    xj.im.abs()
                )));
            }
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub fn evaluate_unchecked(&self, x: &[Complex64]) -> T {
        let mut acc = T::zero();
        for (k, c) in &self.coeffs {
            let mut phase = Complex64::new(0.0, 0.0);
            for (kj, xj) in k.0.iter().zip(x) {
                phase += xj * (*kj as f64);
            }
            acc = acc + c.scale((Complex64::i() * phase).exp());
        }
        acc
    }

    pub fn evaluate_real(&self, x: &[f64]) -> T {
        let mut acc = T::zero();
        for (k, c) in &self.coeffs {
            acc = acc + c.scale(Complex64::from_polar(1.0, k.dot(x)));
        }
        acc
    }

    /// Largest coefficient magnitude outside a cone, including the zero mode.
    pub fn off_cone_max(&self, cone: &ConeSpec) -> f64 {
        self.coeffs
            .iter()
            .filter(|(k, _)| !cone.contains(k))
            .map(|(_, c)| c.magnitude())
            .fold(0.0, f64::max)
    }
}

impl MatrixSeries {
    /// `F -> M^{-1} F M` for a constant unimodular `M`.
    pub fn conjugate_by(&self, m: &Mat2) -> Self {
        let inv = m.inverse_unimodular();
        self.map(|_, c| inv * *c * *m)
    }

    /// Entry `(row, col)` as a scalar series.
    pub fn component(&self, row: usize, col: usize) -> ScalarSeries {
        let mut out = ScalarSeries::new(self.scheme.clone(), self.width);
        out.cone = self.cone;
        for (k, c) in self.iter() {
            out.coeffs.insert(k.clone(), c.entry(row, col));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(modes: &[(i64, Complex64)]) -> ScalarSeries {
        ScalarSeries::from_modes(WeightScheme::scalar(), 0.5, modes.iter().map(|(k, v)| (MultiIndex(vec![*k]), *v)))
            .unwrap()
    }

    #[test]
    fn norm_of_single_mode() {
        let s = scalar(&[(1, c(1.0, 0.0))]);
        assert!((s.norm_at(0.5) - 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn product_adds_indices() {
        let s = scalar(&[(1, c(1.0, 0.0))]);
        let p = s.multiply(&s, 64.0).unwrap();
        assert_eq!(p.series.len(), 1);
        assert_eq!(p.series.coefficient(&MultiIndex(vec![2])), c(1.0, 0.0));
        assert_eq!(p.dropped_mass, 0.0);
    }

    #[test]
    fn product_reports_dropped_mass() {
        let s = scalar(&[(40, c(2.0, 0.0))]);
        let p = s.multiply(&s, 64.0).unwrap();
        assert!(p.series.is_empty());
        assert_eq!(p.dropped_mass, 4.0);
    }

    #[test]
    fn evaluate_checks_strip() {
        let s = scalar(&[(1, c(1.0, 0.0))]);
        assert!(s.evaluate(&[c(0.0, 0.6)]).is_err());
        let v = s.evaluate(&[c(0.3, 0.2)]).unwrap();
        assert!((v - (c(0.0, 1.0) * c(0.3, 0.2)).exp()).norm() < 1e-15);
    }

    #[test]
    fn truncations_partition_support() {
        let s = scalar(&[(1, c(1.0, 0.0)), (3, c(0.5, 0.0)), (7, c(0.1, 0.0))]);
        let lo = s.truncate_low(3.0);
        let hi = s.truncate_high(3.0);
        assert_eq!(lo.len() + hi.len(), s.len());
        assert!((lo.norm() + hi.norm() - s.norm()).abs() < 1e-14);
    }

    #[test]
    fn cone_tag_rejects_negative_mode() {
        assert!(scalar(&[(-1, c(1.0, 0.0))]).with_cone(0.5).is_err());
        assert!(scalar(&[(2, c(1.0, 0.0))]).with_cone(0.5).is_ok());
    }
}
