//! Complex 2x2 matrices, with closed-form exponential and logarithm on the
//! traceless part.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major complex 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::zero()
    }
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        Mat2::new(p, ZERO, ZERO, q)
    }

    /// Traceless matrix `[[h, e], [f, -h]]`.
    pub fn traceless(h: Complex64, e: Complex64, f: Complex64) -> Self {
        Mat2::new(h, e, f, -h)
    }

    /// Entry by zero-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match (row, col) {
            (0, 0) => self.a,
            (0, 1) => self.b,
            (1, 0) => self.c,
            (1, 1) => self.d,
            _ => panic!("Mat2 index ({row}, {col}) out of range"),
        }
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        match (row, col) {
            (0, 0) => &mut self.a,
            (0, 1) => &mut self.b,
            (1, 0) => &mut self.c,
            (1, 1) => &mut self.d,
            _ => panic!("Mat2 index ({row}, {col}) out of range"),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Inverse via the adjugate. Fails on a (numerically) singular matrix.
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.norm() < 1e-300 {
            return Err(Error::Numerical("singular 2x2 matrix".into()));
        }
        Ok(self.adjugate().scale(det.inv()))
    }

    /// Inverse of a matrix known to be unimodular.
    pub fn inverse_unimodular(&self) -> Mat2 {
        self.adjugate()
    }

    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn conj_transpose(&self) -> Mat2 {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_real(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        let f2 = self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr();
        let det = self.det().norm();
        let disc = (f2 * f2 - 4.0 * det * det).max(0.0);
        ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Traceless part `M - (tr M / 2) I`.
    pub fn traceless_part(&self) -> Mat2 {
        let h = self.trace() * 0.5;
        Mat2::new(self.a - h, self.b, self.c, self.d - h)
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        self.scale(s)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl SubAssign for Mat2 {
    fn sub_assign(&mut self, o: Mat2) {
        *self = *self - o;
    }
}

impl MulAssign for Mat2 {
    fn mul_assign(&mut self, o: Mat2) {
        *self = *self * o;
    }
}

/// `sinh(mu)/mu` as a function of `mu^2`.
fn sinhc_of_square(mu2: Complex64) -> Complex64 {
    if mu2.norm() < 1e-6 {
        ONE + mu2 / 6.0 + mu2 * mu2 / 120.0
    } else {
        let mu = mu2.sqrt();
        mu.sinh() / mu
    }
}

/// Exponential of a traceless matrix: `cosh(mu) I + sinh(mu)/mu F` with
/// `mu^2 = -det F`.
pub fn mat_exp_traceless(f: &Mat2) -> Mat2 {
    let f = f.traceless_part();
    let mu2 = -f.det();
    let cosh = if mu2.norm() < 1e-6 {
        ONE + mu2 / 2.0 + mu2 * mu2 / 24.0
    } else {
        mu2.sqrt().cosh()
    };
    Mat2::identity().scale(cosh) + f.scale(sinhc_of_square(mu2))
}

/// `asinh(w)/(w sqrt(1+w^2))` as a function of `q = w^2`.
fn log_factor(q: Complex64) -> Complex64 {
    if q.norm() < 1e-4 {
        log_factor_series(q)
    } else {
        log_factor_direct(q)
    }
}

fn log_factor_series(q: Complex64) -> Complex64 {
    let asinh_ratio = ONE - q / 6.0 + q * q * (3.0 / 40.0) - q * q * q * (5.0 / 112.0);
    let inv_sqrt = ONE - q / 2.0 + q * q * (3.0 / 8.0) - q * q * q * (5.0 / 16.0);
    asinh_ratio * inv_sqrt
}

fn log_factor_direct(q: Complex64) -> Complex64 {
    let w = q.sqrt();
    w.asinh() / (w * (ONE + q).sqrt())
}

/// Principal logarithm of a unimodular matrix with `||M - I|| < 1/2`.
///
/// With `tr M = 2 cosh(mu)` the result is `(mu / sinh mu)(M - (tr M/2) I)`.
/// The factor is evaluated through `sinh(mu/2)^2 = (tr M/2 - 1)/2`, which
/// keeps full precision close to the identity.
pub fn mat_log_near_identity(m: &Mat2) -> Result<Mat2> {
    let dist = (*m - Mat2::identity()).op_norm();
    if !(dist < 0.5) {
        return Err(Error::Domain(format!(
            "matrix logarithm needs ||M - I|| < 0.5, got {dist:.3e}"
        )));
    }
    let half_trace = m.trace() * 0.5;
    let q = (half_trace - ONE) * 0.5;
    Ok(m.traceless_part().scale(log_factor(q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_nilpotent_is_unipotent() {
        let e = mat_exp_traceless(&Mat2::traceless(ZERO, c(0.7, -0.2), ZERO));
        assert!((e - Mat2::new(ONE, c(0.7, -0.2), ZERO, ONE)).max_abs() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let e = mat_exp_traceless(&Mat2::diag(c(0.3, 0.4), c(-0.3, -0.4)));
        let z = c(0.3, 0.4).exp();
        assert!((e - Mat2::diag(z, z.inv())).max_abs() < 1e-15);
    }

    #[test]
    fn exp_matches_series_oracle() {
        let f = Mat2::traceless(c(0.2, -0.1), c(0.5, 0.3), c(-0.4, 0.25));
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for n in 1..40 {
            term = (term * f).scale_real(1.0 / n as f64);
            sum += term;
        }
        assert!((mat_exp_traceless(&f) - sum).max_abs() < 1e-14);
    }

    #[test]
    fn log_factor_branches_agree() {
        for &q in &[c(1e-4, 0.0), c(0.0, 1.1e-4), c(-0.7e-4, 0.7e-4), c(0.02, 0.01)] {
            let tol = 1e-13 + q.norm().powi(4);
            assert!((log_factor_direct(q) - log_factor_series(q)).norm() < tol);
        }
    }

    #[test]
    fn log_rejects_far_matrix() {
        assert!(mat_log_near_identity(&Mat2::diag(c(2.0, 0.0), c(0.5, 0.0))).is_err());
    }

    #[test]
    fn log_of_tiny_perturbation_keeps_precision() {
        let f = Mat2::traceless(c(1e-9, 0.0), c(3e-10, 1e-10), c(-2e-10, 0.0));
        let back = mat_log_near_identity(&mat_exp_traceless(&f)).unwrap();
        assert!((back - f).max_abs() < 5e-16);
    }

    #[test]
    fn op_norm_of_rank_one() {
        let m = Mat2::from_real(1.0, 2.0, 2.0, 4.0);
        assert!((m.op_norm() - 5.0).abs() < 1e-14);
        assert!((Mat2::identity().op_norm() - 1.0).abs() < 1e-15);
    }
}
