use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Mat2;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `[[e^{i xi}, zeta], [0, e^{-i xi}]]`
    Upper,
    /// `[[e^{i xi}, 0], [zeta, e^{-i xi}]]`
    Lower,
}

/// Triangular constant part with eigenvalues `e^{+-i xi}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantPart {
    pub xi: Complex64,
    pub zeta: Complex64,
    pub orientation: Orientation,
}

impl ConstantPart {
    pub fn upper(xi: Complex64, zeta: Complex64) -> Self {
        ConstantPart { xi, zeta, orientation: Orientation::Upper }
    }

    pub fn lower(xi: Complex64, zeta: Complex64) -> Self {
        ConstantPart { xi, zeta, orientation: Orientation::Lower }
    }

    pub fn diagonal(xi: Complex64) -> Self {
        ConstantPart::upper(xi, Complex64::new(0.0, 0.0))
    }

    /// Read `xi` and `zeta` off a triangular unimodular matrix.
    pub fn from_matrix(m: &Mat2, tol: f64) -> Result<Self> {
        let xi = -Complex64::i() * m.a.ln();
        if m.c.norm() <= tol {
            Ok(ConstantPart::upper(xi, m.b))
        } else if m.b.norm() <= tol {
            Ok(ConstantPart::lower(xi, m.c))
        } else {
            Err(Error::InvalidInput(format!("matrix {m:?} is not triangular")))
        }
    }

    pub fn eigenvalue(&self) -> Complex64 {
        (Complex64::i() * self.xi).exp()
    }

    pub fn matrix(&self) -> Mat2 {
        let e = self.eigenvalue();
        let zero = Complex64::new(0.0, 0.0);
        match self.orientation {
            Orientation::Upper => Mat2::new(e, self.zeta, zero, e.inv()),
            Orientation::Lower => Mat2::new(e, zero, self.zeta, e.inv()),
        }
    }

    /// Real part of `xi` reduced to `(-pi/2, pi/2]`.
    pub fn rho_mod_pi(&self) -> f64 {
        let r = self.xi.re - PI * (self.xi.re / PI).round();
        if r <= -PI / 2.0 {
            r + PI
        } else {
            r
        }
    }

    /// `|e^{i xi} - e^{-i xi}| = |2 sin xi|`.
    pub fn eigen_gap(&self) -> f64 {
        let e = self.eigenvalue();
        (e - e.inv()).norm()
    }

    /// Unipotent `P` with `P^{-1} A P` diagonal. Fails when the eigenvalues
    /// coincide and `zeta != 0`.
    pub fn diagonalizer(&self) -> Result<Mat2> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if self.zeta == zero {
            return Ok(Mat2::identity());
        }
        let gap = self.eigen_gap();
        if gap < 1e-8 {
            return Err(Error::ParabolicConstant(gap));
        }
        let e = self.eigenvalue();
        Ok(match self.orientation {
            Orientation::Upper => Mat2::new(one, self.zeta / (e.inv() - e), zero, one),
            Orientation::Lower => Mat2::new(one, zero, self.zeta / (e - e.inv()), one),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizer_diagonalizes() {
        for a in [
            ConstantPart::upper(Complex64::new(0.7, -0.1), Complex64::new(0.3, 0.4)),
            ConstantPart::lower(Complex64::new(1.3, 0.0), Complex64::new(-1.0, 0.2)),
        ] {
            let p = a.diagonalizer().unwrap();
            let d = p.inverse_unimodular() * a.matrix() * p;
            assert!(d.b.norm() < 1e-14 && d.c.norm() < 1e-14);
            assert!((d.a - a.eigenvalue()).norm() < 1e-14);
        }
    }

    #[test]
    fn parabolic_constant_rejected() {
        let a = ConstantPart::upper(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(a.diagonalizer(), Err(Error::ParabolicConstant(_))));
    }

    #[test]
    fn rho_reduction() {
        let a = ConstantPart::diagonal(Complex64::new(PI, 0.0));
        assert!(a.rho_mod_pi().abs() < 1e-15);
        let b = ConstantPart::diagonal(Complex64::new(2.0, 0.0));
        assert!((b.rho_mod_pi() - (2.0 - PI)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_through_matrix() {
        let a = ConstantPart::upper(Complex64::new(0.4, -0.3), Complex64::new(0.1, 0.0));
        let b = ConstantPart::from_matrix(&a.matrix(), 1e-14).unwrap();
        assert!((a.xi - b.xi).norm() < 1e-14 && (a.zeta - b.zeta).norm() < 1e-15);
    }
}
