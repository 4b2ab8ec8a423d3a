//! The linear operator `L_A Y = A^{-1} Y(x + 2 pi alpha) A - Y(x)` on
//! traceless series, and its mode-by-mode inverse for triangular `A`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constant::{ConstantPart, Orientation};
use crate::algebra::{Mat2, MatrixSeries, MultiIndex};
use crate::diophantine::Frequency;
use crate::error::{Error, Result};

/// Smallest denominator the solver divides by.
pub const DENOMINATOR_FLOOR: f64 = 1e-15;

/// Independent entries of a traceless matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// `(1,1)`, with `(2,2) = -(1,1)`.
    Diagonal,
    /// `(1,2)`.
    Upper,
    /// `(2,1)`.
    Lower,
}

impl Component {
    fn swapped(self) -> Component {
        match self {
            Component::Diagonal => Component::Diagonal,
            Component::Upper => Component::Lower,
            Component::Lower => Component::Upper,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Component::Diagonal => "(1,1)",
            Component::Upper => "(1,2)",
            Component::Lower => "(2,1)",
        }
    }

    pub fn read(self, m: &Mat2) -> Complex64 {
        match self {
            Component::Diagonal => m.a,
            Component::Upper => m.b,
            Component::Lower => m.c,
        }
    }

    /// Zero this component, keeping the matrix traceless.
    pub fn clear(self, m: &mut Mat2) {
        let z = Complex64::new(0.0, 0.0);
        match self {
            Component::Diagonal => {
                m.a = z;
                m.d = z;
            }
            Component::Upper => m.b = z,
            Component::Lower => m.c = z,
        }
    }

    /// Traceless matrix with only this component set to `v`.
    pub fn embed(self, v: Complex64) -> Mat2 {
        let z = Complex64::new(0.0, 0.0);
        match self {
            Component::Diagonal => Mat2::traceless(v, z, z),
            Component::Upper => Mat2::traceless(z, v, z),
            Component::Lower => Mat2::traceless(z, z, v),
        }
    }
}

/// A component left out of the equation at one mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub mode: MultiIndex,
    pub component: Component,
}

fn swap_entries(m: &Mat2) -> Mat2 {
    Mat2::new(m.d, m.c, m.b, m.a)
}

/// `(L_A Y)` computed directly from its definition.
pub fn apply_homological_operator(a: &ConstantPart, y: &MatrixSeries, freq: &Frequency) -> MatrixSeries {
    let am = a.matrix();
    let ainv = am.inverse_unimodular();
    y.map(|k, c| {
        let mu = Complex64::from_polar(1.0, freq.pairing_angle(k));
        (ainv * *c * am).scale(mu) - *c
    })
}

fn solve_upper(
    k: &MultiIndex,
    xi: Complex64,
    zeta: Complex64,
    theta: f64,
    f: &Mat2,
    excluded: &[Component],
) -> Result<Mat2> {
    let a = (Complex64::i() * xi).exp();
    let mu = Complex64::from_polar(1.0, theta);
    let solve = |comp: Component, rhs: Complex64, den: Complex64| -> Result<Complex64> {
        if excluded.contains(&comp) || rhs == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if den.norm() < DENOMINATOR_FLOOR {
            return Err(Error::SmallDenominator {
                mode: k.to_string(),
                component: comp.label().to_string(),
                value: den.norm(),
            });
        }
        Ok(rhs / den)
    };
    let y21 = solve(Component::Lower, f.c, mu * a * a - 1.0)?;
    let y11 = solve(Component::Diagonal, f.a + mu * zeta * a * y21, mu - 1.0)?;
    let y12 = solve(
        Component::Upper,
        f.b + mu * zeta * zeta * y21 - mu * zeta * a.inv() * y11 * 2.0,
        mu / (a * a) - 1.0,
    )?;
    Ok(Mat2::traceless(y11, y12, y21))
}

/// Solve `L_A Y = F` mode by mode for triangular `A`, skipping excluded
/// components. `F` must be traceless; the zero mode is not allowed.
pub fn homological_solve(
    a: &ConstantPart,
    f: &MatrixSeries,
    freq: &Frequency,
    exclusions: &[Exclusion],
) -> Result<MatrixSeries> {
    let mut out = MatrixSeries::new(f.scheme.clone(), f.width);
    out.cone = f.cone;
    for (k, c) in f.iter() {
        if k.is_zero() {
            return Err(Error::InvalidInput("homological equation has no solution on the zero mode".into()));
        }
        let theta = freq.pairing_angle(k);
        let excluded: Vec<Component> = exclusions.iter().filter(|e| &e.mode == k).map(|e| e.component).collect();
        let y = match a.orientation {
            Orientation::Upper => solve_upper(k, a.xi, a.zeta, theta, c, &excluded)?,
            Orientation::Lower => {
                let swapped: Vec<Component> = excluded.iter().map(|c| c.swapped()).collect();
                swap_entries(&solve_upper(k, -a.xi, a.zeta, theta, &swap_entries(c), &swapped)?)
            }
        };
        out.add_mode(k.clone(), y)?;
    }
    Ok(out)
}

/// `F` with the excluded components removed.
pub fn without_exclusions(f: &MatrixSeries, exclusions: &[Exclusion]) -> MatrixSeries {
    f.map(|k, c| {
        let mut m = *c;
        for e in exclusions.iter().filter(|e| &e.mode == k) {
            e.component.clear(&mut m);
        }
        m
    })
}
