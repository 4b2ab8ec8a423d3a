//! Conjugacies built from constant matrices, exponentials of series and
//! half-angle rotations. Rotations are only defined on the doubled torus.

use num_complex::Complex64;

use crate::algebra::{mat_exp_traceless, Mat2, MatrixSeries, MultiIndex};

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Constant(Mat2),
    /// `x -> exp(Y(x))`.
    Exp(MatrixSeries),
    /// `x -> diag(e^{i <k,x>/2}, e^{-i <k,x>/2})`.
    Rotation(MultiIndex),
}

impl Factor {
    pub fn evaluate(&self, x: &[f64]) -> Mat2 {
        match self {
            Factor::Constant(m) => *m,
            Factor::Exp(y) => mat_exp_traceless(&y.evaluate_real(x)),
            Factor::Rotation(k) => {
                let q = Complex64::from_polar(1.0, k.dot(x) / 2.0);
                Mat2::diag(q, q.inv())
            }
        }
    }
}

/// Ordered product `B(x) = F_1(x) F_2(x) ... F_m(x)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Conjugation {
    pub factors: Vec<Factor>,
}

impl Conjugation {
    pub fn identity() -> Self {
        Conjugation { factors: Vec::new() }
    }

    pub fn push(&mut self, f: Factor) {
        self.factors.push(f);
    }

    /// `self` followed by `other`: `B(x) = B_self(x) B_other(x)`.
    pub fn then(&mut self, other: Conjugation) {
        self.factors.extend(other.factors);
    }

    pub fn evaluate(&self, x: &[f64]) -> Mat2 {
        self.factors.iter().fold(Mat2::identity(), |acc, f| acc * f.evaluate(x))
    }

    /// Half-integer modes present.
    pub fn rotations(&self) -> Vec<MultiIndex> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Rotation(k) => Some(k.clone()),
                _ => None,
            })
            .collect()
    }

    /// Samples on a grid of the doubled torus `(R / 4 pi Z)^d`.
    pub fn sample_doubled(&self, per_axis: usize, dim: usize) -> Vec<(Vec<f64>, Mat2)> {
        doubled_grid(per_axis, dim).into_iter().map(|x| { let b = self.evaluate(&x); (x, b) }).collect()
    }
}

/// Uniform grid with `per_axis` points on each axis of `[0, 4 pi)^d`.
pub fn doubled_grid(per_axis: usize, dim: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            let mut x = vec![0.0; dim];
            for j in (0..dim).rev() {
                x[j] = 2.0 * std::f64::consts::TAU * (i % per_axis) as f64 / per_axis as f64;
                i /= per_axis;
            }
            x
        })
        .collect()
}

/// `max_x || B(x+w)^{-1} A e^{F(x)} B(x) - A' e^{F'(x)} ||` over a grid of
/// the doubled torus, with `w = 2 pi alpha` taken literally.
pub fn conjugation_residual(
    b: &Conjugation,
    omega: &[f64],
    before: (&Mat2, &MatrixSeries),
    after: (&Mat2, &MatrixSeries),
    per_axis: usize,
) -> f64 {
    let dim = omega.len();
    doubled_grid(per_axis, dim)
        .iter()
        .map(|x| {
            let shifted: Vec<f64> = x.iter().zip(omega).map(|(a, w)| a + w).collect();
            let bx = b.evaluate(x);
            let bs = b.evaluate(&shifted);
            let inv = bs.inverse_unimodular();
            let lhs = inv * *before.0 * mat_exp_traceless(&before.1.evaluate_real(x)) * bx;
            let rhs = *after.0 * mat_exp_traceless(&after.1.evaluate_real(x));
            (lhs - rhs).max_abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightScheme;

    #[test]
    fn rotation_is_antiperiodic_on_the_torus() {
        let f = Factor::Rotation(MultiIndex(vec![1]));
        let a = f.evaluate(&[0.3]);
        let b = f.evaluate(&[0.3 + std::f64::consts::TAU]);
        assert!((a + b).max_abs() < 1e-15);
    }

    #[test]
    fn identity_conjugation_has_zero_residual() {
        let a = Mat2::from_real(1.0, 0.5, 0.0, 1.0);
        let f = MatrixSeries::new(WeightScheme::scalar(), 0.5);
        let r = conjugation_residual(&Conjugation::identity(), &[1.0], (&a, &f), (&a, &f), 16);
        assert_eq!(r, 0.0);
    }
}
