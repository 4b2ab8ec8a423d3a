//! Growth of the iterates `A_j(x) = S(x + (j-1) w) ... S(x)` of a
//! Schrodinger cocycle, compared with the constant cocycle at the same energy.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Mat2;
use crate::cocycle::{CocycleSpec, OrbitPotential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub j: u64,
    /// `sup_x ||A_j(x)||`.
    pub sup_norm: f64,
    /// `sup_x ||A_j(x) - A_E^j||`, with `A_E` the unperturbed matrix.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub samples: Vec<GrowthSample>,
    /// `sup_norm / j` is non-increasing along the samples.
    pub sublinear_trend: bool,
}

impl GrowthReport {
    /// `deviation / (scale * j)` per sample.
    pub fn deviation_ratios(&self, scale: f64) -> Vec<f64> {
        self.samples.iter().map(|s| s.deviation / (scale * s.j as f64)).collect()
    }
}

/// Measure at every `j` in `checkpoints` (increasing) over `phases` equally
/// spaced starting phases along the first axis.
pub fn growth_bound_check(spec: &CocycleSpec, checkpoints: &[u64], phases: usize) -> GrowthReport {
    let dim = spec.dim();
    let one = Complex64::new(1.0, 0.0);
    let base = Mat2::new(spec.energy, -one, one, Complex64::new(0.0, 0.0));
    let per_phase: Vec<Vec<(f64, f64)>> = (0..phases.max(1))
        .into_par_iter()
        .map(|p| {
            let mut start = vec![0.0; dim];
            start[0] = p as f64 / phases.max(1) as f64;
            let orbit = OrbitPotential::new(spec, &start);
            let mut m = Mat2::identity();
            let mut free = Mat2::identity();
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut j = 0u64;
            for &target in checkpoints {
                while j < target {
                    m = orbit.matrix(j as i64) * m;
                    free = base * free;
                    j += 1;
                }
                out.push((m.op_norm(), (m - free).op_norm()));
            }
            out
        })
        .collect();
    let samples: Vec<GrowthSample> = checkpoints
        .iter()
        .enumerate()
        .map(|(i, &j)| GrowthSample {
            j,
            sup_norm: per_phase.iter().map(|v| v[i].0).fold(0.0, f64::max),
            deviation: per_phase.iter().map(|v| v[i].1).fold(0.0, f64::max),
        })
        .collect();
    let sublinear_trend =
        samples.windows(2).all(|w| w[1].sup_norm / w[1].j as f64 <= w[0].sup_norm / w[0].j as f64 * (1.0 + 1e-9));
    GrowthReport { samples, sublinear_trend }
}

/// `j_min, 2 j_min, 4 j_min, ...` up to and including `j_max`.
pub fn dyadic_checkpoints(j_min: u64, j_max: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut j = j_min.max(1);
    while j < j_max {
        v.push(j);
        j *= 2;
    }
    v.push(j_max);
    v
}
