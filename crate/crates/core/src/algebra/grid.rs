//! Uniform grids on the torus and FFT transfer between samples and Fourier
//! coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::series::{Coefficient, FourierSeries};
use super::weights::{MultiIndex, WeightScheme};
use crate::error::{Error, Result};

use std::f64::consts::TAU;
use std::sync::Arc;

/// Product grid with `sizes[j]` points on axis `j`, spacing `2 pi / sizes[j]`.
/// Samples are stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub sizes: Vec<usize>,
}

impl TorusGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput(format!("invalid grid sizes {sizes:?}")));
        }
        Ok(TorusGrid { sizes })
    }

    /// Smallest power-of-two grid resolving `|k_j| <= extents[j]`.
    pub fn resolving(extents: &[i64]) -> Self {
        TorusGrid { sizes: extents.iter().map(|&e| (2 * e.max(0) as usize + 1).next_power_of_two().max(4)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest `|k_j|` the grid resolves without aliasing.
    pub fn resolves(&self, k: &MultiIndex) -> bool {
        k.0.iter().zip(&self.sizes).all(|(&kj, &m)| 2 * (kj.unsigned_abs() as usize) < m)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        let mut rem = flat;
        for j in (0..self.dim()).rev() {
            let m = self.sizes[j];
            x[j] = TAU * (rem % m) as f64 / m as f64;
            rem /= m;
        }
        x
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn flat_index(&self, k: &MultiIndex) -> usize {
        let mut idx = 0usize;
        for (j, &kj) in k.0.iter().enumerate() {
            let m = self.sizes[j] as i64;
            idx = idx * self.sizes[j] + kj.rem_euclid(m) as usize;
        }
        idx
    }

    fn mode_of(&self, flat: usize) -> MultiIndex {
        let mut k = vec![0i64; self.dim()];
        let mut rem = flat;
        for j in (0..self.dim()).rev() {
            let m = self.sizes[j];
            let r = rem % m;
            k[j] = if 2 * r < m { r as i64 } else { r as i64 - m as i64 };
            rem /= m;
        }
        MultiIndex(k)
    }

    fn fft_all_axes(&self, data: &mut [Complex64], inverse: bool) {
        let mut planner = FftPlanner::<f64>::new();
        let mut stride = 1usize;
        for j in (0..self.dim()).rev() {
            let m = self.sizes[j];
            let fft: Arc<dyn Fft<f64>> =
                if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
            let block = m * stride;
            let mut line = vec![Complex64::new(0.0, 0.0); m];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + offset + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[base + offset + i * stride] = *v;
                    }
                }
            }
            stride = block;
        }
    }

    /// Samples of `x -> F(x + shift)` at the grid points.
    pub fn synthesize<T: Coefficient>(&self, series: &FourierSeries<T>, shift: Option<&[f64]>) -> Vec<T> {
        let n = self.len();
        let mut chans = vec![vec![Complex64::new(0.0, 0.0); n]; T::CHANNELS];
        for (k, c) in series.iter() {
            let idx = self.flat_index(k);
            let phase = shift.map_or(Complex64::new(1.0, 0.0), |s| Complex64::from_polar(1.0, k.dot(s)));
            for (ch, data) in chans.iter_mut().enumerate() {
                data[idx] += c.channel(ch) * phase;
            }
        }
        for data in chans.iter_mut() {
            self.fft_all_axes(data, true);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); T::CHANNELS];
        (0..n)
            .map(|i| {
                for (ch, data) in chans.iter().enumerate() {
                    buf[ch] = data[i];
                }
                T::from_channels(&buf)
            })
            .collect()
    }

    /// All grid Fourier coefficients, keyed by signed mode.
    pub fn analyze<T: Coefficient>(&self, samples: &[T]) -> Result<BTreeMap<MultiIndex, T>> {
        let n = self.len();
        if samples.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} samples, got {}", samples.len())));
        }
        let mut chans: Vec<Vec<Complex64>> =
            (0..T::CHANNELS).map(|ch| samples.iter().map(|s| s.channel(ch)).collect()).collect();
        let inv_n = 1.0 / n as f64;
        for data in chans.iter_mut() {
            self.fft_all_axes(data, false);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); T::CHANNELS];
        let mut out = BTreeMap::new();
        for i in 0..n {
            for (ch, data) in chans.iter().enumerate() {
                buf[ch] = data[i] * inv_n;
            }
            out.insert(self.mode_of(i), T::from_channels(&buf));
        }
        Ok(out)
    }
}

/// Coefficients on a declared support from grid samples, with the sup-norm
/// residual of the resynthesized series against the samples.
pub fn coefficients_from_grid<T: Coefficient>(
    grid: &TorusGrid,
    samples: &[T],
    support: &[MultiIndex],
    scheme: &WeightScheme,
    width: f64,
) -> Result<(FourierSeries<T>, f64)> {
    if grid.dim() != scheme.dim() {
        return Err(Error::InvalidInput("grid and weight scheme dimensions differ".into()));
    }
    if let Some(k) = support.iter().find(|k| !grid.resolves(k)) {
        return Err(Error::InvalidInput(format!(
            "grid {:?} is too coarse for mode {k}; need at least 2|k_j|+1 points per axis",
            grid.sizes
        )));
    }
    let all = grid.analyze(samples)?;
    let mut series = FourierSeries::new(scheme.clone(), width);
    for k in support {
        if let Some(c) = all.get(k) {
            series.add_mode(k.clone(), *c)?;
        }
    }
    let back = grid.synthesize(&series, None);
    let residual = back
        .iter()
        .zip(samples)
        .map(|(a, b)| (0..T::CHANNELS).map(|ch| (a.channel(ch) - b.channel(ch)).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok((series, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;

    #[test]
    fn recovers_single_exponential() {
        let grid = TorusGrid::new(vec![8]).unwrap();
        let samples: Vec<Complex64> = grid.points().iter().map(|x| Complex64::from_polar(1.0, x[0])).collect();
        let (s, res) =
            coefficients_from_grid(&grid, &samples, &[MultiIndex(vec![1])], &WeightScheme::scalar(), 0.5).unwrap();
        assert!((s.coefficient(&MultiIndex(vec![1])) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn rejects_coarse_grid() {
        let grid = TorusGrid::new(vec![8]).unwrap();
        let samples = vec![Complex64::new(0.0, 0.0); 8];
        assert!(coefficients_from_grid(&grid, &samples, &[MultiIndex(vec![4])], &WeightScheme::scalar(), 0.5)
            .is_err());
    }

    #[test]
    fn synthesis_matches_direct_evaluation_2d() {
        let scheme = WeightScheme::new(1.0, vec![1.0, 1.0]).unwrap();
        let s = FourierSeries::from_modes(
            scheme,
            0.3,
            vec![
                (MultiIndex(vec![1, 2]), Mat2::from_real(0.1, 0.2, -0.3, -0.1)),
                (MultiIndex(vec![-3, 1]), Mat2::from_real(0.0, 0.5, 0.25, 0.0)),
            ],
        )
        .unwrap();
        let grid = TorusGrid::new(vec![8, 16]).unwrap();
        let shift = [0.37, -1.2];
        let samples = grid.synthesize(&s, Some(&shift));
        for (i, v) in samples.iter().enumerate() {
            let mut x = grid.point(i);
            x[0] += shift[0];
            x[1] += shift[1];
            assert!((*v - s.evaluate_real(&x)).max_abs() < 1e-14);
        }
        let back = grid.analyze(&samples).unwrap();
        let k = MultiIndex(vec![-3, 1]);
        let expect = s.coefficient(&k).scale(Complex64::from_polar(1.0, k.dot(&shift)));
        assert!((back[&k] - expect).max_abs() < 1e-15);
    }
}
