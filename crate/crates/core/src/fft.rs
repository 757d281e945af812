//! Three-dimensional complex FFT on the periodic grid.
//!
//! Normalization: the forward transform carries `1/n³`, so spectral
//! coefficients are Fourier-series coefficients and the inverse transform is
//! a plain synthesis sum. Every line transform is independent, so results do
//! not depend on how rayon schedules them.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub struct Fft3 {
    grid: Grid,
    neg: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft3 {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        Self {
            grid,
            neg: (0..grid.len()).map(|idx| grid.neg_index(idx)).collect(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::Contract(format!(
                "array of length {len} does not match grid with {} modes",
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Physical samples to spectral coefficients (scaled by `1/n³`).
    pub fn forward(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform(data, Direction::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    /// Spectral coefficients to physical samples.
    pub fn inverse(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform(data, Direction::Inverse);
        Ok(())
    }

    /// Transform a real physical array and enforce conjugate symmetry of the
    /// result.
    pub fn forward_real(&self, data: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(data.len())?;
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf)?;
        Ok(symmetrize(&self.grid, &buf))
    }

    /// Synthesize a real physical array from conjugate-symmetric coefficients.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let mut buf = coeffs.to_vec();
        self.inverse(&mut buf)?;
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Synthesize two real arrays with one complex transform:
    /// `IFFT(A + iB) = a + ib` for conjugate-symmetric `A`, `B`.
    pub fn inverse_real_pair(&self, a: &[Complex64], b: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
        self.inverse(&mut buf)?;
        Ok(buf.into_iter().map(|c| (c.re, c.im)).unzip())
    }

    /// Transform two real arrays with one complex transform, splitting
    /// `F = FFT(p + iq)` into `P(k) = (F(k) + conj F(−k))/2` and
    /// `Q(k) = (F(k) − conj F(−k))/2i`. Both results are exactly
    /// conjugate-symmetric.
    pub fn forward_real_pair(&self, p: &[f64], q: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.check_len(p.len())?;
        self.check_len(q.len())?;
        let mut buf: Vec<Complex64> = p.iter().zip(q).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.forward(&mut buf)?;
        Ok((0..buf.len())
            .map(|idx| {
                let f = buf[idx];
                let g = buf[self.neg[idx]].conj();
                let s = (f + g) * 0.5;
                let d = (f - g) * 0.5;
                (s, Complex64::new(d.im, -d.re))
            })
            .unzip())
    }

    fn transform(&self, data: &mut [Complex64], dir: Direction) {
        let plan = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let n = self.grid.n();
        let scratch_len = plan.get_inplace_scratch_len();
        let run_lines = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(n).for_each_init(
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, line| plan.process_with_scratch(line, scratch),
            );
        };

        // contiguous axis
        run_lines(data);

        // middle and slow axes: gather lines, transform, scatter back
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        for axis in [1usize, 0] {
            let src: &[Complex64] = data;
            tmp.par_chunks_mut(n).enumerate().for_each(|(line, out)| {
                let (p, q) = (line / n, line % n);
                for (m, o) in out.iter_mut().enumerate() {
                    let idx = if axis == 1 {
                        (p * n + m) * n + q
                    } else {
                        (m * n + p) * n + q
                    };
                    *o = src[idx];
                }
            });
            run_lines(&mut tmp);
            let lines: &[Complex64] = &tmp;
            data.par_chunks_mut(n * n).enumerate().for_each(|(i0, plane)| {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let (p, q, m) = if axis == 1 { (i0, i2, i1) } else { (i1, i2, i0) };
                        plane[i1 * n + i2] = lines[(p * n + q) * n + m];
                    }
                }
            });
        }
    }
}

/// Project coefficients onto the conjugate-symmetric subspace,
/// `c(k) <- (c(k) + conj c(-k)) / 2`.
pub fn symmetrize(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..coeffs.len())
        .into_par_iter()
        .map(|idx| {
            let j = grid.neg_index(idx);
            (coeffs[idx] + coeffs[j].conj()) * 0.5
        })
        .collect()
}

/// Largest `|c(k) - conj c(-k)|` over all modes.
pub fn conjugate_asymmetry(grid: &Grid, coeffs: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for idx in 0..coeffs.len() {
        let j = grid.neg_index(idx);
        worst = worst.max((coeffs[idx] - coeffs[j].conj()).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_synthesis() {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let fft = Fft3::new(grid);
        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
        let k = grid.index_of_mode([1, 0, 0]).unwrap();
        let mk = grid.index_of_mode([-1, 0, 0]).unwrap();
        c[k] = Complex64::new(0.5, 0.0);
        c[mk] = Complex64::new(0.5, 0.0);
        let f = fft.inverse_real(&c).unwrap();
        // cos(x) sampled at x = 2π i0 / n
        for i0 in 0..8 {
            let x = 2.0 * PI * i0 as f64 / 8.0;
            assert!((f[grid.index(i0, 3, 5)] - x.cos()).abs() < 1e-14);
        }
        let back = fft.forward_real(&f).unwrap();
        for idx in 0..grid.len() {
            assert!((back[idx] - c[idx]).norm() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let grid = Grid::new(8, 1.0).unwrap();
        let fft = Fft3::new(grid);
        let mut c = vec![Complex64::new(0.0, 0.0); 10];
        assert!(fft.forward(&mut c).is_err());
    }
}
