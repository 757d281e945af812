//! Periodic box discretization of Fourier space.
//!
//! Modes are stored in FFT order along each axis: index `i` carries the
//! integer wavenumber `i` for `i < n/2` and `i - n` otherwise, and the flat
//! index is `(i0 * n + i1) * n + i2`. The physical wavevector of a mode is
//! `(2π/L) k`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "grid size must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Contract(format!(
                "box length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Spacing of the wavevector lattice, `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Number of modes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Integer wavenumber triple of a flat index.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.axis_indices(idx);
        [self.wavenumber(a), self.wavenumber(b), self.wavenumber(c)]
    }

    /// Flat index of an integer wavenumber triple, if representable.
    pub fn index_of_mode(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut out = [0usize; 3];
        for d in 0..3 {
            if k[d] < -n / 2 || k[d] >= n / 2 {
                return None;
            }
            out[d] = k[d].rem_euclid(n) as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let k = self.mode(idx);
        let s = self.fundamental();
        [k[0] as f64 * s, k[1] as f64 * s, k[2] as f64 * s]
    }

    pub fn wavevector_norm_sq(&self, idx: usize) -> f64 {
        let xi = self.wavevector(idx);
        xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    }

    /// Flat index of the mode `-k`. For Nyquist components the negation wraps
    /// back onto the same index along that axis.
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.axis_indices(idx);
        self.index((n - a) % n, (n - b) % n, (n - c) % n)
    }

    /// True when any axis sits on the unpaired wavenumber `-n/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n / 2;
        self.axis_indices(idx).contains(&half)
    }

    /// Largest integer wavenumber kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    pub fn keeps_two_thirds(&self, idx: usize) -> bool {
        let kc = self.dealias_cutoff();
        self.mode(idx).iter().all(|k| k.abs() <= kc)
    }

    /// Largest resolved wavevector magnitude (corner of the box).
    pub fn max_wavevector_norm(&self) -> f64 {
        (3.0f64).sqrt() * (self.n / 2) as f64 * self.fundamental()
    }
}
