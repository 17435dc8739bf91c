//! Periodic uniform grids on the 2- or 3-torus of period `2*pi`.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform periodic grid with `n` points per dimension and integer
/// wavenumbers `k_j` in `[-n/2, n/2)`.
///
/// A `dim == 2` grid carries two-and-a-half dimensional fields: vector
/// fields keep all three components but nothing depends on `x_3`, which is
/// realised here by a third storage axis of length one (so `k_3 = 0`
/// identically and every `x_3`-derivative vanishes by construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Arc::new(Grid { dim, n }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Storage shape `[n1, n2, n3]`; `n3 = 1` in the 2-D case.
    pub fn shape(&self) -> [usize; 3] {
        [self.n, self.n, if self.dim == 3 { self.n } else { 1 }]
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Torus volume `(2*pi)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Grid spacing `2*pi / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Physical coordinates of the lattice point with flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [i1, i2, i3] = self.unravel(idx);
        let h = self.spacing();
        [i1 as f64 * h, i2 as f64 * h, i3 as f64 * h]
    }

    #[inline]
    pub(crate) fn unravel(&self, idx: usize) -> [usize; 3] {
        let [_, n2, n3] = self.shape();
        [idx / (n2 * n3), (idx / n3) % n2, idx % n3]
    }

    /// Integer wavenumber vector of the mode stored at flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let shape = self.shape();
        let [i1, i2, i3] = self.unravel(idx);
        [
            super::fft::wavenumber(i1, shape[0]),
            super::fft::wavenumber(i2, shape[1]),
            super::fft::wavenumber(i3, shape[2]),
        ]
    }

    /// `|k|^2` of the mode stored at flat index `idx`.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let [k1, k2, k3] = self.wavevector(idx);
        (k1 * k1 + k2 * k2 + k3 * k3) as f64
    }

    /// True if any component of the mode sits on a Nyquist row
    /// (`k_j = -n/2`), which has no Hermitian partner.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n as i64 / 2;
        self.wavevector(idx).iter().any(|&k| k == -half)
    }

    /// Flat index of the mode `-k` given the flat index of `k`.
    /// Only valid away from Nyquist rows.
    pub(crate) fn conjugate_index(&self, idx: usize) -> usize {
        let shape = self.shape();
        let [k1, k2, k3] = self.wavevector(idx);
        let st = super::fft::strides(shape);
        super::fft::index_of(-k1, shape[0]) * st[0]
            + super::fft::index_of(-k2, shape[1]) * st[1]
            + super::fft::index_of(-k3, shape[2]) * st[2]
    }

    /// Grids are interchangeable iff they agree in dimension and size.
    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }

    /// Largest band limit compatible with alias-free cubic quadrature,
    /// `3K < n`.
    pub fn cubic_band_limit(&self) -> usize {
        (self.n - 1) / 3
    }
}
