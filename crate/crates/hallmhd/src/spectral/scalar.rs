//! Real scalar fields in spectral-canonical form, with Fourier-multiplier
//! calculus, dealiased products, and spectrally exact quadrature.

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Default zero padding for quadratic products (the 2/3 rule).
pub const DEALIAS_PADDING: f64 = 1.5;

/// Coordinate axis of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }
}

/// Real-valued scalar field stored as complex Fourier coefficients of
/// `f(x) = sum_k c_k exp(i k.x)` over the full wavenumber lattice.
///
/// Hermitian symmetry `c(-k) = conj(c(k))` is maintained by every
/// operation. `band_limit = K` records that all coefficients with
/// `max_j |k_j| > K` vanish exactly.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    band_limit: Option<usize>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
            band_limit: Some(0),
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    /// Build from physical samples in the grid's flat storage order.
    pub fn from_samples(grid: &Arc<Grid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut coeffs, grid.shape());
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
            band_limit: None,
        })
    }

    /// Sample a closure of the physical coordinates.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    pub(crate) fn from_coeffs(
        grid: &Arc<Grid>,
        coeffs: Vec<Complex64>,
        band_limit: Option<usize>,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            coeffs,
            band_limit,
        }
    }

    /// Build directly from spectral coefficients in storage order (e.g.
    /// when restoring a snapshot). The caller vouches for Hermitian
    /// symmetry; the claimed band limit is taken at face value.
    pub fn from_coefficients(
        grid: &Arc<Grid>,
        coeffs: Vec<Complex64>,
        band_limit: Option<usize>,
    ) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
            band_limit,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.coeffs
    }

    pub fn band_limit(&self) -> Option<usize> {
        self.band_limit
    }

    /// Physical samples (derived view; the spectral array stays canonical).
    pub fn samples(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.shape());
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Physical samples on a zero-padded lattice with `m` points per
    /// transformed axis.
    pub(crate) fn samples_padded(&self, m: usize) -> Vec<f64> {
        let shape = self.grid.shape();
        let padded = padded_shape(shape, m);
        let mut buf = fft::pad_spectrum(&self.coeffs, shape, padded);
        fft::inverse(&mut buf, padded);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Rebuild a field on `grid` from real samples living on the padded
    /// `m`-lattice, dropping the unresolved modes (the dealiasing
    /// truncation).
    pub(crate) fn from_padded_samples(
        grid: &Arc<Grid>,
        samples: &[f64],
        m: usize,
        band_limit: Option<usize>,
    ) -> Self {
        let padded = padded_shape(grid.shape(), m);
        debug_assert_eq!(samples.len(), padded.iter().product::<usize>());
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut buf, padded);
        let coeffs = fft::truncate_spectrum(&buf, padded, grid.shape());
        ScalarField::from_coeffs(grid, coeffs, band_limit)
    }

    /// Padded lattice size for a given padding factor; errors unless the
    /// result is an even integer at least `n`.
    pub(crate) fn padded_size(n: usize, padding: f64) -> Result<usize> {
        let m_real = n as f64 * padding;
        let m = m_real.round() as usize;
        if !(padding >= 1.0) || (m_real - m as f64).abs() > 1e-9 || m % 2 != 0 {
            return Err(Error::InvalidPadding(padding));
        }
        Ok(m)
    }

    fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(
                self.grid.dim(),
                self.grid.n(),
                other.grid.dim(),
                other.grid.n(),
            ));
        }
        Ok(())
    }

    /// Zero every Nyquist row (`k_j = -n/2`). Applied after each multiplier
    /// so that odd symbols such as `i k_j` keep Hermitian symmetry.
    pub(crate) fn zero_nyquist(&mut self) {
        let grid = self.grid.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if grid.is_nyquist(i) {
                *c = Complex64::default();
            }
        }
    }

    /// Apply a real Fourier multiplier `k -> sigma(k)`.
    ///
    /// The symbol must be finite at `k = 0` and real-valued (derivative
    /// symbols `i k_j` are a distinct pure-imaginary kind, applied by
    /// [`ScalarField::derivative`]). Nyquist rows are zeroed after every
    /// multiplier application: they have no Hermitian partner, so odd
    /// symbols would otherwise break the real-field invariant.
    pub fn apply_real_symbol(&self, symbol: impl Fn([i64; 3]) -> f64) -> ScalarField {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= symbol(self.grid.wavevector(i));
        }
        out.zero_nyquist();
        out
    }

    /// Partial derivative along `axis` (the symbol `i k_j`).
    ///
    /// On a 2-D grid the third axis has `k_3 = 0`, so `X3` returns the zero
    /// field rather than an error.
    pub fn derivative(&self, axis: Axis) -> ScalarField {
        let j = axis.index();
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavevector(i)[j] as f64;
            *c *= Complex64::new(0.0, k);
        }
        out.zero_nyquist();
        out
    }

    /// Fractional Laplacian `Lambda^s = (-Delta)^{s/2}`, the multiplier
    /// `|k|^s` with `|0|^s := 0`.
    pub fn fractional_laplacian(&self, s: f64) -> Result<ScalarField> {
        if s < 0.0 || !s.is_finite() {
            return Err(Error::NegativeOrder(s));
        }
        Ok(self.apply_real_symbol(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                0.0
            } else {
                k2.powf(s / 2.0)
            }
        }))
    }

    /// Laplacian `Delta = -Lambda^2` (exact integer symbol `-|k|^2`).
    pub fn laplacian(&self) -> ScalarField {
        self.apply_real_symbol(|k| -((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64))
    }

    /// Torus integral; exact for any trigonometric polynomial resolved on
    /// the grid.
    pub fn integrate(&self) -> f64 {
        self.grid.volume() * self.coeffs[0].re
    }

    /// Mean value over the torus.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Discrete `L^p` norm from physical samples with cell-measure
    /// weighting; `p = infinity` returns the max absolute sample.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let samples = self.samples();
        if p.is_infinite() {
            return Ok(samples.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
        }
        let cell = self.grid.volume() / self.grid.len() as f64;
        let sum: f64 = samples.iter().map(|&v| v.abs().powf(p)).sum();
        Ok((sum * cell).powf(1.0 / p))
    }

    /// Homogeneous Sobolev seminorm
    /// `( sum_k |k|^{2s} |c_k|^2 (2 pi)^dim )^{1/2}`.
    pub fn sobolev_seminorm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k2 = self.grid.k_squared(i);
            if k2 == 0.0 && s > 0.0 {
                continue;
            }
            // |k|^{2s} with exact fast paths for the common orders
            let w = if s == 0.0 {
                1.0
            } else if s == 1.0 {
                k2
            } else if s == 2.0 {
                k2 * k2
            } else {
                k2.powf(s)
            };
            acc += w * c.norm_sqr();
        }
        (acc * self.grid.volume()).sqrt()
    }

    /// Spectral `L^2` norm (Parseval; equals `lp_norm(2)` for band-limited
    /// fields).
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_seminorm(0.0)
    }

    /// Truncate to `max_j |k_j| <= limit` and record the band limit.
    pub fn truncate(&self, limit: usize) -> ScalarField {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavevector(i);
            if k.iter().any(|&kj| kj.unsigned_abs() as usize > limit) {
                *c = Complex64::default();
            }
        }
        out.zero_nyquist();
        out.band_limit = Some(limit.min(self.band_limit.unwrap_or(usize::MAX)));
        out
    }

    /// Largest Hermitian-symmetry defect `|c(-k) - conj(c(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.coeffs.len() {
            if self.grid.is_nyquist(i) {
                continue;
            }
            let j = self.grid.conjugate_index(i);
            let d = (self.coeffs[j] - self.coeffs[i].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= a;
        }
        out
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        debug_assert!(self.grid.same_as(&other.grid));
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        out.band_limit = merge_limits(self.band_limit, other.band_limit);
        out
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.add(&other.scaled(-1.0))
    }

    /// Add `a * other` in place.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
        self.band_limit = merge_limits(self.band_limit, other.band_limit);
    }
}

fn merge_limits(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

fn padded_shape(shape: [usize; 3], m: usize) -> [usize; 3] {
    [
        if shape[0] > 1 { m } else { 1 },
        if shape[1] > 1 { m } else { 1 },
        if shape[2] > 1 { m } else { 1 },
    ]
}

/// Pointwise product formed in physical space on a zero-padded grid and
/// truncated back. With band limits `K_f + K_g < n * padding / 2` the
/// retained coefficients are alias-free.
pub fn multiply(f: &ScalarField, g: &ScalarField, padding: f64) -> Result<ScalarField> {
    f.check_same_grid(g)?;
    let n = f.grid().n();
    let m = ScalarField::padded_size(n, padding)?;
    let a = f.samples_padded(m);
    let b = g.samples_padded(m);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| x * y).collect();
    let band_limit = match (f.band_limit(), g.band_limit()) {
        (Some(kf), Some(kg)) if kf + kg < n / 2 => Some(kf + kg),
        _ => None,
    };
    Ok(ScalarField::from_padded_samples(
        f.grid(),
        &prod,
        m,
        band_limit,
    ))
}

/// Exact spectral pairing `integral of f * g dx` for real fields.
pub fn l2_inner(f: &ScalarField, g: &ScalarField) -> f64 {
    debug_assert!(f.grid().same_as(g.grid()));
    let dot: f64 = f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| (a * b.conj()).re)
        .sum();
    dot * f.grid().volume()
}
