//! Small multi-dimensional FFT engine on top of `rustfft`.
//!
//! Arrays are flat, row-major over a `[n1, n2, n3]` shape (a 2-D grid is
//! stored with `n3 = 1`). Transforms are applied along every axis of
//! length > 1. Plans are cached per thread, so concurrent transforms from
//! different threads never share mutable state.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry((len, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

pub(crate) fn strides(shape: [usize; 3]) -> [usize; 3] {
    [shape[1] * shape[2], shape[2], 1]
}

fn transform_axis(data: &mut [Complex64], shape: [usize; 3], axis: usize, forward: bool) {
    let n = shape[axis];
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let st = strides(shape);
    let (oa, ob) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut line = vec![Complex64::default(); n];
    for ia in 0..shape[oa] {
        for ib in 0..shape[ob] {
            let base = ia * st[oa] + ib * st[ob];
            if st[axis] == 1 {
                fft.process_with_scratch(&mut data[base..base + n], &mut scratch);
            } else {
                for t in 0..n {
                    line[t] = data[base + t * st[axis]];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for t in 0..n {
                    data[base + t * st[axis]] = line[t];
                }
            }
        }
    }
}

/// Samples -> spectral coefficients of `f(x) = sum_k c_k exp(i k.x)`,
/// normalised by `1/len`.
pub(crate) fn forward(data: &mut [Complex64], shape: [usize; 3]) {
    for axis in 0..3 {
        if shape[axis] > 1 {
            transform_axis(data, shape, axis, true);
        }
    }
    let scale = 1.0 / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Spectral coefficients -> samples (unnormalised inverse).
pub(crate) fn inverse(data: &mut [Complex64], shape: [usize; 3]) {
    for axis in 0..3 {
        if shape[axis] > 1 {
            transform_axis(data, shape, axis, false);
        }
    }
}

/// Wavenumber of storage index `i` along an axis of length `m` (0 for m == 1).
#[inline]
pub(crate) fn wavenumber(i: usize, m: usize) -> i64 {
    if m == 1 || i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Storage index of wavenumber `k` on an axis of length `m`.
#[inline]
pub(crate) fn index_of(k: i64, m: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (m as i64 + k) as usize
    }
}

/// Embed a spectrum into a larger lattice (zero padding in spectral space).
/// Nyquist rows of the source (`k = -n/2`) are dropped.
pub(crate) fn pad_spectrum(
    src: &[Complex64],
    src_shape: [usize; 3],
    dst_shape: [usize; 3],
) -> Vec<Complex64> {
    let mut dst = vec![Complex64::default(); dst_shape.iter().product()];
    let sst = strides(src_shape);
    let dst_st = strides(dst_shape);
    for i1 in 0..src_shape[0] {
        let k1 = wavenumber(i1, src_shape[0]);
        if 2 * k1 == -(src_shape[0] as i64) {
            continue;
        }
        for i2 in 0..src_shape[1] {
            let k2 = wavenumber(i2, src_shape[1]);
            if 2 * k2 == -(src_shape[1] as i64) {
                continue;
            }
            for i3 in 0..src_shape[2] {
                let k3 = wavenumber(i3, src_shape[2]);
                if 2 * k3 == -(src_shape[2] as i64) {
                    continue;
                }
                let s = i1 * sst[0] + i2 * sst[1] + i3 * sst[2];
                let d = index_of(k1, dst_shape[0]) * dst_st[0]
                    + index_of(k2, dst_shape[1]) * dst_st[1]
                    + index_of(k3, dst_shape[2]) * dst_st[2];
                dst[d] = src[s];
            }
        }
    }
    dst
}

/// Restrict a spectrum to a smaller lattice, keeping `|k| <= n/2 - 1` per
/// axis (the destination Nyquist row stays zero).
pub(crate) fn truncate_spectrum(
    src: &[Complex64],
    src_shape: [usize; 3],
    dst_shape: [usize; 3],
) -> Vec<Complex64> {
    let mut dst = vec![Complex64::default(); dst_shape.iter().product()];
    let sst = strides(src_shape);
    let dst_st = strides(dst_shape);
    for i1 in 0..dst_shape[0] {
        let k1 = wavenumber(i1, dst_shape[0]);
        if 2 * k1 == -(dst_shape[0] as i64) {
            continue;
        }
        for i2 in 0..dst_shape[1] {
            let k2 = wavenumber(i2, dst_shape[1]);
            if 2 * k2 == -(dst_shape[1] as i64) {
                continue;
            }
            for i3 in 0..dst_shape[2] {
                let k3 = wavenumber(i3, dst_shape[2]);
                if 2 * k3 == -(dst_shape[2] as i64) {
                    continue;
                }
                let d = i1 * dst_st[0] + i2 * dst_st[1] + i3 * dst_st[2];
                let s = index_of(k1, src_shape[0]) * sst[0]
                    + index_of(k2, src_shape[1]) * sst[1]
                    + index_of(k3, src_shape[2]) * sst[2];
                dst[d] = src[s];
            }
        }
    }
    dst
}
