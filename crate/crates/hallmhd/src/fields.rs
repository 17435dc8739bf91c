//! Three-component vector fields over 2-D or 3-D grids: vector calculus,
//! Leray projection, horizontal/vertical splits, and seeded random
//! divergence-free test fields.
//!
//! On a 2-D grid the fields are two-and-a-half dimensional: all three
//! components are carried but depend on `(x1, x2)` only, so every
//! `x3`-derivative vanishes and the curl reduces to
//! `(d2 v3, -d1 v3, d1 v2 - d2 v1)`.

use crate::error::{Error, Result};
use crate::spectral::{l2_inner, multiply, Axis, Grid, ScalarField};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::PI;
use std::sync::Arc;

/// Role tag carried by a vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Velocity,
    Magnetic,
    Vorticity,
    Current,
    Auxiliary,
}

/// Vector field with three scalar components on a shared grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: [ScalarField; 3],
    kind: FieldKind,
}

/// Horizontal/vertical decomposition `(b1, b2, 0) + (0, 0, b3)`.
#[derive(Debug, Clone)]
pub struct FieldSplit {
    pub horizontal: VectorField,
    pub vertical: VectorField,
}

impl VectorField {
    pub fn new(components: [ScalarField; 3], kind: FieldKind) -> Result<Self> {
        let g = components[0].grid().clone();
        for c in &components[1..] {
            if !c.grid().same_as(&g) {
                return Err(Error::GridMismatch(
                    g.dim(),
                    g.n(),
                    c.grid().dim(),
                    c.grid().n(),
                ));
            }
        }
        Ok(VectorField { components, kind })
    }

    pub fn zeros(grid: &Arc<Grid>, kind: FieldKind) -> Self {
        VectorField {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
            kind,
        }
    }

    pub fn from_fns(
        grid: &Arc<Grid>,
        kind: FieldKind,
        f1: impl Fn([f64; 3]) -> f64,
        f2: impl Fn([f64; 3]) -> f64,
        f3: impl Fn([f64; 3]) -> f64,
    ) -> Self {
        VectorField {
            components: [
                ScalarField::from_fn(grid, f1),
                ScalarField::from_fn(grid, f2),
                ScalarField::from_fn(grid, f3),
            ],
            kind,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.components
    }

    pub fn band_limit(&self) -> Option<usize> {
        let ks: Vec<Option<usize>> = self.components.iter().map(|c| c.band_limit()).collect();
        match (ks[0], ks[1], ks[2]) {
            (Some(a), Some(b), Some(c)) => Some(a.max(b).max(c)),
            _ => None,
        }
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> VectorField {
        VectorField {
            components: [
                f(&self.components[0]),
                f(&self.components[1]),
                f(&self.components[2]),
            ],
            kind: self.kind,
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].add(&other.components[0]),
                self.components[1].add(&other.components[1]),
                self.components[2].add(&other.components[2]),
            ],
            kind: self.kind,
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        self.map(|c| c.scaled(a))
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            c.axpy(a, o);
        }
    }

    pub fn truncate(&self, limit: usize) -> VectorField {
        self.map(|c| c.truncate(limit))
    }

    /// `L^2` norm of the full vector, `(sum_i |v_i|_2^2)^{1/2}` (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of component seminorms squared, `sum_i |v_i|_{H^s}^2`, square-rooted.
    pub fn sobolev_seminorm(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.sobolev_seminorm(s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Max absolute physical sample over all components.
    pub fn linf_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.lp_norm(f64::INFINITY).unwrap())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Relative solenoidality defect `|div v|_2 / |v|_{H^1}` (0 for the
    /// zero field).
    pub fn solenoidal_defect(&self) -> f64 {
        let h1 = self.sobolev_seminorm(1.0);
        if h1 == 0.0 {
            return 0.0;
        }
        divergence(self).l2_norm() / h1
    }
}

/// Curl. On a 2-D grid the `x3`-derivatives vanish identically, which
/// yields `(d2 v3, -d1 v3, d1 v2 - d2 v1)`.
pub fn curl(v: &VectorField) -> VectorField {
    let [v1, v2, v3] = v.components();
    let c1 = v3.derivative(Axis::X2).sub(&v2.derivative(Axis::X3));
    let c2 = v1.derivative(Axis::X3).sub(&v3.derivative(Axis::X1));
    let c3 = v2.derivative(Axis::X1).sub(&v1.derivative(Axis::X2));
    VectorField {
        components: [c1, c2, c3],
        kind: match v.kind() {
            FieldKind::Velocity => FieldKind::Vorticity,
            FieldKind::Magnetic => FieldKind::Current,
            k => k,
        },
    }
}

/// Divergence `sum_j d_j v_j` (the `j = 3` term vanishes on 2-D grids).
pub fn divergence(v: &VectorField) -> ScalarField {
    v.component(0)
        .derivative(Axis::X1)
        .add(&v.component(1).derivative(Axis::X2))
        .add(&v.component(2).derivative(Axis::X3))
}

/// Gradient of a scalar, `(d1 f, d2 f, d3 f)`.
pub fn gradient(f: &ScalarField, kind: FieldKind) -> VectorField {
    VectorField {
        components: [
            f.derivative(Axis::X1),
            f.derivative(Axis::X2),
            f.derivative(Axis::X3),
        ],
        kind,
    }
}

/// Leray projection `v - grad inv(Delta) div v` with the zero mode of
/// `inv(Delta)` gauged to zero. On a 2-D grid `k3 = 0`, so the third
/// component passes through unchanged.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.grid().clone();
    let mut comps: [Vec<Complex64>; 3] = [
        v.component(0).coeffs().to_vec(),
        v.component(1).coeffs().to_vec(),
        v.component(2).coeffs().to_vec(),
    ];
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = grid.k_squared(idx);
        if k2 == 0.0 {
            continue;
        }
        let kdotv = k[0] as f64 * comps[0][idx] + k[1] as f64 * comps[1][idx]
            + k[2] as f64 * comps[2][idx];
        let factor = kdotv / k2;
        for j in 0..3 {
            comps[j][idx] -= k[j] as f64 * factor;
        }
    }
    let [c1, c2, c3] = comps;
    let mk = |coeffs: Vec<Complex64>, bl: Option<usize>| {
        let mut f = ScalarField::from_coeffs(&grid, coeffs, bl);
        f.zero_nyquist();
        f
    };
    VectorField {
        components: [
            mk(c1, v.component(0).band_limit()),
            mk(c2, v.component(1).band_limit()),
            mk(c3, v.component(2).band_limit()),
        ],
        kind: v.kind(),
    }
}

/// Split into horizontal `(b1, b2, 0)` and vertical `(0, 0, b3)` parts.
pub fn split_hv(b: &VectorField) -> FieldSplit {
    let zero = ScalarField::zeros(b.grid());
    FieldSplit {
        horizontal: VectorField {
            components: [b.component(0).clone(), b.component(1).clone(), zero.clone()],
            kind: b.kind(),
        },
        vertical: VectorField {
            components: [zero.clone(), zero, b.component(2).clone()],
            kind: b.kind(),
        },
    }
}

/// Pointwise dot product of two vector fields as a dealiased scalar field.
pub fn dot(a: &VectorField, b: &VectorField, padding: f64) -> Result<ScalarField> {
    let mut acc = multiply(a.component(0), b.component(0), padding)?;
    acc = acc.add(&multiply(a.component(1), b.component(1), padding)?);
    acc = acc.add(&multiply(a.component(2), b.component(2), padding)?);
    Ok(acc)
}

/// Exact `L^2` pairing `integral of a . b dx` (no product grid involved).
pub fn inner(a: &VectorField, b: &VectorField) -> f64 {
    (0..3).map(|i| l2_inner(a.component(i), b.component(i))).sum()
}

/// Pointwise cross product via dealiased scalar products.
pub fn cross(a: &VectorField, b: &VectorField, padding: f64) -> Result<VectorField> {
    let c = |i: usize, j: usize| multiply(a.component(i), b.component(j), padding);
    let c1 = c(1, 2)?.sub(&c(2, 1)?);
    let c2 = c(2, 0)?.sub(&c(0, 2)?);
    let c3 = c(0, 1)?.sub(&c(1, 0)?);
    VectorField::new([c1, c2, c3], FieldKind::Auxiliary)
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller on explicitly constructed uniforms so the stream is fully
    // pinned by the ChaCha8 keystream (same seed, same field, any platform).
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let v = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u.ln()).sqrt();
    let t = 2.0 * PI * v;
    (r * t.cos(), r * t.sin())
}

fn random_components(grid: &Arc<Grid>, band_limit: usize, seed: u64) -> [ScalarField; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps: Vec<Vec<Complex64>> = (0..3).map(|_| vec![Complex64::default(); grid.len()]).collect();
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let kmax = k.iter().map(|kj| kj.unsigned_abs() as usize).max().unwrap();
        if kmax == 0 || kmax > band_limit {
            continue;
        }
        for comp in comps.iter_mut() {
            let (re, im) = normal_pair(&mut rng);
            comp[idx] = Complex64::new(re, im);
        }
    }
    // Hermitian symmetrisation keeps the field real-valued.
    for comp in comps.iter_mut() {
        for idx in 0..grid.len() {
            let j = grid.conjugate_index(idx);
            if j > idx {
                let avg = (comp[idx] + comp[j].conj()) / 2.0;
                comp[idx] = avg;
                comp[j] = avg.conj();
            } else if j == idx {
                comp[idx] = Complex64::new(comp[idx].re, 0.0);
            }
        }
    }
    let mut it = comps.into_iter();
    let mk = |coeffs: Vec<Complex64>| {
        ScalarField::from_coeffs(grid, coeffs, Some(band_limit))
    };
    [
        mk(it.next().unwrap()),
        mk(it.next().unwrap()),
        mk(it.next().unwrap()),
    ]
}

/// Deterministic random band-limited vector field, Hermitian-symmetrised
/// and normalised to unit `L^2` norm, but not projected.
pub fn random_vector(
    grid: &Arc<Grid>,
    band_limit: usize,
    seed: u64,
    kind: FieldKind,
) -> Result<VectorField> {
    if band_limit == 0 || 3 * band_limit >= grid.n() {
        return Err(Error::BandLimitTooLarge {
            k: band_limit,
            n: grid.n(),
        });
    }
    let v = VectorField {
        components: random_components(grid, band_limit, seed),
        kind,
    };
    let norm = v.l2_norm();
    Ok(v.scaled(1.0 / norm))
}

/// Deterministic random divergence-free field: unit normals per retained
/// mode, Hermitian-symmetrised, Leray-projected, unit `L^2` norm. The
/// generator is ChaCha8 keyed by `seed`; the stream layout is part of the
/// reproducibility contract.
pub fn random_solenoidal(
    grid: &Arc<Grid>,
    band_limit: usize,
    seed: u64,
    kind: FieldKind,
) -> Result<VectorField> {
    if band_limit == 0 || 3 * band_limit >= grid.n() {
        return Err(Error::BandLimitTooLarge {
            k: band_limit,
            n: grid.n(),
        });
    }
    let raw = VectorField {
        components: random_components(grid, band_limit, seed),
        kind,
    };
    let projected = leray_project(&raw);
    let norm = projected.l2_norm();
    Ok(projected.scaled(1.0 / norm))
}
