//! Right-hand sides of the four incompressible Hall-MHD variants:
//! advection, Lorentz force, the Hall term in both equivalent forms, and
//! (an)isotropic fractional diffusion.
//!
//! All systems share the shape
//!
//! ```text
//! du/dt = P[-(u.grad)u + (b.grad)b] - nu Lambda^{a_u} u
//! db/dt = -(u.grad)b + (b.grad)u - eps curl(j x b) - magnetic diffusion
//! ```
//!
//! with `P` the Leray projector and `j = curl b`. The magnetic diffusion is
//! `eta Lambda^{a_b} b` for the isotropic systems and
//! `eta_h Lambda^{a_h} b_h + eta_v Lambda^{a_v} b_v` for the anisotropic
//! ones, acting on the horizontal part `(b1, b2, 0)` and the vertical part
//! `(0, 0, b3)` with different fractional orders.

use crate::error::{Error, Result};
use crate::fields::{cross, curl, leray_project, FieldKind, VectorField};
use crate::spectral::{Axis, ScalarField, DEALIAS_PADDING};

/// Which of the four systems is being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Classical 2.5-D Hall-MHD: Laplacian dissipation on `u` and `b`.
    ClassicalHall2p5d,
    /// 2.5-D with hyper-resistivity `Lambda^3 b`.
    HyperResistive2p5d,
    /// 2.5-D with `Lambda^3 b_h + Lambda^2 b_v`.
    AnisoHyper2p5d,
    /// 3-D with `Lambda^{5/2} u`, `Lambda^{7/2} b_h + Lambda^{5/2} b_v`.
    AnisoHyper3d,
}

impl SystemKind {
    pub fn dim(self) -> usize {
        match self {
            SystemKind::AnisoHyper3d => 3,
            _ => 2,
        }
    }

    /// Fractional order of the velocity dissipation.
    pub fn alpha_u(self) -> f64 {
        match self {
            SystemKind::AnisoHyper3d => 2.5,
            _ => 2.0,
        }
    }

    /// Fractional order acting on the horizontal magnetic part.
    pub fn alpha_b_h(self) -> f64 {
        match self {
            SystemKind::ClassicalHall2p5d => 2.0,
            SystemKind::HyperResistive2p5d => 3.0,
            SystemKind::AnisoHyper2p5d => 3.0,
            SystemKind::AnisoHyper3d => 3.5,
        }
    }

    /// Fractional order acting on the vertical magnetic part.
    pub fn alpha_b_v(self) -> f64 {
        match self {
            SystemKind::ClassicalHall2p5d => 2.0,
            SystemKind::HyperResistive2p5d => 3.0,
            SystemKind::AnisoHyper2p5d => 2.0,
            SystemKind::AnisoHyper3d => 2.5,
        }
    }

    pub fn is_anisotropic(self) -> bool {
        matches!(self, SystemKind::AnisoHyper2p5d | SystemKind::AnisoHyper3d)
    }

    pub fn tag(self) -> &'static str {
        match self {
            SystemKind::ClassicalHall2p5d => "A",
            SystemKind::HyperResistive2p5d => "B",
            SystemKind::AnisoHyper2p5d => "C",
            SystemKind::AnisoHyper3d => "D",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "A" => Ok(SystemKind::ClassicalHall2p5d),
            "B" => Ok(SystemKind::HyperResistive2p5d),
            "C" => Ok(SystemKind::AnisoHyper2p5d),
            "D" => Ok(SystemKind::AnisoHyper3d),
            other => Err(Error::InvalidSystem(format!("unknown system tag {other:?}"))),
        }
    }
}

/// System choice plus physical parameters. Diffusion exponents are fixed
/// by the kind and are not free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub nu: f64,
    pub eta_h: f64,
    pub eta_v: f64,
    pub epsilon: f64,
}

impl SystemSpec {
    fn validated(self) -> Result<Self> {
        if !(self.nu > 0.0) || !(self.eta_h > 0.0) || !(self.eta_v > 0.0) {
            return Err(Error::InvalidSystem(
                "nu and the magnetic diffusivities must be strictly positive".into(),
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidSystem("epsilon must be nonnegative".into()));
        }
        Ok(self)
    }

    /// Classical 2.5-D Hall-MHD with isotropic diffusivity `eta`.
    pub fn classical(nu: f64, eta: f64, epsilon: f64) -> Result<Self> {
        SystemSpec {
            kind: SystemKind::ClassicalHall2p5d,
            nu,
            eta_h: eta,
            eta_v: eta,
            epsilon,
        }
        .validated()
    }

    /// Hyper-resistive 2.5-D system with isotropic `eta`.
    pub fn hyper_resistive(nu: f64, eta: f64, epsilon: f64) -> Result<Self> {
        SystemSpec {
            kind: SystemKind::HyperResistive2p5d,
            nu,
            eta_h: eta,
            eta_v: eta,
            epsilon,
        }
        .validated()
    }

    /// Anisotropic 2.5-D system with separate horizontal/vertical
    /// diffusivities.
    pub fn aniso_2p5d(nu: f64, eta_h: f64, eta_v: f64, epsilon: f64) -> Result<Self> {
        SystemSpec {
            kind: SystemKind::AnisoHyper2p5d,
            nu,
            eta_h,
            eta_v,
            epsilon,
        }
        .validated()
    }

    /// Anisotropic 3-D system.
    pub fn aniso_3d(nu: f64, eta_h: f64, eta_v: f64, epsilon: f64) -> Result<Self> {
        SystemSpec {
            kind: SystemKind::AnisoHyper3d,
            nu,
            eta_h,
            eta_v,
            epsilon,
        }
        .validated()
    }

    /// Isotropic diffusivity accessor (systems with a single `eta`).
    pub fn eta(&self) -> f64 {
        self.eta_h
    }

    /// True when parameters are exactly the unit values `nu = eta =
    /// epsilon = 1` on the classical system.
    pub fn is_unit_classical(&self) -> bool {
        self.kind == SystemKind::ClassicalHall2p5d
            && self.nu == 1.0
            && self.eta_h == 1.0
            && self.eta_v == 1.0
            && self.epsilon == 1.0
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.kind.dim() != dim {
            return Err(Error::DimensionMismatch {
                state: dim,
                system: self.kind.dim(),
            });
        }
        Ok(())
    }
}

/// Flow state: solenoidal velocity and magnetic fields at a time.
#[derive(Debug, Clone)]
pub struct State {
    pub u: VectorField,
    pub b: VectorField,
    pub t: f64,
}

impl State {
    pub fn new(u: VectorField, b: VectorField, t: f64) -> Result<Self> {
        if !u.grid().same_as(b.grid()) {
            return Err(Error::GridMismatch(
                u.grid().dim(),
                u.grid().n(),
                b.grid().dim(),
                b.grid().n(),
            ));
        }
        Ok(State { u, b, t })
    }

    pub fn grid(&self) -> &std::sync::Arc<crate::spectral::Grid> {
        self.u.grid()
    }

    /// Larger of the two relative solenoidality defects.
    pub fn solenoidal_defect(&self) -> f64 {
        self.u.solenoidal_defect().max(self.b.solenoidal_defect())
    }

    /// Total energy `|u|_2^2 + |b|_2^2`.
    pub fn energy(&self) -> f64 {
        self.u.l2_norm().powi(2) + self.b.l2_norm().powi(2)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }
}

/// Which algebraic form of the Hall nonlinearity to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HallForm {
    /// `curl(j x b)` with `j = curl b`.
    CurlCross,
    /// `curl((b.grad) b)`; equal to `CurlCross` for divergence-free `b`.
    CurlAdvect,
}

fn active_axes(dim: usize) -> &'static [Axis] {
    if dim == 2 {
        &[Axis::X1, Axis::X2]
    } else {
        &[Axis::X1, Axis::X2, Axis::X3]
    }
}

/// Advection `(a.grad) c`, component-wise `sum_j a_j d_j c_i`, formed on
/// one shared zero-padded lattice so every factor is transformed once.
pub fn advect_padded(a: &VectorField, c: &VectorField, padding: f64) -> Result<VectorField> {
    if !a.grid().same_as(c.grid()) {
        return Err(Error::GridMismatch(
            a.grid().dim(),
            a.grid().n(),
            c.grid().dim(),
            c.grid().n(),
        ));
    }
    let grid = a.grid();
    let m = ScalarField::padded_size(grid.n(), padding)?;
    let axes = active_axes(grid.dim());
    let a_phys: Vec<Vec<f64>> = axes
        .iter()
        .map(|&ax| a.component(ax.index()).samples_padded(m))
        .collect();
    let mut comps: Vec<ScalarField> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut acc = vec![0.0f64; a_phys[0].len()];
        for (j, &ax) in axes.iter().enumerate() {
            let dc = c.component(i).derivative(ax).samples_padded(m);
            for ((s, &x), &y) in acc.iter_mut().zip(&a_phys[j]).zip(&dc) {
                *s += x * y;
            }
        }
        comps.push(ScalarField::from_padded_samples(grid, &acc, m, None));
    }
    let mut it = comps.into_iter();
    VectorField::new(
        [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        c.kind(),
    )
}

/// Advection with the default 2/3-rule dealiasing.
pub fn advect(a: &VectorField, c: &VectorField) -> Result<VectorField> {
    advect_padded(a, c, DEALIAS_PADDING)
}

/// Hall nonlinearity `curl(j x b)` (or its advective rewriting), dealiased.
pub fn hall_term_padded(b: &VectorField, form: HallForm, padding: f64) -> Result<VectorField> {
    let out = match form {
        HallForm::CurlCross => {
            let j = curl(b);
            curl(&cross(&j, b, padding)?)
        }
        HallForm::CurlAdvect => curl(&advect_padded(b, b, padding)?),
    };
    Ok(out.with_kind(FieldKind::Auxiliary))
}

pub fn hall_term(b: &VectorField, form: HallForm) -> Result<VectorField> {
    hall_term_padded(b, form, DEALIAS_PADDING)
}

/// Energy flux of the Hall term, `integral of curl(j x b) . b dx`.
/// Vanishes identically for divergence-free `b`; returned for
/// verification rather than assumed.
pub fn energy_flux_hall(b: &VectorField) -> Result<f64> {
    let hall = hall_term(b, HallForm::CurlCross)?;
    Ok(crate::fields::inner(&hall, b))
}

/// Apply the system's magnetic diffusion operator `-(eta Lambda^alpha)` to
/// `b`, honouring the horizontal/vertical split for anisotropic systems.
///
/// In 3-D the component-wise split does not commute with the divergence
/// (`div(eta_h L b_h + eta_v L' b_v) = (eta_v L' - eta_h L) d3 b3`), so for
/// the 3-D system the diffusion is realised as its Leray projection. That
/// keeps `b` on the divergence-free manifold while leaving every energy
/// pairing unchanged (`b` and `Lap b` are themselves divergence-free). In
/// 2.5-D `d3 b3 = 0` and the projection would be the identity, so the
/// plain split is used.
pub fn magnetic_diffusion(b: &VectorField, spec: &SystemSpec) -> Result<VectorField> {
    let ah = spec.kind.alpha_b_h();
    let av = spec.kind.alpha_b_v();
    let c1 = b.component(0).fractional_laplacian(ah)?.scaled(-spec.eta_h);
    let c2 = b.component(1).fractional_laplacian(ah)?.scaled(-spec.eta_h);
    let c3 = b.component(2).fractional_laplacian(av)?.scaled(-spec.eta_v);
    let diff = VectorField::new([c1, c2, c3], b.kind())?;
    if spec.kind == SystemKind::AnisoHyper3d {
        Ok(leray_project(&diff))
    } else {
        Ok(diff)
    }
}

/// Nonlinear part of the tendency (everything except the diagonal
/// diffusion), with dealiased products.
///
/// All quadratic terms are formed on one shared zero-padded lattice:
/// each velocity/magnetic component and each first derivative is
/// transformed to physical space exactly once per evaluation.
pub fn rhs_nonlinear(state: &State, spec: &SystemSpec) -> Result<(VectorField, VectorField)> {
    spec.check_dim(state.grid().dim())?;
    let grid = state.grid();
    let m = ScalarField::padded_size(grid.n(), DEALIAS_PADDING)?;
    let axes = active_axes(grid.dim());
    let u = &state.u;
    let b = &state.b;

    let u_phys: Vec<Vec<f64>> = axes
        .iter()
        .map(|&ax| u.component(ax.index()).samples_padded(m))
        .collect();
    let b_adv: Vec<Vec<f64>> = axes
        .iter()
        .map(|&ax| b.component(ax.index()).samples_padded(m))
        .collect();
    let npts = u_phys[0].len();

    let mut du_comps: Vec<ScalarField> = Vec::with_capacity(3);
    let mut db_comps: Vec<ScalarField> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut acc_u = vec![0.0f64; npts];
        let mut acc_b = vec![0.0f64; npts];
        for (j, &ax) in axes.iter().enumerate() {
            let du_i = u.component(i).derivative(ax).samples_padded(m);
            let db_i = b.component(i).derivative(ax).samples_padded(m);
            for p in 0..npts {
                // (b.grad)b - (u.grad)u and (b.grad)u - (u.grad)b
                acc_u[p] += b_adv[j][p] * db_i[p] - u_phys[j][p] * du_i[p];
                acc_b[p] += b_adv[j][p] * du_i[p] - u_phys[j][p] * db_i[p];
            }
        }
        du_comps.push(ScalarField::from_padded_samples(grid, &acc_u, m, None));
        db_comps.push(ScalarField::from_padded_samples(grid, &acc_b, m, None));
    }
    let mut du_it = du_comps.into_iter();
    let du = leray_project(&VectorField::new(
        [
            du_it.next().unwrap(),
            du_it.next().unwrap(),
            du_it.next().unwrap(),
        ],
        FieldKind::Velocity,
    )?);

    let mut db_it = db_comps.into_iter();
    let mut db = VectorField::new(
        [
            db_it.next().unwrap(),
            db_it.next().unwrap(),
            db_it.next().unwrap(),
        ],
        FieldKind::Magnetic,
    )?;

    if spec.epsilon != 0.0 {
        // Hall term: cross product on the same padded lattice, then curl
        let j = curl(b);
        let j_phys: [Vec<f64>; 3] = [
            j.component(0).samples_padded(m),
            j.component(1).samples_padded(m),
            j.component(2).samples_padded(m),
        ];
        let b_full: [Vec<f64>; 3] = [
            b.component(0).samples_padded(m),
            b.component(1).samples_padded(m),
            b.component(2).samples_padded(m),
        ];
        let cross_comp = |p: usize, q: usize| -> ScalarField {
            let vals: Vec<f64> = (0..npts)
                .map(|idx| j_phys[p][idx] * b_full[q][idx] - j_phys[q][idx] * b_full[p][idx])
                .collect();
            ScalarField::from_padded_samples(grid, &vals, m, None)
        };
        let jxb = VectorField::new(
            [cross_comp(1, 2), cross_comp(2, 0), cross_comp(0, 1)],
            FieldKind::Auxiliary,
        )?;
        db.axpy(-spec.epsilon, &curl(&jxb));
    }
    Ok((du, db))
}

/// Full tendency `(du/dt, db/dt)` of the chosen system.
pub fn rhs(state: &State, spec: &SystemSpec) -> Result<(VectorField, VectorField)> {
    let (mut du, mut db) = rhs_nonlinear(state, spec)?;
    let udiff = state
        .u
        .map(|c| c.fractional_laplacian(spec.kind.alpha_u()).expect("alpha_u >= 0"));
    du.axpy(-spec.nu, &udiff);
    db = db.add(&magnetic_diffusion(&state.b, spec)?);
    Ok((du, db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{divergence, inner, random_solenoidal};
    use crate::spectral::Grid;
    use std::sync::Arc;

    fn grid2(n: usize) -> Arc<Grid> {
        Grid::new(2, n).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SystemSpec::classical(0.0, 1.0, 1.0).is_err());
        assert!(SystemSpec::aniso_2p5d(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(SystemSpec::classical(1.0, 1.0, -0.5).is_err());
        let c = SystemSpec::aniso_2p5d(1.0, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(c.kind.alpha_b_h(), 3.0);
        assert_eq!(c.kind.alpha_b_v(), 2.0);
        let d = SystemSpec::aniso_3d(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(d.kind.alpha_u(), 2.5);
        assert_eq!(d.kind.alpha_b_h(), 3.5);
        assert_eq!(d.kind.dim(), 3);
    }

    #[test]
    fn advect_constant_coefficient_transport() {
        let g = grid2(16);
        let a = VectorField::from_fns(&g, FieldKind::Velocity, |_| 1.0, |_| 0.0, |_| 0.0);
        let c = VectorField::from_fns(&g, FieldKind::Velocity, |x| x[0].sin(), |_| 0.0, |_| 0.0);
        let r = advect(&a, &c).unwrap();
        let expect =
            VectorField::from_fns(&g, FieldKind::Velocity, |x| x[0].cos(), |_| 0.0, |_| 0.0);
        assert!(r.sub(&expect).l2_norm() < 1e-13);

        let constant = VectorField::from_fns(&g, FieldKind::Velocity, |_| 2.0, |_| 1.0, |_| 3.0);
        assert!(advect(&a, &constant).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn advect_single_product_term() {
        let g = grid2(16);
        let a = VectorField::from_fns(&g, FieldKind::Velocity, |_| 0.0, |x| x[0].sin(), |_| 0.0);
        let c = VectorField::from_fns(&g, FieldKind::Velocity, |_| 0.0, |_| 0.0, |x| x[1].cos());
        let r = advect(&a, &c).unwrap();
        let expect = VectorField::from_fns(&g, FieldKind::Velocity, |_| 0.0, |_| 0.0, |x| {
            -x[0].sin() * x[1].sin()
        });
        assert!(r.sub(&expect).l2_norm() < 1e-13);
    }

    #[test]
    fn hall_term_examples() {
        let g = grid2(16);
        let zero = VectorField::zeros(&g, FieldKind::Magnetic);
        assert!(hall_term(&zero, HallForm::CurlCross).unwrap().l2_norm() == 0.0);

        // purely vertical single mode: j x b depends on x1 alone in slot 1,
        // so its curl vanishes
        let b = VectorField::from_fns(&g, FieldKind::Magnetic, |_| 0.0, |_| 0.0, |x| x[0].sin());
        let h = hall_term(&b, HallForm::CurlCross).unwrap();
        assert!(h.l2_norm() < 1e-13);
    }

    #[test]
    fn hall_forms_agree_on_random_solenoidal_fields() {
        let g = grid2(32);
        for seed in 0..5 {
            let b = random_solenoidal(&g, 8, seed, FieldKind::Magnetic).unwrap();
            let hc = hall_term(&b, HallForm::CurlCross).unwrap();
            let ha = hall_term(&b, HallForm::CurlAdvect).unwrap();
            let rel = hc.sub(&ha).l2_norm() / hc.l2_norm();
            assert!(rel < 1e-10, "seed {seed}: forms differ by {rel}");
        }
    }

    #[test]
    fn energy_flux_of_hall_term_vanishes() {
        let g = grid2(32);
        let zero = VectorField::zeros(&g, FieldKind::Magnetic);
        assert_eq!(energy_flux_hall(&zero).unwrap(), 0.0);
        for seed in 0..5 {
            let b = random_solenoidal(&g, 8, seed, FieldKind::Magnetic).unwrap();
            let flux = energy_flux_hall(&b).unwrap();
            let scale = hall_term(&b, HallForm::CurlCross).unwrap().l2_norm() * b.l2_norm();
            assert!(flux.abs() <= 1e-10 * scale.max(1e-300), "flux {flux}");
        }
        let b = VectorField::from_fns(&g, FieldKind::Magnetic, |_| 0.0, |_| 0.0, |x| x[0].sin());
        assert!(energy_flux_hall(&b).unwrap().abs() < 1e-14);
    }

    #[test]
    fn rhs_trivial_cases() {
        let g = grid2(16);
        let spec = SystemSpec::classical(1.0, 1.0, 1.0).unwrap();
        let zero = State::new(
            VectorField::zeros(&g, FieldKind::Velocity),
            VectorField::zeros(&g, FieldKind::Magnetic),
            0.0,
        )
        .unwrap();
        let (du, db) = rhs(&zero, &spec).unwrap();
        assert!(du.l2_norm() == 0.0 && db.l2_norm() == 0.0);

        // epsilon = 0, b = 0, single mode u: pure diffusion
        let spec0 = SystemSpec::classical(0.7, 1.0, 0.0).unwrap();
        let u = VectorField::from_fns(&g, FieldKind::Velocity, |_| 0.0, |x| x[0].sin(), |_| 0.0);
        let s = State::new(u.clone(), VectorField::zeros(&g, FieldKind::Magnetic), 0.0).unwrap();
        let (du, db) = rhs(&s, &spec0).unwrap();
        assert!(du.sub(&u.scaled(-0.7)).l2_norm() < 1e-13);
        assert!(db.l2_norm() == 0.0);
    }

    #[test]
    fn rhs_aniso_vertical_single_mode() {
        let g = grid2(16);
        let eta_v = 0.3;
        let spec = SystemSpec::aniso_2p5d(1.0, 2.0, eta_v, 1.0).unwrap();
        let b = VectorField::from_fns(&g, FieldKind::Magnetic, |_| 0.0, |_| 0.0, |x| x[0].sin());
        let s = State::new(VectorField::zeros(&g, FieldKind::Velocity), b.clone(), 0.0).unwrap();
        let (du, db) = rhs(&s, &spec).unwrap();
        assert!(du.l2_norm() < 1e-13);
        assert!(db.sub(&b.scaled(-eta_v)).l2_norm() < 1e-13);
    }

    #[test]
    fn rhs_dimension_mismatch_is_an_error() {
        let g = grid2(16);
        let spec = SystemSpec::aniso_3d(1.0, 1.0, 1.0, 1.0).unwrap();
        let s = State::new(
            VectorField::zeros(&g, FieldKind::Velocity),
            VectorField::zeros(&g, FieldKind::Magnetic),
            0.0,
        )
        .unwrap();
        assert!(rhs(&s, &spec).is_err());
    }

    #[test]
    fn epsilon_zero_reduces_to_mhd_and_b_zero_to_ns() {
        let g = grid2(32);
        let u = random_solenoidal(&g, 7, 21, FieldKind::Velocity).unwrap();
        let b = random_solenoidal(&g, 7, 22, FieldKind::Magnetic).unwrap();
        let state = State::new(u.clone(), b.clone(), 0.0).unwrap();
        let spec_mhd = SystemSpec::classical(0.9, 1.1, 0.0).unwrap();
        let (du, db) = rhs(&state, &spec_mhd).unwrap();

        // same operators assembled without any Hall pathway
        let du_mhd = leray_project(&advect(&b, &b).unwrap().sub(&advect(&u, &u).unwrap()))
            .add(&u.map(|c| c.laplacian()).scaled(0.9));
        let db_mhd = advect(&b, &u)
            .unwrap()
            .sub(&advect(&u, &b).unwrap())
            .add(&b.map(|c| c.laplacian()).scaled(1.1));
        assert!(du.sub(&du_mhd).l2_norm() < 1e-13);
        assert!(db.sub(&db_mhd).l2_norm() < 1e-13);

        // with b = 0 the velocity tendency is Navier-Stokes
        let state_ns = State::new(u.clone(), VectorField::zeros(&g, FieldKind::Magnetic), 0.0)
            .unwrap();
        let (du_ns, db_ns) = rhs(&state_ns, &spec_mhd).unwrap();
        let expect = leray_project(&advect(&u, &u).unwrap().scaled(-1.0))
            .add(&u.map(|c| c.laplacian()).scaled(0.9));
        assert!(du_ns.sub(&expect).l2_norm() < 1e-13);
        assert!(db_ns.l2_norm() == 0.0);
    }

    #[test]
    fn rhs_outputs_are_solenoidal() {
        let g = grid2(32);
        let u = random_solenoidal(&g, 8, 31, FieldKind::Velocity).unwrap();
        let b = random_solenoidal(&g, 8, 32, FieldKind::Magnetic).unwrap();
        let state = State::new(u, b, 0.0).unwrap();
        for spec in [
            SystemSpec::classical(1.0, 1.0, 1.0).unwrap(),
            SystemSpec::hyper_resistive(1.0, 1.0, 1.0).unwrap(),
            SystemSpec::aniso_2p5d(1.0, 1.0, 1.0, 1.0).unwrap(),
        ] {
            let (du, db) = rhs(&state, &spec).unwrap();
            assert!(divergence(&du).l2_norm() < 1e-10);
            assert!(divergence(&db).l2_norm() < 1e-10);
        }
    }

    fn check_instantaneous_balance(state: &State, spec: &SystemSpec) {
        let (du, db) = rhs(state, spec).unwrap();
        let lhs = inner(&du, &state.u) + inner(&db, &state.b);
        let split = crate::fields::split_hv(&state.b);
        let rhs_val = -spec.nu
            * state
                .u
                .sobolev_seminorm(spec.kind.alpha_u() / 2.0)
                .powi(2)
            - spec.eta_h
                * split
                    .horizontal
                    .sobolev_seminorm(spec.kind.alpha_b_h() / 2.0)
                    .powi(2)
            - spec.eta_v
                * split
                    .vertical
                    .sobolev_seminorm(spec.kind.alpha_b_v() / 2.0)
                    .powi(2);
        let scale = lhs.abs().max(rhs_val.abs()).max(1e-300);
        assert!(
            (lhs - rhs_val).abs() / scale < 1e-9,
            "system {:?}: balance defect {}",
            spec.kind,
            (lhs - rhs_val).abs() / scale
        );
    }

    #[test]
    fn instantaneous_energy_balance() {
        // d/dt (|u|^2 + |b|^2)/2 = -(dissipation quadratic forms)
        let g = grid2(32);
        let u = random_solenoidal(&g, 7, 51, FieldKind::Velocity).unwrap();
        let b = random_solenoidal(&g, 7, 52, FieldKind::Magnetic).unwrap();
        let state = State::new(u, b, 0.0).unwrap();
        for spec in [
            SystemSpec::classical(0.8, 1.2, 1.0).unwrap(),
            SystemSpec::hyper_resistive(1.0, 0.5, 1.0).unwrap(),
            SystemSpec::aniso_2p5d(1.0, 2.0, 0.25, 1.0).unwrap(),
        ] {
            check_instantaneous_balance(&state, &spec);
        }
    }

    #[test]
    fn instantaneous_energy_balance_3d() {
        let g = Grid::new(3, 16).unwrap();
        let u = random_solenoidal(&g, 4, 61, FieldKind::Velocity).unwrap();
        let b = random_solenoidal(&g, 4, 62, FieldKind::Magnetic).unwrap();
        let state = State::new(u, b, 0.0).unwrap();
        let spec = SystemSpec::aniso_3d(0.7, 1.3, 0.4, 1.0).unwrap();
        check_instantaneous_balance(&state, &spec);
        let (du, db) = rhs(&state, &spec).unwrap();
        assert!(divergence(&du).l2_norm() < 1e-10);
        assert!(divergence(&db).l2_norm() < 1e-10);
    }
}
