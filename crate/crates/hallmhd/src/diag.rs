//! Time-series diagnostics: energies, Sobolev monitors, regularity
//! criterion accumulators of Prodi-Serrin type on partial quantities
//! (`grad b3`, `j3`, `Lap(Lap u_k)`), the running energy-identity defect,
//! and the auxiliary `z`-field norms.
//!
//! BMO-based criteria are not computed: there is no faithful discrete BMO
//! norm on a periodic grid, so `L^inf` columns are emitted instead and are
//! explicitly labelled proxies.

use crate::error::{Error, Result};
use crate::fields::{curl, split_hv};
use crate::hall::aux_fields;
use crate::rhs::{State, SystemSpec};
use crate::spectral::ScalarField;

/// Partial quantity monitored by a regularity criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionQuantity {
    /// `|grad b3|`, equivalently `(j1, j2)`.
    GradB3,
    /// Third component of the current density.
    J3,
    /// `Lap(Lap u_3)`.
    BilapU3,
    BilapU1,
    BilapU2,
}

impl CriterionQuantity {
    pub fn tag(self) -> &'static str {
        match self {
            CriterionQuantity::GradB3 => "grad_b3",
            CriterionQuantity::J3 => "j3",
            CriterionQuantity::BilapU3 => "bilap_u3",
            CriterionQuantity::BilapU1 => "bilap_u1",
            CriterionQuantity::BilapU2 => "bilap_u2",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "grad_b3" => Ok(CriterionQuantity::GradB3),
            "j3" => Ok(CriterionQuantity::J3),
            "bilap_u3" => Ok(CriterionQuantity::BilapU3),
            "bilap_u1" => Ok(CriterionQuantity::BilapU1),
            "bilap_u2" => Ok(CriterionQuantity::BilapU2),
            other => Err(Error::InvalidCriterion(format!("unknown quantity {other:?}"))),
        }
    }
}

/// A `(quantity, p, r)` criterion accumulator with the scaling constraint
/// `2/p + 2/r <= 1` enforced at construction; `p = inf` pairs with `r = 2`.
#[derive(Debug, Clone, Copy)]
pub struct CriterionSpec {
    pub quantity: CriterionQuantity,
    pub p: f64,
    pub r: f64,
}

impl CriterionSpec {
    pub fn new(quantity: CriterionQuantity, p: f64, r: Option<f64>) -> Result<Self> {
        if !(p > 2.0) {
            return Err(Error::InvalidCriterion(format!(
                "p must lie in (2, inf], got {p}"
            )));
        }
        let r = match r {
            Some(r) => r,
            // critical exponent 2p/(p-2), read as 2 when p = inf
            None => {
                if p.is_infinite() {
                    2.0
                } else {
                    2.0 * p / (p - 2.0)
                }
            }
        };
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidCriterion(format!("r must be positive, got {r}")));
        }
        let budget = if p.is_infinite() { 0.0 } else { 2.0 / p } + 2.0 / r;
        if budget > 1.0 + 1e-12 {
            return Err(Error::InvalidCriterion(format!(
                "2/p + 2/r = {budget} exceeds 1"
            )));
        }
        Ok(CriterionSpec { quantity, p, r })
    }
}

/// One time-stamped set of monitored quantities.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u_sq: f64,
    pub l2_b_sq: f64,
    pub h1_u_sq: f64,
    pub h1_b_sq: f64,
    /// Inhomogeneous `H^m` monitors, `|.|_2^2 + |.|_{H^m seminorm}^2`.
    pub hm_u_sq: f64,
    pub hm_b_sq: f64,
    pub sobolev_order: u32,
    /// Instantaneous `|quantity|_{L^p}` per criterion.
    pub criterion_samples: Vec<f64>,
    /// Exponent `r` applied to each sample inside the running integral.
    pub criterion_powers: Vec<f64>,
    /// Running `int_0^t |quantity|_{L^p}^r ds` per criterion (trapezoid on
    /// the powered samples).
    pub criterion_integrals: Vec<f64>,
    /// Instantaneous dissipation rate `2 (nu |...|^2 + ...)`.
    pub dissipation_rate: f64,
    /// Running dissipation integral.
    pub dissipation_integral: f64,
    /// Energy at the start of accumulation.
    pub initial_energy: f64,
    /// `E(t) - E(0) + dissipation_integral`, zero for an exact trajectory.
    pub energy_defect: f64,
    pub z1_sq: f64,
    pub z2_sq: f64,
    pub curl_omega_sq: [f64; 3],
    /// `L^inf` proxies for BMO-normed quantities (`u`, `grad b`, `j`).
    pub proxy_linf_u: f64,
    pub proxy_linf_grad_b: f64,
    pub proxy_linf_j: f64,
    pub finite: bool,
}

fn lp_of_magnitude(parts: &[ScalarField], p: f64) -> Result<f64> {
    let grid = parts[0].grid().clone();
    let mut mag2 = vec![0.0f64; grid.len()];
    for f in parts {
        for (acc, v) in mag2.iter_mut().zip(f.samples()) {
            *acc += v * v;
        }
    }
    if p.is_infinite() {
        return Ok(mag2.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt());
    }
    let cell = grid.volume() / grid.len() as f64;
    let sum: f64 = mag2.iter().map(|&v| v.powf(p / 2.0)).sum();
    Ok((sum * cell).powf(1.0 / p))
}

fn criterion_sample(state: &State, c: &CriterionSpec) -> Result<f64> {
    let bilap = |f: &ScalarField| {
        f.apply_real_symbol(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            k2 * k2
        })
    };
    match c.quantity {
        CriterionQuantity::GradB3 => {
            let b3 = state.b.component(2);
            let grad = crate::fields::gradient(b3, crate::fields::FieldKind::Auxiliary);
            lp_of_magnitude(
                &[
                    grad.component(0).clone(),
                    grad.component(1).clone(),
                    grad.component(2).clone(),
                ],
                c.p,
            )
        }
        CriterionQuantity::J3 => {
            let j3 = curl(&state.b).component(2).clone();
            j3.lp_norm(c.p)
        }
        CriterionQuantity::BilapU3 => bilap(state.u.component(2)).lp_norm(c.p),
        CriterionQuantity::BilapU1 => bilap(state.u.component(0)).lp_norm(c.p),
        CriterionQuantity::BilapU2 => bilap(state.u.component(1)).lp_norm(c.p),
    }
}

fn dissipation_rate(state: &State, spec: &SystemSpec) -> f64 {
    let split = split_hv(&state.b);
    2.0 * (spec.nu * state.u.sobolev_seminorm(spec.kind.alpha_u() / 2.0).powi(2)
        + spec.eta_h
            * split
                .horizontal
                .sobolev_seminorm(spec.kind.alpha_b_h() / 2.0)
                .powi(2)
        + spec.eta_v
            * split
                .vertical
                .sobolev_seminorm(spec.kind.alpha_b_v() / 2.0)
                .powi(2))
}

/// Default Sobolev monitor order.
pub const DEFAULT_SOBOLEV_ORDER: u32 = 3;

/// Instantaneous sample of every monitored quantity. Criterion integrals
/// start at zero; advance them with [`accumulate`].
pub fn sample(
    state: &State,
    spec: &SystemSpec,
    criteria: &[CriterionSpec],
    sobolev_order: u32,
) -> Result<DiagnosticsRecord> {
    let m = sobolev_order as f64;
    let l2_u_sq = state.u.l2_norm().powi(2);
    let l2_b_sq = state.b.l2_norm().powi(2);
    let aux = aux_fields(state);
    let curl_omega = curl(&aux.omega);
    let mut samples = Vec::with_capacity(criteria.len());
    for c in criteria {
        samples.push(criterion_sample(state, c)?);
    }
    let grad_b = [
        crate::fields::gradient(state.b.component(0), crate::fields::FieldKind::Auxiliary),
        crate::fields::gradient(state.b.component(1), crate::fields::FieldKind::Auxiliary),
        crate::fields::gradient(state.b.component(2), crate::fields::FieldKind::Auxiliary),
    ];
    let proxy_grad_b = grad_b
        .iter()
        .map(|g| g.linf_norm())
        .fold(0.0, f64::max);
    let finite = state.is_finite();
    Ok(DiagnosticsRecord {
        t: state.t,
        l2_u_sq,
        l2_b_sq,
        h1_u_sq: state.u.sobolev_seminorm(1.0).powi(2),
        h1_b_sq: state.b.sobolev_seminorm(1.0).powi(2),
        hm_u_sq: l2_u_sq + state.u.sobolev_seminorm(m).powi(2),
        hm_b_sq: l2_b_sq + state.b.sobolev_seminorm(m).powi(2),
        sobolev_order,
        criterion_samples: samples,
        criterion_powers: criteria.iter().map(|c| c.r).collect(),
        criterion_integrals: vec![0.0; criteria.len()],
        dissipation_rate: dissipation_rate(state, spec),
        dissipation_integral: 0.0,
        initial_energy: l2_u_sq + l2_b_sq,
        energy_defect: 0.0,
        z1_sq: aux.z1.l2_norm().powi(2),
        z2_sq: aux.z2.l2_norm().powi(2),
        curl_omega_sq: [
            curl_omega.component(0).l2_norm().powi(2),
            curl_omega.component(1).l2_norm().powi(2),
            curl_omega.component(2).l2_norm().powi(2),
        ],
        proxy_linf_u: state.u.linf_norm(),
        proxy_linf_grad_b: proxy_grad_b,
        proxy_linf_j: curl(&state.b).linf_norm(),
        finite,
    })
}

impl DiagnosticsRecord {
    /// Install an externally computed dissipation integral (e.g. the
    /// stepper's stage-weighted one) and refresh the defect.
    pub fn with_dissipation_integral(mut self, integral: f64, initial_energy: f64) -> Self {
        self.dissipation_integral = integral;
        self.initial_energy = initial_energy;
        self.energy_defect = self.l2_u_sq + self.l2_b_sq - initial_energy + integral;
        self
    }
}

/// Advance the running integrals from `prev` to `cur` by the trapezoid
/// rule on the sampled integrands: `|.|_{L^p}^r` for each criterion and
/// the dissipation rate for the energy defect.
pub fn accumulate(prev: &DiagnosticsRecord, cur: &DiagnosticsRecord) -> Result<DiagnosticsRecord> {
    if !(cur.t > prev.t) {
        return Err(Error::NonMonotoneTime {
            prev: prev.t,
            cur: cur.t,
        });
    }
    if prev.criterion_samples.len() != cur.criterion_samples.len() {
        return Err(Error::InvalidCriterion(
            "records carry different criterion sets".into(),
        ));
    }
    let dt = cur.t - prev.t;
    let mut out = cur.clone();
    out.sobolev_order = prev.sobolev_order;
    out.initial_energy = prev.initial_energy;
    out.dissipation_integral =
        prev.dissipation_integral + dt * (prev.dissipation_rate + cur.dissipation_rate) / 2.0;
    out.energy_defect =
        out.l2_u_sq + out.l2_b_sq - out.initial_energy + out.dissipation_integral;
    out.criterion_integrals = prev
        .criterion_integrals
        .iter()
        .zip(prev.criterion_samples.iter().zip(&cur.criterion_samples))
        .zip(&prev.criterion_powers)
        .map(|((&acc, (&a, &b)), &r)| acc + dt * (a.powf(r) + b.powf(r)) / 2.0)
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{random_solenoidal, FieldKind, VectorField};
    use crate::spectral::Grid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid2(n: usize) -> Arc<Grid> {
        Grid::new(2, n).unwrap()
    }

    fn spec_a() -> SystemSpec {
        SystemSpec::classical(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn criterion_validation() {
        assert!(CriterionSpec::new(CriterionQuantity::GradB3, 4.0, None).is_ok());
        assert!(CriterionSpec::new(CriterionQuantity::GradB3, 2.0, None).is_err());
        assert!(CriterionSpec::new(CriterionQuantity::J3, 4.0, Some(3.0)).is_err());
        let inf = CriterionSpec::new(CriterionQuantity::J3, f64::INFINITY, None).unwrap();
        assert_eq!(inf.r, 2.0);
        let c = CriterionSpec::new(CriterionQuantity::GradB3, 4.0, None).unwrap();
        assert!((c.r - 4.0).abs() < 1e-15);
    }

    #[test]
    fn sample_zero_state() {
        let g = grid2(16);
        let st = State::new(
            VectorField::zeros(&g, FieldKind::Velocity),
            VectorField::zeros(&g, FieldKind::Magnetic),
            0.0,
        )
        .unwrap();
        let criteria = [CriterionSpec::new(CriterionQuantity::GradB3, 4.0, None).unwrap()];
        let rec = sample(&st, &spec_a(), &criteria, DEFAULT_SOBOLEV_ORDER).unwrap();
        assert_eq!(rec.l2_u_sq, 0.0);
        assert_eq!(rec.criterion_samples[0], 0.0);
        assert_eq!(rec.z1_sq, 0.0);
        assert!(rec.finite);
    }

    #[test]
    fn sample_vertical_single_mode() {
        let g = grid2(16);
        let vol = (2.0 * PI).powi(2);
        let b = VectorField::from_fns(&g, FieldKind::Magnetic, |_| 0.0, |_| 0.0, |x| x[0].sin());
        let st = State::new(VectorField::zeros(&g, FieldKind::Velocity), b, 0.0).unwrap();
        let criteria = [
            CriterionSpec::new(CriterionQuantity::GradB3, f64::INFINITY, None).unwrap(),
            CriterionSpec::new(CriterionQuantity::J3, f64::INFINITY, None).unwrap(),
        ];
        let rec = sample(&st, &spec_a(), &criteria, 3).unwrap();
        // |grad b3|_L2 via the h1 monitor
        assert!((rec.h1_b_sq - vol / 2.0).abs() < 1e-12);
        // j3 = d1 b2 - d2 b1 = 0
        assert!(rec.criterion_samples[1].abs() < 1e-13);
        assert!(rec.criterion_samples[0] > 0.0);
    }

    #[test]
    fn bilaplacian_monitor_value() {
        let g = grid2(16);
        let vol = (2.0 * PI).powi(2);
        let u = VectorField::from_fns(&g, FieldKind::Velocity, |_| 0.0, |_| 0.0, |x| {
            (2.0 * x[0]).sin()
        });
        let st = State::new(u, VectorField::zeros(&g, FieldKind::Magnetic), 0.0).unwrap();
        let c = CriterionSpec::new(CriterionQuantity::BilapU3, 4.0, None).unwrap();
        // L2 cross-check of the |k|^4 multiplier through the L4-capable path:
        // compute the L2 norm directly for the exact value 16 sqrt(vol/2)
        let rec = sample(&st, &spec_a(), &[c], 3).unwrap();
        assert!(rec.criterion_samples[0].is_finite());
        let bilap = st.u.component(2).apply_real_symbol(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            k2 * k2
        });
        assert!((bilap.l2_norm() - 16.0 * (vol / 2.0_f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn accumulate_trapezoid() {
        let g = grid2(16);
        let b = random_solenoidal(&g, 4, 3, FieldKind::Magnetic).unwrap();
        let st = State::new(VectorField::zeros(&g, FieldKind::Velocity), b, 0.0).unwrap();
        let criteria = [CriterionSpec::new(CriterionQuantity::GradB3, 4.0, None).unwrap()];
        let r0 = sample(&st, &spec_a(), &criteria, 3).unwrap();
        let mut r1 = r0.clone();
        r1.t = 0.5;
        // constant integrand: integral increases by sample^r * dt
        let acc = accumulate(&r0, &r1).unwrap();
        let f0 = r0.criterion_samples[0].powi(4);
        let expect = 0.5 * f0;
        assert!((acc.criterion_integrals[0] - expect).abs() < 1e-14 * expect.max(1.0));
        // trapezoid is exact on a linear-in-t integrand
        let mut r2 = r0.clone();
        r2.t = 1.0;
        r2.criterion_samples[0] = 3.0 * r0.criterion_samples[0];
        let acc2 = accumulate(&acc, &r2).unwrap();
        let expect2 = expect + 0.5 * (f0 + r2.criterion_samples[0].powi(4)) / 2.0;
        assert!((acc2.criterion_integrals[0] - expect2).abs() < 1e-14 * expect2.max(1.0));

        // non-monotone time is an error
        assert!(accumulate(&r0, &r0.clone()).is_err());
    }

    #[test]
    fn j3_reconstruction_from_z_fields() {
        let g = grid2(32);
        let st = State::new(
            random_solenoidal(&g, 8, 21, FieldKind::Velocity).unwrap(),
            random_solenoidal(&g, 8, 22, FieldKind::Magnetic).unwrap(),
            0.0,
        )
        .unwrap();
        let aux = crate::hall::aux_fields(&st);
        let j3 = curl(&st.b).component(2).clone();
        let curl_omega = curl(&aux.omega);
        let recon = aux.z2.component(2).sub(curl_omega.component(2));
        let rel = j3.sub(&recon).l2_norm() / j3.l2_norm().max(1e-300);
        assert!(rel <= 1e-12, "reconstruction error {rel}");
    }
}
