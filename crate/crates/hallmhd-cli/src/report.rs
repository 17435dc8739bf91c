//! CSV report formats. Numeric fields are printed with 17 significant
//! digits so reruns of the same configuration are byte-identical.

use hallmhd::diag::{CriterionSpec, DiagnosticsRecord};
use hallmhd::hall::{AuxFields, GroupedReport3D, HallBreakdown2D, HallBreakdown3D};
use hallmhd::verify::IdentityRow;
use hallmhd::SystemSpec;
use std::fmt::Write as _;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub const VERIFY_HEADER: &str = "suite,identity,seed,value,normalizer,tolerance,pass";

pub fn verify_csv(rows: &[IdentityRow]) -> String {
    let mut out = String::new();
    out.push_str(VERIFY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.suite,
            r.identity,
            r.seed,
            fmt(r.value),
            fmt(r.normalizer),
            fmt(r.tolerance),
            r.pass
        )
        .unwrap();
    }
    out
}

fn criterion_tag(c: &CriterionSpec) -> String {
    let p = if c.p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{}", c.p)
    };
    format!("{}_p{}", c.quantity.tag(), p)
}

/// Header block of the time-series CSV: version line, system parameters,
/// and the column row. `proxy_linf_*` columns stand in for BMO norms
/// (only the `L^inf`-controls-BMO direction holds; they are proxies, not
/// BMO values).
pub fn timeseries_header(spec: &SystemSpec, criteria: &[CriterionSpec]) -> String {
    let mut out = String::new();
    out.push_str("# hallmhd timeseries v1\n");
    writeln!(
        out,
        "# system {} nu={} eta_h={} eta_v={} epsilon={}",
        spec.kind.tag(),
        fmt(spec.nu),
        fmt(spec.eta_h),
        fmt(spec.eta_v),
        fmt(spec.epsilon)
    )
    .unwrap();
    out.push_str("# proxy_linf_{u,grad_b,j} are L-infinity proxies for BMO-normed quantities\n");
    out.push_str(
        "step,t,dt,l2_u_sq,l2_b_sq,h1_u_sq,h1_b_sq,hm_u_sq,hm_b_sq,energy_defect,\
         dissipation_integral,div_defect,z1_sq,z2_sq,curl_omega_1_sq,curl_omega_2_sq,\
         curl_omega_3_sq,proxy_linf_u,proxy_linf_grad_b,proxy_linf_j",
    );
    for c in criteria {
        let tag = criterion_tag(c);
        write!(out, ",{tag}_sample,{tag}_integral").unwrap();
    }
    out.push('\n');
    out
}

pub fn timeseries_row(
    step: usize,
    dt: f64,
    div_defect: f64,
    rec: &DiagnosticsRecord,
) -> String {
    let mut out = String::new();
    write!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        step,
        fmt(rec.t),
        fmt(dt),
        fmt(rec.l2_u_sq),
        fmt(rec.l2_b_sq),
        fmt(rec.h1_u_sq),
        fmt(rec.h1_b_sq),
        fmt(rec.hm_u_sq),
        fmt(rec.hm_b_sq),
        fmt(rec.energy_defect),
        fmt(rec.dissipation_integral),
        fmt(div_defect),
        fmt(rec.z1_sq),
        fmt(rec.z2_sq),
        fmt(rec.curl_omega_sq[0]),
        fmt(rec.curl_omega_sq[1]),
        fmt(rec.curl_omega_sq[2]),
        fmt(rec.proxy_linf_u),
        fmt(rec.proxy_linf_grad_b),
        fmt(rec.proxy_linf_j),
    )
    .unwrap();
    for (s, i) in rec.criterion_samples.iter().zip(&rec.criterion_integrals) {
        write!(out, ",{},{}", fmt(*s), fmt(*i)).unwrap();
    }
    out.push('\n');
    out
}

pub fn hall2d_csv(d: &HallBreakdown2D) -> String {
    let mut out = String::from("quantity,value\n");
    for (i, v) in d.i51.iter().enumerate() {
        writeln!(out, "i5_1_{},{}", i + 1, fmt(*v)).unwrap();
    }
    for (i, v) in d.i52.iter().enumerate() {
        writeln!(out, "i5_2_{},{}", i + 1, fmt(*v)).unwrap();
    }
    writeln!(out, "sum,{}", fmt(d.sum())).unwrap();
    writeln!(out, "direct,{}", fmt(d.i5_direct)).unwrap();
    out
}

pub fn hall3d_csv(d: &HallBreakdown3D, grouped: &GroupedReport3D) -> String {
    let mut out = String::from("quantity,value\n");
    for k in 0..3 {
        for (i, v) in d.v[k].iter().enumerate() {
            writeln!(out, "v_{}_{},{}", k + 1, i + 1, fmt(*v)).unwrap();
        }
    }
    for (name, table) in [("vi", &d.vi), ("vii", &d.vii), ("viii", &d.viii)] {
        for k in 0..3 {
            for (l, v) in table[k].iter().enumerate() {
                writeln!(out, "{}_{}_{},{}", name, k + 1, l + 1, fmt(*v)).unwrap();
            }
        }
    }
    writeln!(out, "sum,{}", fmt(d.sum_v())).unwrap();
    writeln!(out, "direct,{}", fmt(d.direct)).unwrap();
    for check in &grouped.checks {
        writeln!(out, "{}_lhs,{}", check.name, fmt(check.lhs)).unwrap();
        writeln!(out, "{}_rhs,{}", check.name, fmt(check.rhs)).unwrap();
    }
    writeln!(out, "witness,{}", fmt(grouped.witness)).unwrap();
    out
}

pub fn aux_csv(aux: &AuxFields, j3_defect: f64) -> String {
    let mut out = String::from("quantity,value\n");
    writeln!(out, "omega_l2_sq,{}", fmt(aux.omega.l2_norm().powi(2))).unwrap();
    writeln!(out, "z1_l2_sq,{}", fmt(aux.z1.l2_norm().powi(2))).unwrap();
    writeln!(out, "z2_l2_sq,{}", fmt(aux.z2.l2_norm().powi(2))).unwrap();
    writeln!(out, "j3_reconstruction_defect,{}", fmt(j3_defect)).unwrap();
    out
}

pub fn sample_csv(rec: &DiagnosticsRecord, criteria: &[CriterionSpec]) -> String {
    let mut out = String::from("quantity,value\n");
    let scalars = [
        ("t", rec.t),
        ("l2_u_sq", rec.l2_u_sq),
        ("l2_b_sq", rec.l2_b_sq),
        ("h1_u_sq", rec.h1_u_sq),
        ("h1_b_sq", rec.h1_b_sq),
        ("hm_u_sq", rec.hm_u_sq),
        ("hm_b_sq", rec.hm_b_sq),
        ("z1_sq", rec.z1_sq),
        ("z2_sq", rec.z2_sq),
        ("curl_omega_1_sq", rec.curl_omega_sq[0]),
        ("curl_omega_2_sq", rec.curl_omega_sq[1]),
        ("curl_omega_3_sq", rec.curl_omega_sq[2]),
        ("proxy_linf_u", rec.proxy_linf_u),
        ("proxy_linf_grad_b", rec.proxy_linf_grad_b),
        ("proxy_linf_j", rec.proxy_linf_j),
    ];
    for (name, v) in scalars {
        writeln!(out, "{name},{}", fmt(v)).unwrap();
    }
    for (c, s) in criteria.iter().zip(&rec.criterion_samples) {
        writeln!(out, "{}_sample,{}", criterion_tag(c), fmt(*s)).unwrap();
    }
    out
}
