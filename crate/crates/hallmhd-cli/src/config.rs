//! Declarative run configuration: a single TOML file with `key = value`
//! sections. Parse errors carry line/column anchors from the TOML reader;
//! semantic errors name the offending section and key. Only the output
//! directory may be overridden outside the file.

use anyhow::{anyhow, bail, Context, Result};
use hallmhd::diag::{CriterionQuantity, CriterionSpec};
use hallmhd::stepper::StepperConfig;
use hallmhd::{
    random_solenoidal, FieldKind, Grid, State, SystemKind, SystemSpec, VectorField,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: SystemSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub stepper: StepperSection,
    pub output: OutputSection,
    #[serde(default)]
    pub criteria: Vec<CriterionSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// System tag: "A" (classical), "B" (hyper-resistive), "C"
    /// (anisotropic 2.5-D), "D" (anisotropic 3-D).
    pub kind: String,
    #[serde(default = "one")]
    pub nu: f64,
    /// Isotropic diffusivity; systems A and B only.
    pub eta: Option<f64>,
    /// Anisotropic diffusivities; systems C and D only.
    pub eta_h: Option<f64>,
    pub eta_v: Option<f64>,
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "random", "profile", or "snapshot".
    pub kind: String,
    pub seed: Option<u64>,
    pub band_limit: Option<usize>,
    /// Named analytic profile for kind = "profile".
    pub name: Option<String>,
    /// Snapshot path for kind = "snapshot".
    pub path: Option<PathBuf>,
    /// Plain amplitude factor.
    pub amplitude: Option<f64>,
    /// Rescale so that |u|_H1 + |b|_H1 equals this value.
    pub h1_norm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub dt: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub adapt: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_max_steps() -> usize {
    1_000_000
}

fn default_guard() -> f64 {
    1e8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

fn default_cadence() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    pub quantity: String,
    pub p: f64,
    pub r: Option<f64>,
}

/// Fully validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub spec: SystemSpec,
    pub grid: Arc<Grid>,
    pub initial: InitialData,
    pub stepper: StepperConfig,
    pub out_dir: PathBuf,
    pub cadence: usize,
    pub criteria: Vec<CriterionSpec>,
}

#[derive(Debug)]
pub enum InitialData {
    Random {
        seed: u64,
        band_limit: usize,
        amplitude: f64,
        h1_norm: Option<f64>,
    },
    Profile {
        name: String,
        amplitude: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

pub fn parse(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let kind = SystemKind::from_tag(&raw.system.kind)
        .map_err(|_| anyhow!("system.kind: expected one of A, B, C, D, got {:?}", raw.system.kind))?;
    let s = &raw.system;
    let spec = match kind {
        SystemKind::ClassicalHall2p5d | SystemKind::HyperResistive2p5d => {
            if s.eta_h.is_some() || s.eta_v.is_some() {
                bail!("system.eta_h/eta_v: not accepted for system {}; use eta", s.kind);
            }
            let eta = s
                .eta
                .ok_or_else(|| anyhow!("system.eta: required for system {}", s.kind))?;
            if kind == SystemKind::ClassicalHall2p5d {
                SystemSpec::classical(s.nu, eta, s.epsilon)?
            } else {
                SystemSpec::hyper_resistive(s.nu, eta, s.epsilon)?
            }
        }
        SystemKind::AnisoHyper2p5d | SystemKind::AnisoHyper3d => {
            if s.eta.is_some() {
                bail!("system.eta: not accepted for system {}; use eta_h and eta_v", s.kind);
            }
            let eta_h = s
                .eta_h
                .ok_or_else(|| anyhow!("system.eta_h: required for system {}", s.kind))?;
            let eta_v = s
                .eta_v
                .ok_or_else(|| anyhow!("system.eta_v: required for system {}", s.kind))?;
            if kind == SystemKind::AnisoHyper2p5d {
                SystemSpec::aniso_2p5d(s.nu, eta_h, eta_v, s.epsilon)?
            } else {
                SystemSpec::aniso_3d(s.nu, eta_h, eta_v, s.epsilon)?
            }
        }
    };

    if raw.grid.dim != kind.dim() {
        bail!(
            "grid.dim: system {} is {}-dimensional but grid.dim = {}",
            s.kind,
            kind.dim(),
            raw.grid.dim
        );
    }
    let grid = Grid::new(raw.grid.dim, raw.grid.n)?;

    let init = &raw.initial;
    let initial = match init.kind.as_str() {
        "random" => {
            let band_limit = init
                .band_limit
                .ok_or_else(|| anyhow!("initial.band_limit: required for random data"))?;
            if init.name.is_some() || init.path.is_some() {
                bail!("initial: name/path are not accepted for random data");
            }
            InitialData::Random {
                seed: init.seed.unwrap_or(0),
                band_limit,
                amplitude: init.amplitude.unwrap_or(1.0),
                h1_norm: init.h1_norm,
            }
        }
        "profile" => {
            let name = init
                .name
                .clone()
                .ok_or_else(|| anyhow!("initial.name: required for profile data"))?;
            if init.seed.is_some() || init.band_limit.is_some() || init.path.is_some() {
                bail!("initial: seed/band_limit/path are not accepted for profile data");
            }
            InitialData::Profile {
                name,
                amplitude: init.amplitude.unwrap_or(1.0),
            }
        }
        "snapshot" => {
            let path = init
                .path
                .clone()
                .ok_or_else(|| anyhow!("initial.path: required for snapshot data"))?;
            if init.seed.is_some() || init.band_limit.is_some() || init.name.is_some() {
                bail!("initial: seed/band_limit/name are not accepted for snapshot data");
            }
            InitialData::Snapshot { path }
        }
        other => bail!("initial.kind: expected random, profile, or snapshot, got {other:?}"),
    };

    let mut stepper = StepperConfig::new(raw.stepper.dt, raw.stepper.t_end)
        .map_err(|e| anyhow!("stepper: {e}"))?;
    stepper.cfl = raw.stepper.cfl;
    stepper.adapt = raw.stepper.adapt;
    stepper.max_steps = raw.stepper.max_steps;
    stepper.blowup_guard = raw.stepper.blowup_guard;
    stepper.validate().map_err(|e| anyhow!("stepper: {e}"))?;

    if raw.output.cadence == 0 {
        bail!("output.cadence: must be at least 1");
    }

    let mut criteria = Vec::with_capacity(raw.criteria.len());
    for (i, c) in raw.criteria.iter().enumerate() {
        let quantity = CriterionQuantity::from_tag(&c.quantity)
            .map_err(|e| anyhow!("criteria[{i}].quantity: {e}"))?;
        criteria.push(
            CriterionSpec::new(quantity, c.p, c.r).map_err(|e| anyhow!("criteria[{i}]: {e}"))?,
        );
    }

    Ok(RunConfig {
        spec,
        grid,
        initial,
        stepper,
        out_dir: raw.output.dir,
        cadence: raw.output.cadence,
        criteria,
    })
}

/// Named analytic initial profiles (divergence-free by construction).
pub fn profile_state(grid: &Arc<Grid>, name: &str, amplitude: f64) -> Result<State> {
    let a = amplitude;
    let (u, b) = match (name, grid.dim()) {
        ("orszag_tang", 2) => {
            let u = VectorField::from_fns(
                grid,
                FieldKind::Velocity,
                move |x| -a * x[1].sin(),
                move |x| a * x[0].sin(),
                move |x| a * (x[0] + x[1]).sin(),
            );
            let b = VectorField::from_fns(
                grid,
                FieldKind::Magnetic,
                move |x| -a * x[1].sin(),
                move |x| a * (2.0 * x[0]).sin(),
                move |x| a * (x[0] + x[1]).cos(),
            );
            (u, b)
        }
        ("taylor_green", 2) => {
            let u = VectorField::from_fns(
                grid,
                FieldKind::Velocity,
                move |x| a * x[0].sin() * x[1].cos(),
                move |x| -a * x[0].cos() * x[1].sin(),
                move |x| a * x[0].sin() * x[1].sin(),
            );
            let b = VectorField::from_fns(
                grid,
                FieldKind::Magnetic,
                move |x| a * x[1].sin(),
                move |x| a * x[0].sin(),
                move |x| a * x[0].cos() * x[1].cos(),
            );
            (u, b)
        }
        ("taylor_green", 3) => {
            let u = VectorField::from_fns(
                grid,
                FieldKind::Velocity,
                move |x| a * x[0].sin() * x[1].cos() * x[2].cos(),
                move |x| -a * x[0].cos() * x[1].sin() * x[2].cos(),
                |_| 0.0,
            );
            let b = VectorField::from_fns(
                grid,
                FieldKind::Magnetic,
                move |x| a * x[1].cos() * x[2].sin(),
                move |x| a * x[0].sin() * x[2].cos(),
                move |x| a * x[0].cos() * x[1].sin(),
            );
            (u, b)
        }
        (name, dim) => bail!("unknown profile {name:?} for a {dim}-D grid"),
    };
    Ok(State::new(u, b, 0.0)?)
}

/// Materialise the configured initial state.
pub fn build_initial(cfg: &RunConfig) -> Result<State> {
    let state = match &cfg.initial {
        InitialData::Random {
            seed,
            band_limit,
            amplitude,
            h1_norm,
        } => {
            let u = random_solenoidal(&cfg.grid, *band_limit, *seed, FieldKind::Velocity)?;
            let b = random_solenoidal(
                &cfg.grid,
                *band_limit,
                seed.wrapping_add(5000),
                FieldKind::Magnetic,
            )?;
            let scale = match h1_norm {
                Some(target) => {
                    let h1 = |v: &VectorField| {
                        (v.l2_norm().powi(2) + v.sobolev_seminorm(1.0).powi(2)).sqrt()
                    };
                    *amplitude * target / (h1(&u) + h1(&b))
                }
                None => *amplitude,
            };
            State::new(u.scaled(scale), b.scaled(scale), 0.0)?
        }
        InitialData::Profile { name, amplitude } => profile_state(&cfg.grid, name, *amplitude)?,
        InitialData::Snapshot { path } => {
            let snap = crate::snapshot::read(path)?;
            if !snap.state.grid().same_as(&cfg.grid) {
                bail!(
                    "snapshot grid ({}-D, n={}) does not match config grid ({}-D, n={})",
                    snap.state.grid().dim(),
                    snap.state.grid().n(),
                    cfg.grid.dim(),
                    cfg.grid.n()
                );
            }
            snap.state
        }
    };
    let defect = state.solenoidal_defect();
    if defect > 1e-8 {
        bail!("initial data is not divergence-free (relative defect {defect:.3e})");
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_cfg(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("run.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    const GOOD: &str = r#"
[system]
kind = "C"
nu = 1.0
eta_h = 1.0
eta_v = 1.0
epsilon = 1.0

[grid]
dim = 2
n = 16

[initial]
kind = "random"
seed = 3
band_limit = 4
h1_norm = 1.0

[stepper]
dt = 0.01
t_end = 0.02

[output]
dir = "out"

[[criteria]]
quantity = "grad_b3"
p = 4.0
"#;

    #[test]
    fn parses_and_builds() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse(&write_cfg(dir.path(), GOOD)).unwrap();
        assert_eq!(cfg.spec.kind, SystemKind::AnisoHyper2p5d);
        assert_eq!(cfg.criteria.len(), 1);
        let state = build_initial(&cfg).unwrap();
        let h1 = |v: &VectorField| (v.l2_norm().powi(2) + v.sobolev_seminorm(1.0).powi(2)).sqrt();
        assert!((h1(&state.u) + h1(&state.b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_inconsistent_parameters() {
        let dir = tempfile::tempdir().unwrap();
        // eta on an anisotropic system
        let bad = GOOD.replace("eta_h = 1.0", "eta = 1.0");
        let err = parse(&write_cfg(dir.path(), &bad)).unwrap_err().to_string();
        assert!(err.contains("eta"), "{err}");
        // dim mismatch
        let bad = GOOD.replace("dim = 2", "dim = 3");
        let err = parse(&write_cfg(dir.path(), &bad)).unwrap_err().to_string();
        assert!(err.contains("grid.dim"), "{err}");
        // unknown key gets a line-anchored TOML error
        let bad = format!("{GOOD}\n[extra]\nx = 1\n");
        let err = parse(&write_cfg(dir.path(), &bad)).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn profiles_are_divergence_free() {
        for (name, dim) in [("orszag_tang", 2), ("taylor_green", 2), ("taylor_green", 3)] {
            let grid = Grid::new(dim, 16).unwrap();
            let st = profile_state(&grid, name, 0.8).unwrap();
            assert!(st.solenoidal_defect() < 1e-13, "{name} {dim}-D");
        }
        let grid = Grid::new(3, 16).unwrap();
        assert!(profile_state(&grid, "orszag_tang", 1.0).is_err());
    }
}
