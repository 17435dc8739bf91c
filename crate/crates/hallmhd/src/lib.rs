//! Pseudo-spectral solver and identity-verification harness for the
//! two-and-a-half dimensional and 3-D Hall-magnetohydrodynamics systems on
//! the periodic torus.
//!
//! The crate has two faces. The solver side assembles the right-hand sides
//! of four incompressible Hall-MHD variants (classical, hyper-resistive,
//! and two with anisotropic fractional magnetic diffusion) and advances
//! them with an integrating-factor RK4 scheme whose diagonal diffusion is
//! treated exactly. The verification side evaluates, by spectrally exact
//! quadrature, the energy identities, Hall-term decompositions, and
//! cancellation identities that those systems satisfy, so each one can be
//! checked to near machine precision on seeded random divergence-free
//! fields.

pub mod diag;
pub mod error;
pub mod fields;
pub mod hall;
pub mod rhs;
pub mod spectral;
pub mod stepper;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{
    cross, curl, divergence, dot, gradient, inner, leray_project, random_solenoidal,
    random_vector, split_hv, FieldKind, FieldSplit, VectorField,
};
pub use rhs::{advect, energy_flux_hall, hall_term, rhs, HallForm, State, SystemKind, SystemSpec};
pub use spectral::{l2_inner, multiply, Axis, Grid, ScalarField, DEALIAS_PADDING};
