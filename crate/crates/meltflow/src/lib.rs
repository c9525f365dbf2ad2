//! Desk-scale simulator for anisothermal incompressible two-phase flow with
//! evaporative phase change and laser-driven melt-pool dynamics.
//!
//! The solver combines a conservative tanh level-set representation of the
//! liquid--gas interface with a fractional-step incompressible Navier--Stokes
//! scheme on a uniform collocated Cartesian grid (1D and 2D). Evaporation is
//! modeled with regularized interface source terms: a dilation rate in the
//! continuity equation, evaporative cooling in the energy equation, surface
//! tension with Marangoni stresses, and a hybrid recoil pressure force that
//! tops up the dilation-induced pressure jump to the Anisimov value. Three-phase
//! (solid/liquid/gas) states are handled through a temperature-based solid
//! fraction with Darcy damping of the solid.
//!
//! Entry points:
//! - [`scenarios`] builds and runs the bundled benchmark cases,
//! - [`sim::Simulation`] is the generic time-stepping loop,
//! - [`config`] parses the flat key-value configuration format used by the CLI.

// pub mod config;
pub mod error;
pub mod evaporation;
pub mod flow;
pub mod grid;
pub mod levelset;
pub mod linalg;
pub mod materials;
// pub mod output;
// pub mod scenarios;
// pub mod sim;
pub mod transport;

pub use error::Error;

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
