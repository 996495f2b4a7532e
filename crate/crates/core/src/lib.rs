//! Monte Carlo workbench for the triangular-lattice Rydberg array at half
//! filling and its emergent U(1) gauge description.

pub mod analysis;
pub mod cli;
pub mod ed;
pub mod error;
pub mod gauge;
pub mod io;
pub mod lattice;
pub mod model;
pub mod rk;
pub mod sac;
pub mod sector;
pub mod sse;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::Lattice;
pub use model::{CouplingTable, ModelParams, SpinConfig};
