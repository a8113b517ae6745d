//! Pseudo-spectral simulation of the perturbation equations on the periodic
//! channel `(0, alpha) x (0, 1)`.
//!
//! The horizontal velocity `v` is expanded in `cos(n pi z)` and the
//! temperature perturbation `theta` in `sin(n pi z)`, which encodes the
//! boundary conditions exactly. The pressure gradient only enforces a zero
//! vertical mean of `v` and is replaced by the projection
//! [`project_vertical_mean`].

pub mod checkpoint;
pub mod diagnostics;
pub mod solver;
pub mod state;
pub mod transform;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, History};
pub use diagnostics::{decay_rate_fit, write_series_csv, DecayFit, Diagnostics, SERIES_COLUMNS};
pub use solver::{
    cfl_limit, coupling_tendency, init_from_eigenmode, init_random, nonlinear_tendency, project_vertical_mean,
    vertical_velocity, Simulation, SolverConfig, BLOW_UP_NORM,
};
pub use state::{Parity, SpectralState, C64};
pub use transform::Transform;
