//! Bosonic Josephson junction (two-site Bose-Hubbard dimer): mean-field and
//! exact many-body dynamics, fluctuation-averaged self-trapping estimates and
//! parameter sweeps comparing them.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exact;
pub mod heuristics;
pub mod meanfield;
pub mod params;
pub mod series;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use exact::{build_hamiltonian, exact_zbar, FockHamiltonian, SpectralPropagator};
pub use heuristics::{
    lambda_critical, zbar_closed_form, zbar_closed_form_corrected, zbar_fluct, zbar_mc_average,
    zbar_meanfield_closed, FarTail,
};
pub use meanfield::{integrate_gpe, meanfield_zbar, IntegratorConfig, Trajectory};
pub use params::DimerParams;
pub use series::{TimeGrid, TimeSeries, Window};
pub use state::{FockVector, MeanFieldState};
pub use sweep::{run_sweep, Method, SweepConfig, SweepResult};
