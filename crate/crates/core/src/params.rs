//! Physical configuration of the two-site Bose-Hubbard model and the
//! observables shared by the mean-field and many-body engines.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::MeanFieldState;

/// Particle number used when only the product `U (N - 1)` matters, i.e. for
/// the Gross-Pitaevskii equations and the closed-form mean-field results.
pub const MEAN_FIELD_N: u64 = 2;

/// Tunneling rate `J`, on-site interaction `U`, particle number `N`,
/// on-site energies and `hbar`.
///
/// All energies share one unit; times are measured in units of
/// `hbar / [energy]`. With the defaults `J = hbar = 1` the Rabi period
/// [`DimerParams::t0`] is `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerParams {
    j: f64,
    u: f64,
    n: u64,
    eps_l: f64,
    eps_r: f64,
    hbar: f64,
}

impl DimerParams {
    /// Symmetric double well (`eps_L = eps_R = 0`) with `hbar = 1`.
    pub fn new(j: f64, u: f64, n: u64) -> Result<Self> {
        Self::with_all(j, u, n, 0.0, 0.0, 1.0)
    }

    pub fn with_all(j: f64, u: f64, n: u64, eps_l: f64, eps_r: f64, hbar: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(j.is_finite() && j > 0.0) {
            problems.push(format!("J must be positive (got {j})"));
        }
        if !u.is_finite() {
            problems.push(format!("U must be finite (got {u})"));
        }
        if n < 1 {
            problems.push("N must be at least 1".to_string());
        }
        if !(eps_l.is_finite() && eps_r.is_finite()) {
            problems.push("on-site energies must be finite".to_string());
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            problems.push(format!("hbar must be positive (got {hbar})"));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidParameter(problems.join("; ")));
        }
        Ok(Self {
            j,
            u,
            n,
            eps_l,
            eps_r,
            hbar,
        })
    }

    /// Parameters with the interaction chosen so that `lambda() == lambda`
    /// (up to rounding): `U = lambda J / (N - 1)`.
    pub fn from_lambda(lambda: f64, n: u64, j: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite (got {lambda})"
            )));
        }
        if n < 2 {
            if lambda == 0.0 {
                return Self::new(j, 0.0, n.max(1));
            }
            return Err(Error::InvalidParameter(
                "a non-zero lambda needs N >= 2 (lambda = U (N - 1) / J)".to_string(),
            ));
        }
        Self::new(j, lambda * j / (n - 1) as f64, n)
    }

    /// Mean-field parameters for a given scaled interaction; `N` is a
    /// placeholder since only `U (N - 1)` enters.
    pub fn mean_field(lambda: f64) -> Result<Self> {
        Self::from_lambda(lambda, MEAN_FIELD_N, 1.0)
    }

    pub fn with_onsite(self, eps_l: f64, eps_r: f64) -> Result<Self> {
        Self::with_all(self.j, self.u, self.n, eps_l, eps_r, self.hbar)
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::with_all(self.j, self.u, self.n, self.eps_l, self.eps_r, hbar)
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn eps_l(&self) -> f64 {
        self.eps_l
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Detuning `eps_R - eps_L`.
    pub fn detuning(&self) -> f64 {
        self.eps_r - self.eps_l
    }

    /// Mean-field nonlinearity `U (N - 1)`.
    pub fn interaction(&self) -> f64 {
        self.u * (self.n - 1) as f64
    }

    /// Scaled interaction `U (N - 1) / J`.
    pub fn lambda(&self) -> f64 {
        self.interaction() / self.j
    }

    /// Rabi period of the noninteracting symmetric dimer, `2 pi hbar / J`.
    pub fn t0(&self) -> f64 {
        2.0 * PI * self.hbar / self.j
    }
}

/// Classical energy per particle of a mean-field state.
pub fn meanfield_energy_per_particle(state: &MeanFieldState, params: &DimerParams) -> f64 {
    let (cl, cr) = (state.c_l(), state.c_r());
    let hop = 2.0 * (cl.conj() * cr).re;
    let (pl, pr) = (cl.norm_sqr(), cr.norm_sqr());
    -0.5 * params.j * hop
        + 0.5 * params.interaction() * (pl * pl + pr * pr)
        + params.eps_l * pl
        + params.eps_r * pr
}
