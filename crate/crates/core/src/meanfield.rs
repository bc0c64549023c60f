//! Discrete Gross-Pitaevskii dynamics of the two-mode condensate.
//!
//! The equations of motion are
//!
//! ```text
//! i hbar dc_L/dt = -(J/2) c_R + (eps_L + U (N-1) |c_L|^2) c_L
//! i hbar dc_R/dt = -(J/2) c_L + (eps_R + U (N-1) |c_R|^2) c_R
//! ```
//!
//! integrated with the classic fixed-step fourth-order Runge-Kutta scheme.
//! Amplitudes are never renormalized; instead the norm and energy drift of
//! every run are measured, and the run is repeated with half the step until
//! both are within tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{meanfield_energy_per_particle, DimerParams};
use crate::series::{TimeSeries, Window};
use crate::state::MeanFieldState;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub const NORM_DRIFT_TOL: f64 = 1e-10;
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;
pub const MAX_HALVINGS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Initial step size, absolute time units.
    pub dt: f64,
    /// Final time, absolute time units.
    pub t_end: f64,
    /// Record every `sample_every`-th step (at the initial step size).
    pub sample_every: usize,
    pub max_halvings: u32,
    pub norm_tol: f64,
    pub energy_tol: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, sample_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            sample_every,
            max_halvings: MAX_HALVINGS,
            norm_tol: NORM_DRIFT_TOL,
            energy_tol: ENERGY_DRIFT_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `dt = 1e-3 t0`, sampling every `t0 / 100`.
    pub fn for_params(params: &DimerParams, t_end: f64) -> Result<Self> {
        Self::new(1e-3 * params.t0(), t_end, 10)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of [`integrate_gpe`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub z: TimeSeries,
    /// Amplitudes at the sample times of `z`.
    pub states: Vec<MeanFieldState>,
    /// Step size actually used.
    pub dt: f64,
    pub halvings: u32,
    /// Maximum of `| |c_L|^2 + |c_R|^2 - 1 |` over all steps.
    pub norm_drift: f64,
    /// Maximum deviation of the energy per particle from its initial value.
    pub energy_drift: f64,
}

/// Time derivatives `(dc_L/dt, dc_R/dt)`.
pub fn gpe_rhs(state: &MeanFieldState, params: &DimerParams) -> (Complex64, Complex64) {
    let [dl, dr] = rhs([state.c_l(), state.c_r()], params);
    (dl, dr)
}

#[inline]
fn rhs(c: [Complex64; 2], p: &DimerParams) -> [Complex64; 2] {
    let g = p.interaction();
    let half_j = 0.5 * p.j();
    let scale = -I / p.hbar();
    let hl = -half_j * c[1] + (p.eps_l() + g * c[0].norm_sqr()) * c[0];
    let hr = -half_j * c[0] + (p.eps_r() + g * c[1].norm_sqr()) * c[1];
    [scale * hl, scale * hr]
}

#[inline]
fn rk4_step(c: [Complex64; 2], h: f64, p: &DimerParams) -> [Complex64; 2] {
    let add = |a: [Complex64; 2], k: [Complex64; 2], s: f64| [a[0] + k[0] * s, a[1] + k[1] * s];
    let k1 = rhs(c, p);
    let k2 = rhs(add(c, k1, 0.5 * h), p);
    let k3 = rhs(add(c, k2, 0.5 * h), p);
    let k4 = rhs(add(c, k3, h), p);
    let w = h / 6.0;
    [
        c[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * w,
        c[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * w,
    ]
}

struct Run {
    states: Vec<MeanFieldState>,
    dt: f64,
    sample_dt: f64,
    norm_drift: f64,
    energy_drift: f64,
}

fn run_fixed(
    initial: &MeanFieldState,
    params: &DimerParams,
    steps: usize,
    sample_every: usize,
    t_end: f64,
) -> Run {
    let h = t_end / steps as f64;
    let e0 = meanfield_energy_per_particle(initial, params);
    let n0 = initial.norm_sqr();
    let mut c = [initial.c_l(), initial.c_r()];
    let mut states = Vec::with_capacity(steps / sample_every + 1);
    states.push(*initial);
    let (mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64);
    for k in 1..=steps {
        c = rk4_step(c, h, params);
        let s = MeanFieldState::from_raw(c[0], c[1]);
        norm_drift = norm_drift.max((s.norm_sqr() - n0).abs());
        energy_drift = energy_drift.max((meanfield_energy_per_particle(&s, params) - e0).abs());
        if k % sample_every == 0 {
            states.push(s);
        }
    }
    Run {
        states,
        dt: h,
        sample_dt: h * sample_every as f64,
        norm_drift,
        energy_drift,
    }
}

/// Integrates the Gross-Pitaevskii equations from `initial` to `cfg.t_end`.
///
/// The step is fitted so that `t_end` is an integer number of steps. When the
/// norm or energy drift exceeds its tolerance, the step is halved and the run
/// repeated, up to `cfg.max_halvings` times; the sampling times stay the same.
pub fn integrate_gpe(
    initial: &MeanFieldState,
    params: &DimerParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let base_steps = {
        let raw = (cfg.t_end / cfg.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        // keep the final time on the sampling grid
        raw.div_ceil(cfg.sample_every) * cfg.sample_every
    };
    let mut halvings = 0;
    loop {
        let factor = 1usize << halvings;
        let run = run_fixed(
            initial,
            params,
            base_steps * factor,
            cfg.sample_every * factor,
            cfg.t_end,
        );
        let ok = run.norm_drift < cfg.norm_tol && run.energy_drift < cfg.energy_tol;
        if ok {
            let z = run.states.iter().map(|s| s.z()).collect();
            return Ok(Trajectory {
                z: TimeSeries::new(0.0, run.sample_dt, z)?,
                states: run.states,
                dt: run.dt,
                halvings,
                norm_drift: run.norm_drift,
                energy_drift: run.energy_drift,
            });
        }
        if halvings >= cfg.max_halvings {
            return Err(Error::IntegrationAccuracy {
                halvings,
                dt: run.dt,
                norm_drift: run.norm_drift,
                energy_drift: run.energy_drift,
            });
        }
        halvings += 1;
    }
}

/// Closed-form right-well amplitude of the noninteracting dimer started in
/// the left well:
///
/// `c_R(t) = i J / W exp(-i (eps_L + eps_R) t / 2 hbar) sin(W t / 2 hbar)`,
/// `W = sqrt(J^2 + (eps_R - eps_L)^2)`. `U` is ignored.
pub fn rabi_amplitude(t: f64, params: &DimerParams) -> Complex64 {
    let j = params.j();
    let w = j.hypot(params.detuning());
    let hbar = params.hbar();
    let phase = Complex64::from_polar(1.0, -(params.eps_l() + params.eps_r()) * t / (2.0 * hbar));
    I * phase * (j / w) * (w * t / (2.0 * hbar)).sin()
}

/// Time-averaged imbalance of the mean-field dynamics started with all
/// particles in the left well, averaged over `window`.
///
/// The run extends to `window.end`; `cfg.t_end` is ignored.
pub fn meanfield_zbar(params: &DimerParams, window: Window, cfg: &IntegratorConfig) -> Result<f64> {
    let cfg = IntegratorConfig {
        t_end: window.end,
        ..*cfg
    };
    let traj = integrate_gpe(&MeanFieldState::all_left(), params, &cfg)?;
    traj.z.time_average(window)
}
