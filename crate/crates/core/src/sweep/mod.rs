//! Interaction and particle-number sweeps over all engines, comparison of
//! their results and persistence of the datasets.

pub mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{build_hamiltonian, exact_zbar, SpectralPropagator};
use crate::heuristics::{
    zbar_closed_form, zbar_closed_form_corrected, zbar_mc_average, zbar_meanfield_closed, FarTail,
};
use crate::meanfield::{integrate_gpe, meanfield_zbar, IntegratorConfig};
use crate::params::DimerParams;
use crate::series::{TimeGrid, TimeSeries, Window};
use crate::state::{FockVector, MeanFieldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MeanfieldNumeric,
    MeanfieldClosed,
    ExactQuantum,
    SemiclassicalClosed,
    SemiclassicalMc,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::MeanfieldNumeric,
        Method::MeanfieldClosed,
        Method::ExactQuantum,
        Method::SemiclassicalClosed,
        Method::SemiclassicalMc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MeanfieldNumeric => "meanfield-numeric",
            Method::MeanfieldClosed => "meanfield-closed",
            Method::ExactQuantum => "exact-quantum",
            Method::SemiclassicalClosed => "semiclassical-closed",
            Method::SemiclassicalMc => "semiclassical-mc",
        }
    }

    /// Whether the method depends on the particle number.
    pub fn needs_n(&self) -> bool {
        !matches!(self, Method::MeanfieldNumeric | Method::MeanfieldClosed)
    }

    /// Closed forms are drawn as lines, everything else as points.
    pub fn is_closed_form(&self) -> bool {
        matches!(self, Method::MeanfieldClosed | Method::SemiclassicalClosed)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "unknown method '{s}' (expected one of {})",
                    Method::ALL.map(|m| m.as_str()).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub name: String,
    pub lambda_grid: Vec<f64>,
    /// Particle numbers for the N-dependent methods.
    pub n_list: Vec<u64>,
    /// Averaging window in units of `t0`.
    pub window: (f64, f64),
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Monte-Carlo samples per cell.
    pub samples: usize,
    /// Mean-field integration step in units of `t0`.
    pub dt: f64,
    /// Sampling step of `z(t)` in units of `t0`.
    pub dt_sample: f64,
    pub tail: FarTail,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            name: "sweep".into(),
            lambda_grid: Vec::new(),
            n_list: Vec::new(),
            window: (0.0, 100.0),
            methods: vec![Method::MeanfieldNumeric, Method::MeanfieldClosed],
            seed: 1,
            samples: 1_000_000,
            dt: 1e-3,
            dt_sample: 1e-2,
            tail: FarTail::Neglect,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.lambda_grid.is_empty() {
            problems.push("lambda grid is empty".to_string());
        }
        if self.lambda_grid.iter().any(|l| !l.is_finite()) {
            problems.push("lambda grid contains non-finite values".to_string());
        }
        if self.lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
            problems.push("lambda grid must be strictly increasing".to_string());
        }
        let (a, b) = self.window;
        if !(a >= 0.0 && b > a && b.is_finite()) {
            problems.push(format!("window must satisfy 0 <= start < end, got [{a}, {b}]"));
        }
        if self.methods.is_empty() {
            problems.push("no methods requested".to_string());
        }
        if self.methods.iter().any(|m| m.needs_n()) && self.n_list.is_empty() {
            let names: Vec<_> = self.methods.iter().filter(|m| m.needs_n()).map(|m| m.as_str()).collect();
            problems.push(format!("{} need a particle number list", names.join(", ")));
        }
        if self.n_list.iter().any(|&n| n < 1) {
            problems.push("particle numbers must be >= 1".to_string());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.dt_sample > 0.0 && self.dt_sample.is_finite()) {
            problems.push(format!("dt_sample must be positive, got {}", self.dt_sample));
        }
        if self.methods.contains(&Method::SemiclassicalMc) && self.samples < crate::heuristics::MIN_MC_SAMPLES {
            problems.push(format!(
                "samples must be >= {}, got {}",
                crate::heuristics::MIN_MC_SAMPLES,
                self.samples
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems.join("; ")))
        }
    }

    /// `(lambda, N, method)` for every requested cell, grouped by method and
    /// particle number with `lambda` innermost.
    pub fn cells(&self) -> Vec<(f64, Option<u64>, Method)> {
        let mut out = Vec::new();
        for &m in &self.methods {
            let ns: Vec<Option<u64>> = if m.needs_n() {
                self.n_list.iter().map(|&n| Some(n)).collect()
            } else {
                vec![None]
            };
            for n in ns {
                out.extend(self.lambda_grid.iter().map(|&l| (l, n, m)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellValue {
    pub zbar: f64,
    /// Standard error, for sampled estimates.
    pub err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub lambda: f64,
    pub n: Option<u64>,
    pub method: Method,
    pub outcome: std::result::Result<CellValue, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub cells: Vec<Cell>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    pub fn value(&self, lambda: f64, n: Option<u64>, method: Method) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.lambda == lambda && c.n == n && c.method == method)
            .and_then(|c| c.outcome.as_ref().ok().map(|v| v.zbar))
    }

    /// Successful `(lambda, zbar)` pairs of one method and particle number.
    pub fn curve(&self, method: Method, n: Option<u64>) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.method == method && c.n == n)
            .filter_map(|c| c.outcome.as_ref().ok().map(|v| (c.lambda, v.zbar)))
            .collect()
    }
}

// splitmix64 finalizer
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one Monte-Carlo cell; depends only on the base seed and the cell
/// coordinates, not on the grid it belongs to.
pub fn cell_seed(seed: u64, lambda: f64, n: u64) -> u64 {
    mix(mix(seed) ^ lambda.to_bits()) ^ mix(n)
}

fn compute_cell(cfg: &SweepConfig, lambda: f64, n: Option<u64>, method: Method) -> Result<CellValue> {
    let closed = |zbar| Ok(CellValue { zbar, err: None });
    let value = match method {
        Method::MeanfieldClosed => return closed(zbar_meanfield_closed(lambda)),
        Method::MeanfieldNumeric => {
            let p = DimerParams::mean_field(lambda)?;
            let t0 = p.t0();
            let window = Window::in_units(cfg.window.0, cfg.window.1, t0)?;
            let sample_every = (cfg.dt_sample / cfg.dt).round().max(1.0) as usize;
            let icfg = IntegratorConfig::new(cfg.dt * t0, window.end, sample_every)?;
            CellValue {
                zbar: meanfield_zbar(&p, window, &icfg)?,
                err: None,
            }
        }
        Method::ExactQuantum => {
            let n = n.expect("exact cells carry N");
            let p = DimerParams::from_lambda(lambda, n, 1.0)?;
            let window = Window::in_units(cfg.window.0, cfg.window.1, p.t0())?;
            CellValue {
                zbar: exact_zbar(&p, window, cfg.dt_sample * p.t0())?,
                err: None,
            }
        }
        Method::SemiclassicalClosed => {
            let n = n.expect("semiclassical cells carry N");
            return closed(match cfg.tail {
                FarTail::Neglect => zbar_closed_form(lambda, n),
                FarTail::Include => zbar_closed_form_corrected(lambda, n),
            });
        }
        Method::SemiclassicalMc => {
            let n = n.expect("semiclassical cells carry N");
            let est = zbar_mc_average(lambda, n, cfg.samples, cell_seed(cfg.seed, lambda, n), cfg.tail)?;
            CellValue {
                zbar: est.mean,
                err: Some(est.std_err),
            }
        }
    };
    Ok(value)
}

fn checked_cell(cfg: &SweepConfig, lambda: f64, n: Option<u64>, method: Method) -> Cell {
    let outcome = compute_cell(cfg, lambda, n, method)
        .map_err(|e| e.to_string())
        .and_then(|v| {
            if (-1.0..=1.0).contains(&v.zbar) {
                Ok(v)
            } else {
                Err(format!("zbar = {} outside [-1, 1]", v.zbar))
            }
        });
    Cell {
        lambda,
        n,
        method,
        outcome,
    }
}

/// Computes every `(lambda, N, method)` cell. Cells run in parallel on the
/// current rayon pool; failures are recorded in the result.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, |_| {})
}

/// [`run_sweep`] with a callback invoked once per finished cell (from worker
/// threads, in completion order).
pub fn run_sweep_with<F>(cfg: &SweepConfig, on_cell: F) -> Result<SweepResult>
where
    F: Fn(&Cell) + Sync,
{
    cfg.validate()?;
    let cells = cfg
        .cells()
        .into_par_iter()
        .map(|(lambda, n, method)| {
            let c = checked_cell(cfg, lambda, n, method);
            on_cell(&c);
            c
        })
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiff {
    pub lambda: f64,
    pub n: Option<u64>,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline: Method,
    pub test: Method,
    pub cells: Vec<CellDiff>,
    pub max: f64,
    pub mean: f64,
    /// Half-width of the excluded band around `lambda = 2`.
    pub band: f64,
    /// Maximum over cells with `|lambda - 2| >= band`.
    pub max_outside_band: f64,
}

/// Absolute differences between two methods on their shared cells.
///
/// A cell without a particle number (mean-field methods) pairs with every
/// cell of the other method at the same `lambda`.
pub fn compare(result: &SweepResult, baseline: Method, test: Method, band: f64) -> Result<Comparison> {
    let ok = |m: Method| {
        result
            .cells
            .iter()
            .filter(move |c| c.method == m)
            .filter_map(|c| c.outcome.as_ref().ok().map(|v| (c.lambda, c.n, v.zbar)))
    };
    let mut cells = Vec::new();
    for (lb, nb, zb) in ok(baseline) {
        for (lt, nt, zt) in ok(test) {
            let n_match = nb == nt || nb.is_none() || nt.is_none();
            if lb == lt && n_match && (baseline != test || nb == nt) {
                cells.push(CellDiff {
                    lambda: lb,
                    n: nb.or(nt),
                    diff: (zt - zb).abs(),
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::Validation(format!(
            "methods {baseline} and {test} share no grid cells"
        )));
    }
    let max = cells.iter().map(|c| c.diff).fold(0.0, f64::max);
    let mean = cells.iter().map(|c| c.diff).sum::<f64>() / cells.len() as f64;
    let max_outside_band = cells
        .iter()
        .filter(|c| (c.lambda - 2.0).abs() >= band)
        .map(|c| c.diff)
        .fold(0.0, f64::max);
    Ok(Comparison {
        baseline,
        test,
        cells,
        max,
        mean,
        band,
        max_outside_band,
    })
}

/// `z(t)` from the all-left initial state on `[0, t_end]`, sampled every
/// `dt_sample` (absolute units).
pub fn run_trajectory(params: &DimerParams, t_end: f64, method: Method, dt_sample: f64) -> Result<TimeSeries> {
    let window = Window::new(0.0, t_end)?;
    match method {
        Method::MeanfieldNumeric => {
            let dt = 1e-3 * params.t0();
            let sample_every = (dt_sample / dt).round().max(1.0) as usize;
            let cfg = IntegratorConfig::new(dt, t_end, sample_every)?;
            Ok(integrate_gpe(&MeanFieldState::all_left(), params, &cfg)?.z)
        }
        Method::ExactQuantum => {
            let prop = SpectralPropagator::new(&build_hamiltonian(params)?)?;
            let grid = TimeGrid::covering(window, dt_sample)?;
            prop.imbalance_trajectory(&FockVector::number_state(params.n(), 0)?, &grid)
        }
        other => Err(Error::Validation(format!(
            "trajectories need meanfield-numeric or exact-quantum, got {other}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRow {
    pub n: u64,
    pub lambda_alpha: f64,
    pub asymptote: f64,
    /// `lambda` where the closed-form imbalance crosses `alpha`, by bisection.
    pub crossing: std::result::Result<f64, String>,
}

/// Solves `zbar_closed_form(lambda, n) = alpha` by bisection.
pub fn closed_form_crossing(n: u64, alpha: f64) -> Result<f64> {
    let f = |l: f64| zbar_closed_form(l, n) - alpha;
    let mut lo = 1e-6;
    let mut hi = 2.0;
    if f(lo) > 0.0 {
        return Err(Error::Numerical(format!(
            "no bracket: closed form already exceeds alpha = {alpha} at lambda = {lo}"
        )));
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical(format!(
                "no bracket: closed form stays below alpha = {alpha} up to lambda = 1e6"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn run_lambda_critical_curve(n_grid: &[u64], alpha: f64) -> Result<Vec<CriticalRow>> {
    if n_grid.is_empty() {
        return Err(Error::Validation("particle number list is empty".into()));
    }
    n_grid
        .iter()
        .map(|&n| {
            let c = crate::heuristics::lambda_critical(n as f64, alpha)?;
            Ok(CriticalRow {
                n,
                lambda_alpha: c.full,
                asymptote: c.asymptote,
                crossing: closed_form_crossing(n, alpha).map_err(|e| e.to_string()),
            })
        })
        .collect()
}

/// Width of the interaction interval over which a curve rises from `lo` to
/// `hi`, using the first upward crossing of each level with linear
/// interpolation between grid points.
pub fn transition_width(curve: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let crossing = |level: f64| {
        curve.windows(2).find_map(|w| {
            let ((l0, z0), (l1, z1)) = (w[0], w[1]);
            (z0 < level && z1 >= level).then(|| l0 + (level - z0) * (l1 - l0) / (z1 - z0))
        })
    };
    Some(crossing(hi)? - crossing(lo)?)
}
