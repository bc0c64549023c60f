//! Uniformly sampled observables and their time averages.

use crate::error::{Error, Result};

// Slack when deciding whether a sample time lies inside a window, in units of dt.
const GRID_SLACK: f64 = 1e-9;

/// Closed averaging interval `[start, end]` in absolute time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
            return Err(Error::InvalidParameter(format!(
                "window must satisfy 0 <= start < end, got [{start}, {end}]"
            )));
        }
        Ok(Self { start, end })
    }

    /// Window given in multiples of a time unit (typically `t0`).
    pub fn in_units(start: f64, end: f64, unit: f64) -> Result<Self> {
        Self::new(start * unit, end * unit)
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

/// Uniform time grid `start + k dt`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, dt: f64, count: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || !start.is_finite() || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs dt > 0 and at least one point (dt = {dt}, count = {count})"
            )));
        }
        Ok(Self { start, dt, count })
    }

    /// Grid covering `window` with spacing at most `max_dt`; the spacing is
    /// shrunk so that both end points are sampled.
    pub fn covering(window: Window, max_dt: f64) -> Result<Self> {
        if !(max_dt.is_finite() && max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {max_dt}")));
        }
        let intervals = ((window.len() / max_dt) * (1.0 - GRID_SLACK)).ceil().max(1.0) as usize;
        Self::new(window.start, window.len() / intervals as f64, intervals + 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.time(k))
    }
}

/// Scalar observable sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t_start: f64,
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t_start: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || !t_start.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time series needs dt > 0, got {dt}"
            )));
        }
        Ok(Self { t_start, dt, values })
    }

    pub fn on_grid(grid: &TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        Self::new(grid.start, grid.dt, values)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.time(k), v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum over the samples with `t` in `[a, b]`.
    pub fn min_in(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.index_range(a, b)?;
        Ok(self.values[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min))
    }

    fn index_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let range_err = || Error::Range {
            start: a,
            end: b,
            first: self.t_start,
            last: self.t_end(),
        };
        if self.values.len() < 2 || !(a <= b) {
            return Err(range_err());
        }
        let slack = GRID_SLACK * self.dt;
        if a < self.t_start - slack || b > self.t_end() + slack {
            return Err(range_err());
        }
        let lo = ((a - self.t_start) / self.dt - GRID_SLACK).ceil().max(0.0) as usize;
        let hi = (((b - self.t_start) / self.dt + GRID_SLACK).floor() as usize)
            .min(self.values.len() - 1);
        if hi < lo {
            return Err(range_err());
        }
        Ok((lo, hi))
    }

    /// Trapezoidal mean of the samples lying in `[a, b]`.
    pub fn time_average(&self, window: Window) -> Result<f64> {
        let (lo, hi) = self.index_range(window.start, window.end)?;
        if hi == lo {
            return Err(Error::Range {
                start: window.start,
                end: window.end,
                first: self.t_start,
                last: self.t_end(),
            });
        }
        let inner: f64 = self.values[lo + 1..hi].iter().sum();
        let sum = inner + 0.5 * (self.values[lo] + self.values[hi]);
        Ok(sum / (hi - lo) as f64)
    }
}
