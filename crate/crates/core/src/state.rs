use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const CONSTRUCTION_NORM_TOL: f64 = 1e-12;
const PROPAGATED_NORM_TOL: f64 = 1e-10;

/// On-site amplitudes `(c_L, c_R)` of the mean-field condensate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    c_l: Complex64,
    c_r: Complex64,
}

impl MeanFieldState {
    pub fn new(c_l: Complex64, c_r: Complex64) -> Result<Self> {
        let norm = c_l.norm_sqr() + c_r.norm_sqr();
        if !((norm - 1.0).abs() <= CONSTRUCTION_NORM_TOL) {
            return Err(Error::InvalidParameter(format!(
                "mean-field state must be normalized, |c_L|^2 + |c_R|^2 = {norm}"
            )));
        }
        Ok(Self { c_l, c_r })
    }

    /// No normalization check; used for integrator output where the drift is
    /// accounted for separately.
    pub(crate) fn from_raw(c_l: Complex64, c_r: Complex64) -> Self {
        Self { c_l, c_r }
    }

    /// All particles in the left well.
    pub fn all_left() -> Self {
        Self {
            c_l: Complex64::new(1.0, 0.0),
            c_r: Complex64::new(0.0, 0.0),
        }
    }

    pub fn c_l(&self) -> Complex64 {
        self.c_l
    }

    pub fn c_r(&self) -> Complex64 {
        self.c_r
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_l.norm_sqr() + self.c_r.norm_sqr()
    }

    /// Right-well occupation `|c_R|^2`.
    pub fn p(&self) -> f64 {
        self.c_r.norm_sqr()
    }

    /// Population imbalance `|c_L|^2 - |c_R|^2`, computed as `1 - 2 p`.
    pub fn z(&self) -> f64 {
        1.0 - 2.0 * self.p()
    }

    /// Relative phase `arg c_R - arg c_L` in `(-pi, pi]`.
    pub fn theta(&self) -> f64 {
        let mut d = self.c_r.arg() - self.c_l.arg();
        if d <= -PI {
            d += 2.0 * PI;
        } else if d > PI {
            d -= 2.0 * PI;
        }
        d
    }

    pub fn conj(&self) -> Self {
        Self {
            c_l: self.c_l.conj(),
            c_r: self.c_r.conj(),
        }
    }
}

/// Many-body state over the Fock basis `|N - n, n>`, index `n` = number of
/// particles in the right well, so `|N, 0>` is index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter(
                "Fock vector needs at least two amplitudes (N >= 1)".into(),
            ));
        }
        let v = Self { amps };
        let norm = v.norm_sqr();
        if !((norm - 1.0).abs() <= PROPAGATED_NORM_TOL) {
            return Err(Error::InvalidParameter(format!(
                "Fock vector must be normalized, got squared norm {norm}"
            )));
        }
        Ok(v)
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    /// Number state `|N - n_right, n_right>`.
    pub fn number_state(n_total: u64, n_right: u64) -> Result<Self> {
        if n_right > n_total || n_total == 0 {
            return Err(Error::InvalidParameter(format!(
                "number state |{}, {n_right}> is not in the N = {n_total} basis",
                n_total.saturating_sub(n_right)
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n_total as usize + 1];
        amps[n_right as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Particle number `N = dim - 1`.
    pub fn particles(&self) -> u64 {
        (self.amps.len() - 1) as u64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<n_L - n_R> / N`.
    pub fn imbalance(&self) -> f64 {
        imbalance_of(&self.amps)
    }
}

pub(crate) fn imbalance_of(amps: &[Complex64]) -> f64 {
    let n = (amps.len() - 1) as f64;
    amps.iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * (n - 2.0 * k as f64))
        .sum::<f64>()
        / n
}
