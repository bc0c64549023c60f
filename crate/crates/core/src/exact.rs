//! Exact dynamics of the Bose-Hubbard dimer in the Fock basis `|N - n, n>`.
//!
//! The Hamiltonian is real symmetric tridiagonal in this basis. It is
//! diagonalized once and states are propagated as
//! `psi(t) = V exp(-i E t / hbar) V^T psi(0)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::DimerParams;
use crate::series::{TimeGrid, TimeSeries, Window};
use crate::state::{imbalance_of, FockVector};

/// Largest particle number accepted by [`build_hamiltonian`].
pub const MAX_PARTICLES: u64 = 5000;

/// Default sampling step for exact trajectories, in units of `t0`.
pub const DEFAULT_SAMPLE_DT_T0: f64 = 0.01;

/// Symmetric tridiagonal Hamiltonian over `|N - n, n>`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockHamiltonian {
    n: u64,
    hbar: f64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

pub fn build_hamiltonian(params: &DimerParams) -> Result<FockHamiltonian> {
    build_hamiltonian_capped(params, MAX_PARTICLES)
}

pub fn build_hamiltonian_capped(params: &DimerParams, cap: u64) -> Result<FockHamiltonian> {
    let n = params.n();
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    let nf = n as f64;
    let (u, j) = (params.u(), params.j());
    let diag = (0..=n)
        .map(|k| {
            let (l, r) = (nf - k as f64, k as f64);
            0.5 * u * (l * (l - 1.0) + r * (r - 1.0)) + params.eps_l() * l + params.eps_r() * r
        })
        .collect();
    let offdiag = (0..n)
        .map(|k| {
            let k = k as f64;
            -0.5 * j * ((k + 1.0) * (nf - k)).sqrt()
        })
        .collect();
    Ok(FockHamiltonian {
        n,
        hbar: params.hbar(),
        diag,
        offdiag,
    })
}

impl FockHamiltonian {
    pub fn particles(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (k, &v) in self.diag.iter().enumerate() {
            m[(k, k)] = v;
        }
        for (k, &v) in self.offdiag.iter().enumerate() {
            m[(k, k + 1)] = v;
            m[(k + 1, k)] = v;
        }
        m
    }

    /// Largest absolute matrix element.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d)
            .map(|k| {
                let mut acc = amps[k] * self.diag[k];
                if k > 0 {
                    acc += amps[k - 1] * self.offdiag[k - 1];
                }
                if k + 1 < d {
                    acc += amps[k + 1] * self.offdiag[k];
                }
                acc
            })
            .collect()
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, psi: &FockVector) -> f64 {
        self.apply(psi.amps())
            .iter()
            .zip(psi.amps())
            .map(|(h, a)| (a.conj() * h).re)
            .sum()
    }
}

/// Eigendecomposition `H = V diag(E) V^T` of a [`FockHamiltonian`].
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigenvalues: Vec<f64>,
    // column-major, column k is the k-th eigenvector
    eigenvectors: DMatrix<f64>,
    hbar: f64,
}

impl SpectralPropagator {
    pub fn new(h: &FockHamiltonian) -> Result<Self> {
        let dense = h.to_dense();
        debug_assert_eq!(dense, dense.transpose());
        let eig = SymmetricEigen::try_new(dense.clone(), f64::EPSILON, 0).ok_or_else(|| {
            Error::Numerical(format!(
                "symmetric eigensolver did not converge (dim = {}, max |H_ij| = {:e})",
                h.dim(),
                h.max_abs()
            ))
        })?;
        if eig.eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite eigenvalues (dim = {}, max |H_ij| = {:e})",
                h.dim(),
                h.max_abs()
            )));
        }
        let prop = Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            hbar: h.hbar,
        };
        let resid = prop.reconstruction_residual(&dense);
        let scale = h.max_abs().max(f64::MIN_POSITIVE);
        if resid > 1e-9 * scale {
            return Err(Error::Numerical(format!(
                "reconstruction residual {resid:e} exceeds 1e-9 * max |H_ij| = {:e}; \
                 orthogonality error {:e}",
                1e-9 * scale,
                prop.orthogonality_error()
            )));
        }
        Ok(prop)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |H - V diag(E) V^T|`.
    pub fn reconstruction_residual(&self, dense: &DMatrix<f64>) -> f64 {
        let v = &self.eigenvectors;
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        (dense - v * e * v.transpose()).amax()
    }

    /// `max |V^T V - 1|`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        (v.transpose() * v - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// Eigenbasis coefficients `V^T psi`.
    fn coefficients(&self, psi: &FockVector) -> Result<Vec<Complex64>> {
        if psi.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "state dimension {} does not match Hamiltonian dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        let v = &self.eigenvectors;
        Ok((0..self.dim())
            .map(|k| {
                v.column(k)
                    .iter()
                    .zip(psi.amps())
                    .map(|(&vk, a)| a * vk)
                    .sum()
            })
            .collect())
    }

    /// Writes `psi(t)` for eigenbasis coefficients `coeffs` into `re`, `im`.
    fn evolve_into(&self, coeffs: &[Complex64], t: f64, re: &mut [f64], im: &mut [f64]) {
        re.fill(0.0);
        im.fill(0.0);
        let d = self.dim();
        let v = self.eigenvectors.as_slice();
        for (k, (&e, &c)) in self.eigenvalues.iter().zip(coeffs).enumerate() {
            let w = c * Complex64::from_polar(1.0, -e * t / self.hbar);
            let col = &v[k * d..(k + 1) * d];
            for ((r, i), &x) in re.iter_mut().zip(im.iter_mut()).zip(col) {
                *r += x * w.re;
                *i += x * w.im;
            }
        }
    }

    /// `psi(t)` for every `t` on `grid`.
    pub fn propagate(&self, psi0: &FockVector, grid: &TimeGrid) -> Result<Vec<FockVector>> {
        let coeffs = self.coefficients(psi0)?;
        let d = self.dim();
        Ok((0..grid.count)
            .into_par_iter()
            .map_init(
                || (vec![0.0; d], vec![0.0; d]),
                |(re, im), k| {
                    self.evolve_into(&coeffs, grid.time(k), re, im);
                    FockVector::from_raw(
                        re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect(),
                    )
                },
            )
            .collect())
    }

    /// `z(t)` on `grid` without materializing the state vectors.
    ///
    /// Sample times are processed in blocks so that the basis change is a
    /// matrix-matrix product.
    pub fn imbalance_trajectory(&self, psi0: &FockVector, grid: &TimeGrid) -> Result<TimeSeries> {
        const BLOCK: usize = 64;
        let coeffs = self.coefficients(psi0)?;
        let d = self.dim();
        let nf = (d - 1) as f64;
        let weights: Vec<f64> = (0..d).map(|k| (nf - 2.0 * k as f64) / nf).collect();
        let blocks: Vec<usize> = (0..grid.count).step_by(BLOCK).collect();
        let z: Vec<f64> = blocks
            .into_par_iter()
            .flat_map_iter(|first| {
                let b = BLOCK.min(grid.count - first);
                let mut a_re = DMatrix::<f64>::zeros(d, b);
                let mut a_im = DMatrix::<f64>::zeros(d, b);
                for col in 0..b {
                    let t = grid.time(first + col);
                    for (k, (&e, &c)) in self.eigenvalues.iter().zip(&coeffs).enumerate() {
                        let w = c * Complex64::from_polar(1.0, -e * t / self.hbar);
                        a_re[(k, col)] = w.re;
                        a_im[(k, col)] = w.im;
                    }
                }
                let re = &self.eigenvectors * a_re;
                let im = &self.eigenvectors * a_im;
                (0..b)
                    .map(|col| {
                        re.column(col)
                            .iter()
                            .zip(im.column(col).iter())
                            .zip(&weights)
                            .map(|((r, i), w)| (r * r + i * i) * w)
                            .sum::<f64>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        TimeSeries::on_grid(grid, z)
    }
}

/// `z(t_k)` for each propagated state.
pub fn imbalance_series(psi: &[FockVector], grid: &TimeGrid) -> Result<TimeSeries> {
    if psi.len() != grid.count {
        return Err(Error::InvalidParameter(format!(
            "{} states for a grid of {} times",
            psi.len(),
            grid.count
        )));
    }
    if let Some(first) = psi.first() {
        if psi.iter().any(|p| p.dim() != first.dim()) {
            return Err(Error::InvalidParameter("inconsistent state dimensions".into()));
        }
    }
    TimeSeries::on_grid(grid, psi.iter().map(|p| imbalance_of(p.amps())).collect())
}

/// Time-averaged imbalance of `|N, 0>` over `window`, sampled with spacing at
/// most `dt_sample` (which must not exceed `t0 / 50`).
pub fn exact_zbar(params: &DimerParams, window: Window, dt_sample: f64) -> Result<f64> {
    if !(dt_sample > 0.0 && dt_sample <= params.t0() / 50.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "dt_sample = {dt_sample} must be in (0, t0/50 = {}]",
            params.t0() / 50.0
        )));
    }
    let h = build_hamiltonian(params)?;
    let prop = SpectralPropagator::new(&h)?;
    let grid = TimeGrid::covering(window, dt_sample)?;
    let psi0 = FockVector::number_state(params.n(), 0)?;
    prop.imbalance_trajectory(&psi0, &grid)?.time_average(window)
}
