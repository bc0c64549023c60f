//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Mean-field amplitudes in real coordinates `[x_L, y_L, x_R, y_R]`.
pub type Real4 = [f64; 4];

pub struct MfModel {
    pub j: f64,
    /// `U (N - 1)`
    pub g: f64,
    pub eps_l: f64,
    pub eps_r: f64,
    pub hbar: f64,
}

impl MfModel {
    fn deriv(&self, s: &Real4) -> Real4 {
        let [xl, yl, xr, yr] = *s;
        let nl = xl * xl + yl * yl;
        let nr = xr * xr + yr * yr;
        // i hbar c' = F  =>  x' = Im F / hbar, y' = -Re F / hbar
        let al = self.eps_l + self.g * nl;
        let ar = self.eps_r + self.g * nr;
        let fl = (-0.5 * self.j * xr + al * xl, -0.5 * self.j * yr + al * yl);
        let fr = (-0.5 * self.j * xl + ar * xr, -0.5 * self.j * yl + ar * yr);
        [fl.1 / self.hbar, -fl.0 / self.hbar, fr.1 / self.hbar, -fr.0 / self.hbar]
    }

    /// Classical RK4 with `steps_per_sample` steps between samples; returns
    /// the state at every sample including `t = 0`.
    pub fn rk4(&self, init: Real4, h: f64, samples: usize, steps_per_sample: usize) -> Vec<Real4> {
        let add = |a: &Real4, b: &Real4, s: f64| -> Real4 { std::array::from_fn(|i| a[i] + s * b[i]) };
        let mut s = init;
        let mut out = vec![s];
        for _ in 0..samples {
            for _ in 0..steps_per_sample {
                let k1 = self.deriv(&s);
                let k2 = self.deriv(&add(&s, &k1, h / 2.0));
                let k3 = self.deriv(&add(&s, &k2, h / 2.0));
                let k4 = self.deriv(&add(&s, &k3, h));
                s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            }
            out.push(s);
        }
        out
    }
}

pub fn z_of(s: &Real4) -> f64 {
    (s[0] * s[0] + s[1] * s[1]) - (s[2] * s[2] + s[3] * s[3])
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence of the leading principal minors).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { 1e-300 } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All roots of the characteristic polynomial of a symmetric tridiagonal
/// matrix, ascending, by Sturm bisection.
pub fn tridiagonal_roots(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let d = diag.len();
    // Gershgorin bound
    let r = (0..d)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += off[i - 1].abs();
            }
            if i + 1 < d {
                s += off[i].abs();
            }
            s
        })
        .fold(0.0, f64::max)
        + 1.0;
    (0..d)
        .map(|k| {
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Fock-basis Hamiltonian entries written out directly from the two-mode
/// operator algebra, independently of the library builder.
pub fn dimer_tridiagonal(j: f64, u: f64, n: u64, eps_l: f64, eps_r: f64) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let diag = (0..=n)
        .map(|k| {
            let (nl, nr) = (nf - k as f64, k as f64);
            0.5 * u * (nl * nl - nl + nr * nr - nr) + eps_l * nl + eps_r * nr
        })
        .collect();
    // <n+1| a_R^dag a_L |n> = sqrt((n+1)(N-n))
    let off = (0..n)
        .map(|k| -0.5 * j * ((k as f64 + 1.0) * (nf - k as f64)).sqrt())
        .collect();
    (diag, off)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
        })
        .sum()
}

fn gauss_density(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Expectation of the single-fluctuation imbalance over a centred Gaussian
/// shift of width `sigma`, by quadrature.
///
/// The integrand is nonzero for `d > 1/L - 1/2` and, when `include_far_tail`,
/// for `d < -1/L - 1/2`. On each branch `d` is written as the branch point
/// plus or minus `u^2`, which turns the square-root edge into a smooth
/// integrand in `u`.
pub fn fluct_average_quadrature(lambda: f64, sigma: f64, include_far_tail: bool) -> f64 {
    let rule = gauss_legendre(20);
    let a = 2.0 / lambda;
    let reach = 14.0 * sigma;
    let root = |u: f64| u * (u * u + a).sqrt();
    let x0 = 1.0 / lambda - 0.5;
    let lower_near = (-reach - x0).max(0.0).sqrt();
    let upper = (reach - x0).max(0.0).sqrt();
    let near = composite(
        |u| {
            let d = x0 + u * u;
            (0.5 - d + root(u)) * gauss_density(d, sigma) * 2.0 * u
        },
        lower_near,
        upper,
        200,
        &rule,
    );
    if !include_far_tail {
        return near;
    }
    let x1 = -1.0 / lambda - 0.5;
    let lower = (x1 + reach).max(0.0).sqrt();
    let far = composite(
        |u| {
            let d = x1 - u * u;
            (0.5 - d + root(u)) * gauss_density(d, sigma) * 2.0 * u
        },
        0.0,
        lower,
        200,
        &rule,
    );
    near + far
}

/// Deterministic uniform draws in `[0, 1)` (64-bit LCG, top 53 bits).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal by Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}
