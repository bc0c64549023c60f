//! Closed-form approximations for the time-averaged population imbalance.
//!
//! The mean-field result comes from replacing the detuning of the
//! noninteracting Rabi formula by the time-averaged interaction energy
//! difference and demanding self-consistency, which gives
//!
//! ```text
//! zbar^3 - zbar^2 + zbar / Lambda^2 = 0.
//! ```
//!
//! Finite particle numbers enter through a Gaussian shift `dz` of standard
//! deviation `1 / (2 sqrt N)` in the self-consistency condition; averaging
//! over it smooths the jump at `Lambda = 2` into a crossover.

pub mod normal;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::params::DimerParams;

pub use normal::{normal_cdf, normal_pdf, normal_quantile};

/// Minimum sample count accepted by [`zbar_mc_average`].
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Standard deviation `1 / (2 sqrt N)` of the fluctuation `dz` of the
/// time-averaged imbalance.
pub fn sigma_n(n: u64) -> f64 {
    0.5 / (n as f64).sqrt()
}

/// Gaussian fluctuation model for `N` particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationModel {
    pub n: u64,
    pub sigma: f64,
}

impl FluctuationModel {
    pub fn new(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(Self {
            n,
            sigma: sigma_n(n),
        })
    }

    /// Lower edge `1/Lambda - 1/2` of the trapped branch in `dz`.
    pub fn x0(lambda: f64) -> f64 {
        1.0 / lambda.abs() - 0.5
    }

    /// Point at which the square root is frozen, `max(x0, (x0 + sigma)/2, 0)`.
    pub fn x_star(&self, lambda: f64) -> f64 {
        x_star(Self::x0(lambda), self.sigma)
    }
}

fn x_star(x0: f64, sigma: f64) -> f64 {
    x0.max(0.5 * (x0 + sigma)).max(0.0)
}

/// Oscillation amplitude `1 / (1 + Lambda^2 (1 - 2 pbar)^2)`.
pub fn p_amp(lambda: f64, p_bar: f64) -> f64 {
    1.0 / detuning_factor(lambda, p_bar)
}

/// Angular frequency `sqrt(1 + Lambda^2 (1 - 2 pbar)^2) J / (2 hbar)`.
pub fn omega_lambda(lambda: f64, p_bar: f64, params: &DimerParams) -> f64 {
    detuning_factor(lambda, p_bar).sqrt() * params.j() / (2.0 * params.hbar())
}

fn detuning_factor(lambda: f64, p_bar: f64) -> f64 {
    let d = lambda * (1.0 - 2.0 * p_bar);
    1.0 + d * d
}

/// Heuristic right-well occupation `p(t) = p_amp sin^2(omega_Lambda t)` for
/// a given time-averaged occupation `p_bar` in `[0, 1/2]`.
pub fn heuristic_p_of_t(t: f64, lambda: f64, p_bar: f64, params: &DimerParams) -> f64 {
    p_amp(lambda, p_bar) * (omega_lambda(lambda, p_bar, params) * t).sin().powi(2)
}

/// Mean-field time-averaged imbalance: `0` for `|Lambda| <= 2`, otherwise
/// the root `1/2 + sqrt(1/4 - 1/Lambda^2)` of the self-consistency cubic.
pub fn zbar_meanfield_closed(lambda: f64) -> f64 {
    if lambda.abs() <= 2.0 {
        return 0.0;
    }
    0.5 + (0.25 - 1.0 / (lambda * lambda)).sqrt()
}

/// `zbar^3 - zbar^2 + zbar / Lambda^2`.
pub fn cubic_residual(zbar: f64, lambda: f64) -> f64 {
    zbar * zbar * zbar - zbar * zbar + zbar / (lambda * lambda)
}

/// Self-consistent imbalance for one fluctuation `dz`, to lowest order in
/// `dz`: `0` if `(dz + 1/2)^2 <= 1/Lambda^2`, else
/// `1/2 - dz + sqrt((dz + 1/2)^2 - 1/Lambda^2)`.
pub fn zbar_fluct(lambda: f64, dz: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let disc = (dz + 0.5).powi(2) - 1.0 / (lambda * lambda);
    if disc <= 0.0 {
        return 0.0;
    }
    0.5 - dz + disc.sqrt()
}

/// Residual of the full (untruncated) dressed self-consistency
/// `zbar = 1 - 1 / (1 + Lambda^2 (zbar + dz)^2)`. It is `O(dz^2)` for the
/// output of [`zbar_fluct`].
pub fn fluct_fixed_point_residual(zbar: f64, lambda: f64, dz: f64) -> f64 {
    let s = lambda * (zbar + dz);
    zbar - (1.0 - 1.0 / (1.0 + s * s))
}

/// Residual of the dressed cubic
/// `zbar^3 + (2 dz - 1) zbar^2 + (1/Lambda^2 - 2 dz) zbar`, which
/// [`zbar_fluct`] solves exactly.
pub fn fluct_cubic_residual(zbar: f64, lambda: f64, dz: f64) -> f64 {
    zbar * zbar * zbar + (2.0 * dz - 1.0) * zbar * zbar
        + (1.0 / (lambda * lambda) - 2.0 * dz) * zbar
}

/// How fluctuations below `-1/Lambda - 1/2` are counted in the sampled
/// average. They only matter for very strong interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FarTail {
    /// Discarded (contribute zero), the regime of [`zbar_closed_form`].
    #[default]
    Neglect,
    /// Evaluated with [`zbar_fluct`] like every other draw, the regime of
    /// [`zbar_closed_form_corrected`].
    Include,
}

impl FarTail {
    pub fn as_str(&self) -> &'static str {
        match self {
            FarTail::Neglect => "neglect",
            FarTail::Include => "include",
        }
    }
}

impl std::str::FromStr for FarTail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neglect" => Ok(FarTail::Neglect),
            "include" => Ok(FarTail::Include),
            other => Err(Error::Validation(format!(
                "tail must be 'neglect' or 'include', got '{other}'"
            ))),
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte-Carlo average of [`zbar_fluct`] over `dz = zeta / (2 sqrt N)`,
/// `zeta` standard normal, drawn from a ChaCha8 stream seeded with `seed`.
pub fn zbar_mc_average(
    lambda: f64,
    n: u64,
    samples: usize,
    seed: u64,
    tail: FarTail,
) -> Result<McEstimate> {
    if n < 1 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    zbar_mc_average_sigma(lambda, sigma_n(n), samples, seed, tail)
}

/// [`zbar_mc_average`] with an explicit fluctuation width; `sigma = 0` is the
/// mean-field limit.
pub fn zbar_mc_average_sigma(
    lambda: f64,
    sigma: f64,
    samples: usize,
    seed: u64,
    tail: FarTail,
) -> Result<McEstimate> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "Monte-Carlo average needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) || !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need lambda >= 0 and sigma >= 0 (lambda = {lambda}, sigma = {sigma})"
        )));
    }
    let cut = -1.0 / lambda - 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford accumulation
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let zeta: f64 = StandardNormal.sample(&mut rng);
        let dz = sigma * zeta;
        let v = if tail == FarTail::Neglect && dz < cut {
            0.0
        } else {
            zbar_fluct(lambda, dz)
        };
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        mean,
        std_err: (var / samples as f64).sqrt(),
        samples,
    })
}

/// Closed-form fluctuation-averaged imbalance
/// `(1/2 + sqrt((1/2 + x*)^2 - 1/Lambda^2)) Phi(-x0 / sigma_N)`.
pub fn zbar_closed_form(lambda: f64, n: u64) -> f64 {
    zbar_closed_form_sigma(lambda, sigma_n(n))
}

pub fn zbar_closed_form_sigma(lambda: f64, sigma: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let x0 = FluctuationModel::x0(lambda);
    if sigma == 0.0 {
        return zbar_meanfield_closed(lambda);
    }
    prefactor(lambda, x0, sigma) * normal_cdf(-x0 / sigma)
}

/// Variant that also counts fluctuations below `-1/Lambda - 1/2`; tends to
/// exactly 1 as `Lambda -> infinity`.
pub fn zbar_closed_form_corrected(lambda: f64, n: u64) -> f64 {
    zbar_closed_form_corrected_sigma(lambda, sigma_n(n))
}

pub fn zbar_closed_form_corrected_sigma(lambda: f64, sigma: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    if sigma == 0.0 {
        return zbar_meanfield_closed(lambda);
    }
    let inv = 1.0 / lambda.abs();
    let x0 = inv - 0.5;
    let weight = normal_cdf((0.5 - inv) / sigma) + normal_cdf((-0.5 - inv) / sigma);
    prefactor(lambda, x0, sigma) * weight
}

fn prefactor(lambda: f64, x0: f64, sigma: f64) -> f64 {
    let xs = x_star(x0, sigma);
    let disc = (0.5 + xs).powi(2) - 1.0 / (lambda * lambda);
    0.5 + disc.max(0.0).sqrt()
}

/// Magnitude of the term `sigma_N phi(x0 / sigma_N)` that the closed form
/// drops from the exact Gaussian integral.
pub fn dropped_term(lambda: f64, n: u64) -> f64 {
    let sigma = sigma_n(n);
    sigma * normal_pdf(FluctuationModel::x0(lambda) / sigma)
}

/// Interaction at which the closed-form imbalance first exceeds a small
/// threshold `alpha`, together with its large-`N` asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalInteraction {
    /// `2 / (1 - Phi^{-1}(2 alpha) / sqrt N)`.
    pub full: f64,
    /// `2 + 2 Phi^{-1}(2 alpha) / sqrt N`.
    pub asymptote: f64,
}

pub fn lambda_critical(n: f64, alpha: f64) -> Result<CriticalInteraction> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0, 1/2) so that 2 alpha is a probability, got {alpha}"
        )));
    }
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("N must be >= 1, got {n}")));
    }
    let q = normal_quantile(2.0 * alpha)?;
    let s = n.sqrt();
    Ok(CriticalInteraction {
        full: 2.0 / (1.0 - q / s),
        asymptote: 2.0 + 2.0 * q / s,
    })
}

/// Standard deviation of the right-well particle number in a coherent
/// (mean-field like) state with right-well fraction `p`: `sqrt(N p (1-p))`.
pub fn number_fluctuation_std(n: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    Ok((n as f64 * p * (1.0 - p)).sqrt())
}

/// Standard deviation of the oscillation amplitude, `sqrt(N p (1-p)) / N`.
pub fn p_amp_std(n: u64, p: f64) -> Result<f64> {
    Ok(number_fluctuation_std(n, p)? / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p_of_t_limits() {
        let p = DimerParams::new(1.0, 0.0, 2).unwrap();
        assert_eq!(p_amp(0.0, 0.3), 1.0);
        assert!((omega_lambda(0.0, 0.3, &p) - 0.5).abs() < 1e-15);
        for t in [0.1, 1.0, 4.0] {
            assert!((heuristic_p_of_t(t, 0.0, 0.2, &p) - (0.5 * t).sin().powi(2)).abs() < 1e-15);
        }
        assert_eq!(p_amp(2.0, 0.25), 0.5);
        for l in [0.5, 3.0, 100.0] {
            assert_eq!(p_amp(l, 0.5), 1.0);
        }
    }

    #[test]
    fn meanfield_closed_examples() {
        assert_eq!(zbar_meanfield_closed(1.99), 0.0);
        assert_eq!(zbar_meanfield_closed(2.0), 0.0);
        assert!(zbar_meanfield_closed(1e8) > 1.0 - 1e-15);
        let expect = 0.5 + 3f64.sqrt() / 4.0;
        assert!((zbar_meanfield_closed(4.0) - expect).abs() < 1e-15);
        assert!((zbar_meanfield_closed(4.0) - 0.93301).abs() < 1e-5);
    }

    #[test]
    fn jump_at_threshold() {
        let below = zbar_meanfield_closed(2.0 - 1e-9);
        let above = zbar_meanfield_closed(2.0 + 1e-9);
        assert_eq!(below, 0.0);
        // the jump tends to 1/2; at distance eps the square root adds sqrt(eps)/2
        assert!(above - below >= 0.5 && above - below < 0.5 + 1e-9f64.sqrt());
        let closest = zbar_meanfield_closed(f64::from_bits(2.0f64.to_bits() + 1));
        assert!((closest - 0.5).abs() < 1e-7);
    }

    #[test]
    fn fluct_examples() {
        for l in [0.3, 1.0, 2.0, 2.5, 7.0, 1e6] {
            assert_eq!(zbar_fluct(l, 0.0), zbar_meanfield_closed(l));
        }
        let v = zbar_fluct(2.0, 0.05);
        assert!((v - (0.45 + 0.0525f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.6791).abs() < 1e-4);
        assert_eq!(zbar_fluct(2.0, -0.05), 0.0);
    }

    #[test]
    fn fluct_branch_solves_dressed_cubic() {
        for (l, dz) in [(2.0, 0.05), (3.0, -0.1), (5.0, 0.2), (2.5, 0.0)] {
            let z = zbar_fluct(l, dz);
            assert!(z > 0.0);
            assert!(fluct_cubic_residual(z, l, dz).abs() < 1e-14);
            // the untruncated condition only holds to O(dz^2)
            assert!(fluct_fixed_point_residual(z, l, dz).abs() <= 2.0 * dz * dz + 1e-14);
        }
    }

    #[test]
    fn fluct_fixed_point_residual_is_second_order() {
        // the ratio residual / dz^2 stays bounded as dz -> 0
        let l = 3.0;
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&dz| fluct_fixed_point_residual(zbar_fluct(l, dz), l, dz) / (dz * dz))
            .collect();
        assert!((ratios[1] - ratios[2]).abs() < 0.05 * ratios[2].abs(), "{ratios:?}");
    }

    #[test]
    fn mc_examples() {
        for l in [1.0, 2.5, 4.0] {
            let est = zbar_mc_average_sigma(l, 0.0, MIN_MC_SAMPLES, 3, FarTail::Neglect).unwrap();
            assert_eq!(est.mean, zbar_meanfield_closed(l));
            assert_eq!(est.std_err, 0.0);
        }
        let est = zbar_mc_average(0.5, 100, 100_000, 7, FarTail::Neglect).unwrap();
        assert_eq!(est.mean, 0.0);
        assert!(zbar_mc_average(2.0, 100, 100, 7, FarTail::Neglect).is_err());
    }

    #[test]
    fn mc_is_deterministic() {
        let a = zbar_mc_average(2.0, 100, 50_000, 42, FarTail::Neglect).unwrap();
        let b = zbar_mc_average(2.0, 100, 50_000, 42, FarTail::Neglect).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        let c = zbar_mc_average(2.0, 100, 50_000, 43, FarTail::Neglect).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn mc_far_tail_at_strong_interaction() {
        // with N = 1 the far tail (dz < -1/2 - 1/Lambda) carries noticeable weight
        let l = 1e6;
        let neg = zbar_mc_average(l, 1, 200_000, 5, FarTail::Neglect).unwrap();
        let inc = zbar_mc_average(l, 1, 200_000, 5, FarTail::Include).unwrap();
        assert!(inc.mean > neg.mean);
        assert!(neg.mean < 1.0 - 0.1);
    }

    #[test]
    fn closed_form_examples() {
        let v = zbar_closed_form(2.0, 100);
        let expect = (0.5 + (0.525f64 * 0.525 - 0.25).sqrt()) / 2.0;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.3300).abs() < 1e-4);

        // mean-field limit
        for l in [2.5, 4.0, 9.0] {
            assert!((zbar_closed_form(l, 1_000_000_000_000) - zbar_meanfield_closed(l)).abs() < 1e-5);
            assert_eq!(zbar_closed_form_sigma(l, 0.0), zbar_meanfield_closed(l));
        }

        // strong interaction: close to, but not exactly, one
        let v = zbar_closed_form(1e8, 50);
        assert!(v < 1.0 && v > 1.0 - 1e-10);
        let deficit = normal_cdf(-(1.0 - 2.0 / 1e8) * 10.0);
        assert!(deficit > 0.0 && deficit < 1e-20);
    }

    #[test]
    fn corrected_form_examples() {
        assert!(zbar_closed_form_corrected(1e8, 50) > 1.0 - 1e-10);
        let a = zbar_closed_form_corrected(2.0, 100);
        let b = zbar_closed_form(2.0, 100);
        assert!((a - b).abs() < 1e-12);
        for n in [50, 100, 400] {
            for k in 1..=100 {
                let l = 0.1 * k as f64;
                let bound = normal_cdf((-0.5 - 1.0 / l) / sigma_n(n));
                let d = (zbar_closed_form_corrected(l, n) - zbar_closed_form(l, n)).abs();
                assert!(d <= bound + 1e-16 && bound < 1e-15, "{l} {n} {d} {bound}");
            }
        }
    }

    #[test]
    fn closed_form_is_monotone_in_lambda() {
        for n in [50, 100, 400] {
            let mut prev = 0.0;
            for k in 0..=950 {
                let l = 0.5 + 0.01 * k as f64;
                let v = zbar_closed_form(l, n);
                assert!(v >= prev, "N={n} lambda={l}");
                assert!((0.0..=1.0).contains(&v));
                prev = v;
            }
        }
    }

    #[test]
    fn transition_broadens_with_fewer_particles() {
        for k in 1..40 {
            let l = 1.2 + 0.02 * k as f64;
            let vals: Vec<f64> = [50, 100, 400, 1600].iter().map(|&n| zbar_closed_form(l, n)).collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0], "lambda={l} {vals:?}");
            }
        }
    }

    #[test]
    fn critical_interaction() {
        let c = lambda_critical(100.0, 0.001).unwrap();
        assert!((c.full - 2.0 / (1.0 + 2.8782 / 10.0)).abs() < 1e-4);
        assert!((c.full - 1.5530).abs() < 1e-4);
        assert!((c.asymptote - (2.0 - 2.0 * 2.878_161_739_095_483 / 10.0)).abs() < 1e-12);
        for alpha in [1e-4, 0.001, 0.1, 0.3] {
            let c = lambda_critical(1e12, alpha).unwrap();
            assert!((c.full - 2.0).abs() < 1e-5);
        }
        for alpha in [0.0, 0.5, -1.0, 0.7] {
            assert!(matches!(lambda_critical(100.0, alpha), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn number_fluctuations() {
        assert_eq!(number_fluctuation_std(100, 0.0).unwrap(), 0.0);
        assert_eq!(number_fluctuation_std(100, 0.5).unwrap(), 5.0);
        assert_eq!(p_amp_std(100, 0.5).unwrap(), 0.05);
        assert_eq!(p_amp_std(100, 0.5).unwrap(), sigma_n(100));
        assert!(number_fluctuation_std(10, 1.5).is_err());
    }

    #[test]
    fn x_star_bounds() {
        let m = FluctuationModel::new(100).unwrap();
        assert_eq!(m.sigma, 0.05);
        for k in 1..200 {
            let l = 0.05 * k as f64;
            let x0 = FluctuationModel::x0(l);
            assert!(m.x_star(l) >= x0 && m.x_star(l) >= 0.0);
        }
        assert_eq!(m.x_star(2.0), 0.025);
    }

    proptest! {
        #[test]
        fn closed_root_solves_cubic(l in 2.0f64..100.0) {
            prop_assume!(l > 2.0);
            prop_assert!(cubic_residual(zbar_meanfield_closed(l), l).abs() < 1e-12);
        }

        #[test]
        fn number_fluctuation_symmetry(n in 1u64..10_000, p in 0.0f64..=1.0) {
            let a = number_fluctuation_std(n, p).unwrap();
            let b = number_fluctuation_std(n, 1.0 - p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn critical_is_monotone_in_n(n in 1.0f64..1e7, alpha in 1e-6f64..0.249) {
            let a = lambda_critical(n, alpha).unwrap().full;
            let b = lambda_critical(n * 1.5, alpha).unwrap().full;
            prop_assert!(b >= a);
        }
    }
}
