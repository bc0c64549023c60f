mod common;

use common::{dimer_tridiagonal, tridiagonal_roots, Lcg};
use dimer_trap::exact::{build_hamiltonian, exact_zbar, SpectralPropagator};
use dimer_trap::meanfield::{meanfield_zbar, IntegratorConfig};
use dimer_trap::params::DimerParams;
use dimer_trap::series::{TimeGrid, Window};
use dimer_trap::state::FockVector;
use num_complex::Complex64;

#[test]
fn builder_matches_operator_algebra() {
    let mut rng = Lcg(11);
    for n in [1u64, 2, 3, 7, 40] {
        let (j, u) = (0.5 + rng.next_f64(), 2.0 * rng.next_f64() - 1.0);
        let (el, er) = (rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        let p = DimerParams::new(j, u, n).unwrap().with_onsite(el, er).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let (d, o) = dimer_tridiagonal(j, u, n, el, er);
        for (a, b) in h.diag().iter().zip(&d) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
        for (a, b) in h.offdiag().iter().zip(&o) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn eigenvalues_match_sturm_roots() {
    let mut rng = Lcg(5);
    for n in 1..=12u64 {
        let p = DimerParams::new(1.0 + rng.next_f64(), 3.0 * rng.next_f64(), n)
            .unwrap()
            .with_onsite(rng.next_f64(), -rng.next_f64())
            .unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let mut eig = SpectralPropagator::new(&h).unwrap().eigenvalues().to_vec();
        eig.sort_by(f64::total_cmp);
        let roots = tridiagonal_roots(h.diag(), h.offdiag());
        for (a, b) in eig.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-10, "N = {n}: {a} vs {b}");
        }
    }
}

/// Schroedinger equation for a small system by RK4 with a tiny step.
fn rk4_schroedinger(diag: &[f64], off: &[f64], psi0: Vec<Complex64>, h: f64, steps: usize) -> Vec<Complex64> {
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let d = v.len();
        (0..d)
            .map(|i| {
                let mut s = v[i] * diag[i];
                if i > 0 {
                    s += v[i - 1] * off[i - 1];
                }
                if i + 1 < d {
                    s += v[i + 1] * off[i];
                }
                -Complex64::i() * s
            })
            .collect()
    };
    let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y * s).collect()
    };
    let mut psi = psi0;
    for _ in 0..steps {
        let k1 = apply(&psi);
        let k2 = apply(&axpy(&psi, &k1, h / 2.0));
        let k3 = apply(&axpy(&psi, &k2, h / 2.0));
        let k4 = apply(&axpy(&psi, &k3, h));
        psi = (0..psi.len())
            .map(|i| psi[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
            .collect();
    }
    psi
}

#[test]
fn propagation_matches_direct_integration() {
    let p = DimerParams::from_lambda(2.5, 5, 1.0).unwrap().with_onsite(0.2, -0.1).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let prop = SpectralPropagator::new(&h).unwrap();
    let t_end = 3.0;
    let grid = TimeGrid::new(0.0, t_end, 2).unwrap();
    let psi0 = FockVector::number_state(5, 0).unwrap();
    let spectral = &prop.propagate(&psi0, &grid).unwrap()[1];
    let direct = rk4_schroedinger(h.diag(), h.offdiag(), psi0.amps().to_vec(), t_end / 30_000.0, 30_000);
    for (a, b) in spectral.amps().iter().zip(&direct) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn noninteracting_imbalance_is_cosine_for_any_n() {
    let p = DimerParams::new(1.0, 0.0, 60).unwrap();
    let prop = SpectralPropagator::new(&build_hamiltonian(&p).unwrap()).unwrap();
    let grid = TimeGrid::covering(Window::new(0.0, 3.0 * p.t0()).unwrap(), 0.05).unwrap();
    let z = prop
        .imbalance_trajectory(&FockVector::number_state(60, 0).unwrap(), &grid)
        .unwrap();
    for (t, v) in z.iter() {
        assert!((v - t.cos()).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn trapped_average_converges_to_mean_field() {
    let lambda = 3.0;
    let mf = DimerParams::mean_field(lambda).unwrap();
    let window = Window::in_units(0.0, 100.0, mf.t0()).unwrap();
    let cfg = IntegratorConfig::for_params(&mf, window.end).unwrap();
    let z_mf = meanfield_zbar(&mf, window, &cfg).unwrap();
    let gaps: Vec<f64> = [50u64, 100, 200, 400]
        .iter()
        .map(|&n| {
            let p = DimerParams::from_lambda(lambda, n, 1.0).unwrap();
            (exact_zbar(&p, window, p.t0() / 100.0).unwrap() - z_mf).abs()
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    assert!(gaps[3] < 2e-3, "{gaps:?}");
}
