mod common;

use common::fluct_average_quadrature;
use dimer_trap::heuristics::{
    sigma_n, zbar_closed_form, zbar_closed_form_corrected, zbar_mc_average, zbar_meanfield_closed, FarTail,
};

#[test]
fn quadrature_oracle_reduces_to_mean_field() {
    for lambda in [1.0, 2.5, 4.0] {
        let q = fluct_average_quadrature(lambda, 1e-6, false);
        assert!((q - zbar_meanfield_closed(lambda)).abs() < 1e-5, "lambda = {lambda}");
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    for tail in [FarTail::Neglect, FarTail::Include] {
        for lambda in [1.0, 1.5, 2.0, 3.0, 5.0, 20.0] {
            for n in [10u64, 50, 100, 400] {
                let mc = zbar_mc_average(lambda, n, 400_000, 17, tail).unwrap();
                let q = fluct_average_quadrature(lambda, sigma_n(n), tail == FarTail::Include);
                let bound = 3.0 * mc.std_err + 1e-9;
                assert!(
                    (mc.mean - q).abs() <= bound,
                    "{tail:?} lambda = {lambda}, N = {n}: mc {} +- {}, quadrature {q}",
                    mc.mean,
                    mc.std_err
                );
            }
        }
    }
}

#[test]
fn closed_forms_track_quadrature() {
    for lambda in [1.0, 1.5, 2.0, 3.0, 5.0] {
        for n in [50u64, 100, 400] {
            let q = fluct_average_quadrature(lambda, sigma_n(n), false);
            let c = zbar_closed_form(lambda, n);
            assert!((q - c).abs() < 0.02, "lambda = {lambda}, N = {n}: {q} vs {c}");
        }
    }
    // the far tail adds a little weight at small N and strong interaction
    let q = fluct_average_quadrature(50.0, sigma_n(2), true);
    let c = zbar_closed_form_corrected(50.0, 2);
    assert!((q - c).abs() < 0.05, "{q} vs {c}");
}
