//! Free-operator oracles: every spectral quantity has a closed form in
//! μ = λ^{1/4}, which pins the numerical paths end to end.

mod common;

use common::{free_dirichlet_indicator, free_monodromy, rk4_monodromy};
use hexaspec_core::edge_solver::{dirichlet_indicator, dirichlet_spectrum_scan, integrate_fundamental};
use hexaspec_core::graphene::{
    brillouin_to_cartesian, classify_lambda, loop_state_residual, solve_sheets, theta_star,
    Quasimomentum, SpectrumClassification,
};
use hexaspec_core::lyapunov::{lyapunov_values, lyapunov_values_unchecked, resonance_scan};
use hexaspec_core::potential::PeriodicPotential;

const PI: f64 = std::f64::consts::PI;

fn free() -> PeriodicPotential {
    PeriodicPotential::free()
}

#[test]
fn monodromy_matches_closed_forms() {
    for lam in [0.5, 1.0, 10.0, 100.0, 400.0] {
        let m = integrate_fundamental(&free(), lam, 1e-12).unwrap().monodromy;
        let dev = (m - free_monodromy(lam)).abs().max();
        assert!(dev < 1e-8, "lambda {lam}: dev {dev}");
    }
}

#[test]
fn adaptive_and_fixed_step_agree_with_potential() {
    // Liouville check against the independent fixed-step route.
    let q = PeriodicPotential::new(vec![1.0]).unwrap();
    let adaptive = integrate_fundamental(&q, 10.0, 1e-12).unwrap().monodromy;
    let fixed = rk4_monodromy(&q, 10.0, 4000);
    assert!((adaptive - fixed).abs().max() < 1e-9);
    assert!((adaptive.determinant() - 1.0).abs() < 1e-9);
    assert!((fixed.determinant() - 1.0).abs() < 1e-9);
}

#[test]
fn dirichlet_indicator_closed_form() {
    for lam in [1.0, 5.0, 60.0, 200.0] {
        let ours = dirichlet_indicator(&free(), lam, 1e-12).unwrap();
        let expect = free_dirichlet_indicator(lam);
        assert!((ours - expect).abs() < 1e-9 * expect.abs().max(1.0), "lambda {lam}");
    }
    let at_pi4 = dirichlet_indicator(&free(), PI.powi(4), 1e-12).unwrap();
    assert!(at_pi4.abs() < 1e-9);
    let at_16pi4 = dirichlet_indicator(&free(), 16.0 * PI.powi(4), 1e-12).unwrap();
    assert!(at_16pi4.abs() < 1e-7);
}

#[test]
fn lyapunov_frozen_values() {
    // T1(1) = (cosh 1 + cos 1)/2, T2(1) = ((cosh 1 - cos 1)/2)^2.
    let v = lyapunov_values(&free(), 1.0).unwrap();
    assert!((v.t1 - 1.041_691_470_341_691_7).abs() < 1e-10);
    assert!((v.t2 - 0.251_391_094_251_486_54).abs() < 1e-10);

    // Delta1 = Delta2 = 1 at lambda = 0.
    let v0 = lyapunov_values_unchecked(&free(), 0.0, 1e-10).unwrap();
    assert!((v0.delta1.unwrap() - 1.0).abs() < 1e-9);
    assert!((v0.delta2.unwrap() - 1.0).abs() < 1e-9);

    // Delta2 = 0, Delta1 = cosh(pi/2) at lambda = (pi/2)^4.
    let vq = lyapunov_values(&free(), (PI / 2.0).powi(4)).unwrap();
    assert!(vq.delta2.unwrap().abs() < 1e-9);
    assert!((vq.delta1.unwrap() - (PI / 2.0).cosh()).abs() < 1e-9);
    assert!((vq.delta1.unwrap() - 2.509_178_478_658_056_6).abs() < 1e-9);
}

#[test]
fn resonances_free_windows() {
    let scan = resonance_scan(&free(), (-10.0, 100.0), 500, 1e-10).unwrap();
    assert_eq!(scan.zeros.len(), 1, "zeros {:?}", scan.zeros);
    assert!(scan.zeros[0].abs() < 1e-6);
    assert!(scan.gaps.is_empty(), "gaps {:?}", scan.gaps);

    let positive = resonance_scan(&free(), (1.0, 100.0), 300, 1e-10).unwrap();
    assert!(positive.zeros.is_empty());

    // T2 < 0 on (-10, 0): branches are undefined there, so no band.
    let v = lyapunov_values_unchecked(&free(), -5.0, 1e-10).unwrap();
    assert!(v.t2 < 0.0);
    assert!(v.delta1.is_none());
}

#[test]
fn classification_examples() {
    assert_eq!(classify_lambda(&free(), PI.powi(4), 1e-10).unwrap(), SpectrumClassification::PurePoint);
    assert_eq!(
        classify_lambda(&free(), 1.0, 1e-10).unwrap(),
        SpectrumClassification::AbsolutelyContinuous
    );
    assert_eq!(classify_lambda(&free(), -10.0, 1e-10).unwrap(), SpectrumClassification::Gap);
}

#[test]
fn sheets_at_gamma_point() {
    // theta = (0,0): cos(lambda^{1/4}) = ±1. In [0, 200]: tangential
    // contact at 0 (both branches hit +1) and the antiperiodic point pi^4.
    let roots = solve_sheets(&free(), Quasimomentum::new(0.0, 0.0), (0.0, 200.0), 400, 1e-10).unwrap();
    let branch2: Vec<_> = roots.iter().filter(|r| r.branch == 2).collect();
    assert!(
        branch2.iter().any(|r| r.lambda.abs() < 1e-6 && r.sign == 1),
        "missing tangential root at 0: {roots:?}"
    );
    assert!(
        branch2.iter().any(|r| (r.lambda - PI.powi(4)).abs() < 1e-6 * PI.powi(4) && r.sign == -1),
        "missing root at pi^4: {roots:?}"
    );
    // Branch 1 (cosh) only reaches +1 at lambda = 0.
    let branch1: Vec<_> = roots.iter().filter(|r| r.branch == 1).collect();
    assert!(branch1.iter().all(|r| r.lambda.abs() < 1e-6), "branch1 roots {branch1:?}");
}

#[test]
fn sheet_solutions_match_arccos() {
    let theta = Quasimomentum::new(1.1, -0.7);
    let c = hexaspec_core::graphene::s0_norm(theta) / 3.0;
    let roots = solve_sheets(&free(), theta, (0.0, 150.0), 400, 1e-10).unwrap();
    let mut expect = Vec::new();
    let mu_max = 150f64.powf(0.25);
    for target in [c, -c] {
        let a = target.acos();
        for mu in [a, 2.0 * PI - a] {
            if mu <= mu_max {
                expect.push(mu.powi(4));
            }
        }
    }
    expect.sort_by(f64::total_cmp);
    let ours: Vec<f64> = roots.iter().filter(|r| r.branch == 2).map(|r| r.lambda).collect();
    assert_eq!(ours.len(), expect.len(), "ours {ours:?} expect {expect:?}");
    for (o, e) in ours.iter().zip(&expect) {
        assert!((o - e).abs() < 1e-8 * e.max(1.0), "{o} vs {e}");
    }
}

#[test]
fn loop_states_on_flat_bands() {
    for n in [1.0f64, 2.0] {
        let lam = (n * PI).powi(4);
        let res = loop_state_residual(&free(), lam, 1e-10).unwrap();
        assert!(res < 1e-8, "n = {n}: residual {res}");
    }
}

#[test]
fn dirichlet_scan_windows() {
    let none = dirichlet_spectrum_scan(&free(), 50.0, 500, 1e-10).unwrap();
    assert!(none.is_empty());
    let some = dirichlet_spectrum_scan(&free(), 2000.0, 1000, 1e-10).unwrap();
    assert_eq!(some.len(), 2);
    assert!((some[0] - PI.powi(4)).abs() < 1e-8 * PI.powi(4));
    assert!((some[1] - 16.0 * PI.powi(4)).abs() < 1e-8 * 16.0 * PI.powi(4));
}

#[test]
fn brillouin_corners() {
    let (k1, k2) = brillouin_to_cartesian(Quasimomentum::new(0.0, 0.0));
    assert_eq!((k1, k2), (0.0, 0.0));
    // The Dirac quasimomentum maps to the Brillouin-zone corner.
    let (k1, k2) = brillouin_to_cartesian(theta_star());
    assert!((k1 - 2.0 * PI / 3.0).abs() < 1e-14);
    assert!((k2 + 2.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-14);
}
