use std::f64::consts::PI;

use proptest::prelude::*;
use robin_core::radial::{
    annulus_exclusion, ball_energy, eigenvalue_q2_ball, hamiltonian_monotonicity, lambda_from_energy, penalized_ball_argmin,
    shoot_ball, solve_annulus, solve_ball, BoundaryMode, RadialParams, ShootingOptions,
};

fn params(n: usize, q: f64, beta: f64, c: f64, eps: f64) -> RadialParams {
    RadialParams::new(n, q, beta, c, eps).unwrap()
}

/// `J0(x)` by its power series; adequate for `x < 10`.
fn bessel_j0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -(x * x) / (4.0 * (k * k) as f64);
        sum += term;
    }
    sum
}

fn first_zero_of_j0() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Energy `E^c` of the q=1 candidate `v = A + (R^2 - r^2)/4` on the unit
/// disk with `beta = 1`, by midpoint quadrature in `r`.
fn q1_candidate_energy(c: f64) -> f64 {
    let shift = (0.5 - c).max(0.0);
    let v = |r: f64| shift + (1.0 - r * r) / 4.0;
    let steps = 200_000;
    let h = 1.0 / steps as f64;
    let mut dirichlet = 0.0;
    let mut bulk = 0.0;
    for i in 0..steps {
        let r = (i as f64 + 0.5) * h;
        dirichlet += 0.5 * (r / 2.0).powi(2) * 2.0 * PI * r * h;
        bulk += v(r) * 2.0 * PI * r * h;
    }
    let boundary = 0.5 * 2.0 * PI * (v(1.0).powi(2) + 2.0 * c * v(1.0));
    dirichlet + boundary - bulk
}

#[test]
fn torsion_profile_values() {
    let profile = solve_ball(params(2, 1.0, 1.0, 0.0, 0.0), 1.0).unwrap();
    assert!((profile.center_value() - 0.75).abs() < 1e-8);
    assert!((profile.boundary_value() - 0.5).abs() < 1e-8);
    assert_eq!(profile.mode(), BoundaryMode::Robin);
}

#[test]
fn large_obstacle_makes_contact() {
    let profile = solve_ball(params(2, 1.0, 1.0, 1.0, 0.0), 1.0).unwrap();
    assert_eq!(profile.mode(), BoundaryMode::ObstacleContact);
    assert!(profile.boundary_value().abs() < 1e-8);
    assert!(profile.boundary_slope() + 1.0 >= -1e-9);
}

#[test]
fn linear_profile_matches_bessel_oracle() {
    let profile = solve_ball(RadialParams::plain(2, 2.0, 1.0).unwrap(), 1.0).unwrap();
    assert_eq!(profile.mode(), BoundaryMode::Eigen);
    let lambda = profile.eigenvalue().unwrap();
    assert!((lambda - eigenvalue_q2_ball(2, 1.0, 1.0).unwrap()).abs() < 1e-12);
    let scale = profile.center_value();
    let sup = profile
        .grid()
        .iter()
        .zip(profile.psi())
        .map(|(&r, &v)| (v / scale - bessel_j0(lambda.sqrt() * r)).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-6, "sup error {sup}");
}

#[test]
fn q1_energy_without_obstacle() {
    let energy = ball_energy(&solve_ball(params(2, 1.0, 1.0, 0.0, 0.0), 1.0).unwrap());
    let exact = -(PI / 2.0) * (0.5 + 0.125);
    assert!((energy.energy - exact).abs() < 1e-6);
    assert!((energy.energy - (energy.dirichlet + energy.boundary + energy.bulk)).abs() < 1e-12 * exact.abs());
    assert!((energy.lambda_q.unwrap() - 0.509296).abs() < 1e-6);
    assert!((lambda_from_energy(1.0, exact).unwrap() + 1.0 / (2.0 * exact)).abs() < 1e-15);
}

#[test]
fn q1_energy_with_obstacle_matches_direct_quadrature() {
    for c in [0.1, 0.25, 0.5, 1.0] {
        let energy = ball_energy(&solve_ball(params(2, 1.0, 1.0, c, 0.0), 1.0).unwrap()).energy;
        let oracle = q1_candidate_energy(c);
        assert!((energy - oracle).abs() < 1e-6, "c = {c}: {energy} vs {oracle}");
        assert!(energy.is_sign_negative() && energy.is_finite());
    }
    let quarter = ball_energy(&solve_ball(params(2, 1.0, 1.0, 0.25, 0.0), 1.0).unwrap()).energy;
    assert!((quarter + PI / 8.0).abs() < 1e-6);
}

#[test]
fn q1_closed_form_over_radii_and_betas() {
    for radius in [0.5, 1.0, 2.0] {
        for beta in [0.5, 1.0, 4.0] {
            let energy = ball_energy(&solve_ball(params(2, 1.0, beta, 0.0, 0.0), radius).unwrap()).energy;
            let exact = -(PI * radius * radius / 2.0) * (radius / (2.0 * beta) + radius * radius / 8.0);
            assert!((energy - exact).abs() < 1e-6 * exact.abs().max(1.0), "R={radius} beta={beta}");
        }
    }
}

#[test]
fn eigenvalue_limits() {
    let dirichlet = eigenvalue_q2_ball(2, 1e6, 1.0).unwrap();
    let j0 = first_zero_of_j0();
    assert!((j0 - 2.404825557695773).abs() < 1e-12);
    assert!((dirichlet - j0 * j0).abs() < 1e-3, "{dirichlet}");
    assert!(eigenvalue_q2_ball(2, 1e-8, 1.0).unwrap() < 1e-6);
}

#[test]
fn eigenvalue_scales_with_radius() {
    let big = eigenvalue_q2_ball(2, 1.0, 2.0).unwrap();
    let small = eigenvalue_q2_ball(2, 2.0, 1.0).unwrap();
    assert!((big - small / 4.0).abs() < 1e-9);
}

#[test]
fn hamiltonian_drop_equals_dissipation() {
    let profile = solve_ball(params(2, 1.0, 1.0, 0.0, 0.0), 1.0).unwrap();
    let h = profile.hamiltonian();
    let drop = h[0] - h[h.len() - 1];
    let (grid, dpsi) = (profile.grid(), profile.dpsi());
    // psi'^2 / r vanishes at the center since psi' = O(r)
    let integrand: Vec<f64> = grid.iter().zip(dpsi).map(|(&r, &d)| if r > 0.0 { d * d / r } else { 0.0 }).collect();
    let dissipation: f64 = (1..grid.len()).map(|i| 0.5 * (integrand[i] + integrand[i - 1]) * (grid[i] - grid[i - 1])).sum();
    assert!((drop - dissipation).abs() < 1e-6, "{drop} vs {dissipation}");
    assert!(hamiltonian_monotonicity(&profile).pass());
}

#[test]
fn step_halving_is_fourth_order() {
    let p = params(2, 1.25, 1.0, 0.0, 0.0);
    let center = |m: usize| shoot_ball(p, 1.0, &ShootingOptions::with_steps(m)).unwrap().center;
    let (a, b, c) = (center(32), center(64), center(128));
    let ratio = (a - b) / (b - c);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn q1_center_value_is_exact_at_any_step_count() {
    let p = params(2, 1.0, 1.0, 0.0, 0.0);
    for m in [8, 32, 128] {
        let a = shoot_ball(p, 1.0, &ShootingOptions::with_steps(m)).unwrap().center;
        assert!((a - 0.75).abs() < 1e-12);
    }
}

#[test]
fn energy_converges_as_eps_vanishes() {
    let energy = |eps: f64| ball_energy(&solve_ball(params(2, 1.5, 1.0, 0.2, eps), 1.0).unwrap()).energy;
    let values: Vec<f64> = [0.2, 0.1, 0.05, 0.025].into_iter().map(energy).collect();
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
}

#[test]
fn annulus_example_is_not_stationary() {
    let p = params(2, 1.0, 1.0, 0.1, 0.1);
    let report = annulus_exclusion(p, 0.5, 1.2).unwrap();
    assert_eq!(report.input("admissible"), Some(1.0));
    assert!(report.lhs() > 1e-4 && report.pass());
    assert!(report.is_consistent());
    let profile = solve_annulus(p, 0.5, 1.2, &ShootingOptions::default()).unwrap().unwrap();
    assert!(profile.psi.iter().all(|v| *v >= 0.0));
    assert!(profile.bc_residual.abs() <= 1e-9);
}

#[test]
fn penalized_ball_without_penalty_fills_the_volume() {
    let p = params(2, 1.0, 1.0, 0.0, 0.0);
    let (rho, report) = penalized_ball_argmin(p, PI, 0.0, 100).unwrap();
    assert!((rho - 1.0).abs() < 1e-12);
    assert!(report.pass());
    assert_eq!(report.input("k_above_threshold"), Some(0.0));
    // closed form: E(B_rho) = -(pi rho^2 / 2)(rho/2 + rho^2/8)
    let slope_at_one = -(PI / 2.0) * (1.5 + 0.5);
    let bound_at_one = 2.0 * -(PI / 2.0) * (0.5 + 0.125);
    assert!(slope_at_one < bound_at_one);
}

#[test]
fn heavy_penalty_moves_the_argmin_inside() {
    let p = params(2, 1.0, 1.0, 0.0, 0.0);
    let (rho, report) = penalized_ball_argmin(p, PI, 1000.0, 100).unwrap();
    assert!(rho < 1.0);
    assert_eq!(report.input("k_above_threshold"), Some(1.0));
    assert!(report.notes().iter().any(|n| n.contains("threshold")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn accepted_profiles_satisfy_invariants(
        n in 2usize..4,
        q in 1.0f64..2.0,
        beta in 0.3f64..3.0,
        c in 0.0f64..1.0,
        eps in 0.0f64..0.5,
        radius in 0.5f64..2.0,
    ) {
        let p = params(n, q, beta, c, eps);
        if let Ok(profile) = solve_ball(p, radius) {
            prop_assert!(profile.psi().iter().all(|v| *v >= -1e-12));
            prop_assert!(profile.bc_residual().abs() <= 1e-9);
            prop_assert!(hamiltonian_monotonicity(&profile).pass());
            let e = ball_energy(&profile);
            prop_assert!(e.energy < 0.0);
            prop_assert!((e.energy - (e.dirichlet + e.boundary + e.bulk)).abs() <= 1e-12 * e.energy.abs());
        }
    }
}
