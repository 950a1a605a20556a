use std::f64::consts::PI;
use std::sync::Arc;

use robin_core::fem::{lambda_2, lambda_q, mesh_star, minimize_energy, Mesh, MinimizeOptions, RobinSystem};
use robin_core::radial::{ball_energy, solve_ball, RadialParams};
use robin_core::StarDomain;

fn disk_mesh(radius: f64, n_r: usize, n_theta: usize) -> Arc<Mesh> {
    Arc::new(mesh_star(&StarDomain::disk(radius, 4096).unwrap(), n_r, n_theta).unwrap())
}

fn plain(q: f64) -> RadialParams {
    RadialParams::plain(2, q, 1.0).unwrap()
}

#[test]
fn mesh_counts_and_measures() {
    let mesh = mesh_star(&StarDomain::disk(1.0, 64).unwrap(), 32, 64).unwrap();
    assert_eq!(mesh.triangles().len(), 32 * 64 * 2 - 64);
    assert_eq!(mesh.boundary_edges().len(), 64);
    assert_eq!(mesh.len(), 1 + 32 * 64);
    mesh.validate().unwrap();
    let polygon = StarDomain::disk(1.0, 64).unwrap();
    assert!((mesh.area() / polygon.area() - 1.0).abs() < 1e-3);

    let coarse = disk_mesh(1.0, 32, 64).boundary_length();
    let fine = disk_mesh(1.0, 64, 128).boundary_length();
    assert!((fine / coarse - 1.0).abs() < 1e-3);
}

#[test]
fn torsion_solution_on_the_disk() {
    let mesh = disk_mesh(1.0, 64, 128);
    let (u, report) = minimize_energy(&mesh, &plain(1.0)).unwrap();
    assert!(report.converged);
    assert!((report.energy + PI / 2.0 * 0.625).abs() < 1e-3);
    assert!((report.inf_u - 0.5).abs() < 1e-3);
    let boundary_min = mesh.boundary_edges().iter().map(|e| u.values()[e[0]]).fold(f64::INFINITY, f64::min);
    assert_eq!(boundary_min, u.min());
    let pointwise = mesh
        .vertices()
        .iter()
        .zip(u.values())
        .map(|(p, v)| (v - (0.5 + (1.0 - p.x * p.x - p.y * p.y) / 4.0)).abs())
        .fold(0.0, f64::max);
    assert!(pointwise < 1e-3, "{pointwise}");
}

#[test]
fn obstacle_energy_shift_is_exact_below_the_infimum() {
    let mesh = disk_mesh(1.0, 32, 64);
    let system = RobinSystem::new(mesh, 1.0).unwrap();
    for q in [1.0, 1.5] {
        let (_, free) = system.minimize(&plain(q), &MinimizeOptions::default()).unwrap();
        let shifted = |c: f64| free.energy - 0.5 * c * c * system.perimeter() + c.powf(q) / q * system.area();
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = s * free.inf_u;
            let p = RadialParams::new(2, q, 1.0, c, 0.0).unwrap();
            let (_, obstacle) = system.minimize(&p, &MinimizeOptions::default()).unwrap();
            let gap = obstacle.energy - shifted(c);
            assert!(gap.abs() <= 1e-8, "q={q} c={c}: {gap}");
        }
        let c = 2.0 * free.inf_u;
        let p = RadialParams::new(2, q, 1.0, c, 0.0).unwrap();
        let (_, obstacle) = system.minimize(&p, &MinimizeOptions::default()).unwrap();
        assert!(obstacle.energy - shifted(c) >= 0.0);
    }
}

#[test]
fn obstacle_above_the_infimum_is_strict() {
    let system = RobinSystem::new(disk_mesh(1.0, 64, 128), 1.0).unwrap();
    let (_, free) = system.minimize(&plain(1.0), &MinimizeOptions::default()).unwrap();
    let c = 1.0;
    let rhs = free.energy - 0.5 * c * c * system.perimeter() + c / 1.0 * system.area();
    let p = RadialParams::new(2, 1.0, 1.0, c, 0.0).unwrap();
    let (_, obstacle) = system.minimize(&p, &MinimizeOptions::default()).unwrap();
    assert!(obstacle.energy - rhs >= 1e-4, "{}", obstacle.energy - rhs);
}

#[test]
fn disk_minimizer_is_rotationally_symmetric() {
    let mesh = disk_mesh(1.0, 16, 64);
    for q in [1.0, 1.5] {
        let (u, _) = minimize_energy(&mesh, &plain(q)).unwrap();
        for ring in 1..=mesh.n_r() {
            let values: Vec<f64> = (0..mesh.n_theta()).map(|j| u.values()[mesh.ring_vertex(ring, j)]).collect();
            let spread =
                values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-9, "ring {ring}: {spread}");
        }
    }
}

#[test]
fn lambda_on_disks_matches_radial_values() {
    let unit = lambda_q(&disk_mesh(1.0, 64, 128), 1.0, 1.0).unwrap();
    assert!((unit - 0.5093).abs() < 2e-3);
    let doubled = lambda_q(&disk_mesh(2.0, 64, 128), 1.0, 1.0).unwrap();
    let oracle = ball_energy(&solve_ball(plain(1.0), 2.0).unwrap()).lambda_q.unwrap();
    assert!((doubled - oracle).abs() < 2e-3);

    let fem = lambda_q(&disk_mesh(1.0, 64, 128), 1.5, 1.0).unwrap();
    let oracle = ball_energy(&solve_ball(plain(1.5), 1.0).unwrap()).lambda_q.unwrap();
    assert!((fem / oracle - 1.0).abs() < 5e-3);
}

#[test]
fn linear_eigenvalue_vanishes_with_beta() {
    assert!(lambda_2(&disk_mesh(1.0, 16, 32), 1e-8).unwrap() < 1e-6);
}

#[test]
fn energy_decreases_under_refinement() {
    let energies: Vec<f64> = [(8, 16), (16, 32), (32, 64)]
        .iter()
        .map(|&(n_r, n_t)| minimize_energy(&disk_mesh(1.0, n_r, n_t), &plain(1.5)).unwrap().1.energy)
        .collect();
    assert!(energies.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
}

#[test]
fn field_and_mesh_csv_output() {
    let mesh = disk_mesh(1.0, 4, 16);
    let (u, _) = minimize_energy(&mesh, &plain(1.0)).unwrap();
    let mut buf = Vec::new();
    u.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u"));
    assert_eq!(lines.count(), mesh.len());

    let mut buf = Vec::new();
    mesh.write_triangles_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), mesh.triangles().len() + 1);
}
