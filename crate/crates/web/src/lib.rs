//! Browser demo. The plain functions return serializable views and are tested
//! natively; the `#[wasm_bindgen]` wrappers hand them to JavaScript as JSON,
//! with `{"error": ...}` in place of a view on failure.

use std::sync::Arc;

use robin_core::fem::{mesh_star, MinimizeOptions, RobinSystem};
use robin_core::geometry::{fraenkel_asymmetry, iso_deficit};
use robin_core::radial::{ball_energy, solve_ball, RadialParams};
use robin_core::{Result, ShapeSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest mesh the page may request; keeps a solve well under a second.
pub const MAX_N_R: usize = 64;
pub const MAX_N_THETA: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct BallView {
    pub mode: String,
    pub energy: f64,
    pub dirichlet: f64,
    pub boundary: f64,
    pub bulk: f64,
    pub lambda_q: Option<f64>,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub hamiltonian: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymmetryView {
    pub area: f64,
    pub perimeter: f64,
    pub iso_deficit: f64,
    pub asymmetry: f64,
    pub ball_center: [f64; 2],
    pub ball_radius: f64,
    pub tie: bool,
    pub outline: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FemView {
    pub energy: f64,
    pub inf_u: f64,
    pub sup_u: f64,
    pub lambda_q: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Flattened `x0, y0, x1, y1, ...`.
    pub vertices: Vec<f64>,
    /// Flattened vertex triples.
    pub triangles: Vec<u32>,
    pub values: Vec<f64>,
}

/// Every `stride`-th sample, always keeping the last one.
fn thin(values: &[f64], points: usize) -> Vec<f64> {
    let stride = (values.len() / points.max(2)).max(1);
    let mut out: Vec<f64> = values.iter().step_by(stride).copied().collect();
    if !(values.len() - 1).is_multiple_of(stride) {
        out.push(values[values.len() - 1]);
    }
    out
}

pub fn ball_profile(n: usize, q: f64, beta: f64, c: f64, eps: f64, radius: f64, points: usize) -> Result<BallView> {
    let params = RadialParams::new(n, q, beta, c, eps)?;
    let profile = solve_ball(params, radius)?;
    let e = ball_energy(&profile);
    Ok(BallView {
        mode: format!("{:?}", profile.mode()),
        energy: e.energy,
        dirichlet: e.dirichlet,
        boundary: e.boundary,
        bulk: e.bulk,
        lambda_q: e.lambda_q.or(profile.eigenvalue()),
        r: thin(profile.grid(), points),
        psi: thin(profile.psi(), points),
        hamiltonian: thin(&profile.hamiltonian(), points),
    })
}

pub fn shape_asymmetry(shape: &str, samples: usize) -> Result<AsymmetryView> {
    let domain = shape.parse::<ShapeSpec>()?.domain(samples)?;
    let asym = fraenkel_asymmetry(&domain)?;
    Ok(AsymmetryView {
        area: domain.area(),
        perimeter: domain.perimeter(),
        iso_deficit: iso_deficit(&domain),
        asymmetry: asym.value,
        ball_center: [asym.ball.center.x, asym.ball.center.y],
        ball_radius: asym.ball.radius,
        tie: asym.tie,
        outline: domain.vertices().iter().map(|p| [p.x, p.y]).collect(),
    })
}

pub fn fem_solve(shape: &str, q: f64, beta: f64, c: f64, n_r: usize, n_theta: usize) -> Result<FemView> {
    if n_r > MAX_N_R || n_theta > MAX_N_THETA {
        return Err(robin_core::Error::Config(format!("mesh limited to n_r <= {MAX_N_R}, n_theta <= {MAX_N_THETA} in the demo")));
    }
    let domain = shape.parse::<ShapeSpec>()?.domain(n_theta.max(1024))?;
    let mesh = Arc::new(mesh_star(&domain, n_r, n_theta)?);
    let params = RadialParams::new(2, q, beta, c, 0.0)?;
    let system = RobinSystem::new(mesh.clone(), beta)?;
    let (field, report) = system.minimize(&params, &MinimizeOptions::default())?;
    Ok(FemView {
        energy: report.energy,
        inf_u: report.inf_u,
        sup_u: report.sup_u,
        lambda_q: report.lambda_q,
        iterations: report.iterations,
        converged: report.converged,
        vertices: mesh.vertices().iter().flat_map(|p| [p.x, p.y]).collect(),
        triangles: mesh.triangles().iter().flat_map(|t| t.map(|i| i as u32)).collect(),
        values: field.values().to_vec(),
    })
}

fn to_json<T: Serialize>(result: Result<T>) -> String {
    match result {
        Ok(view) => serde_json::to_string(&view).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

#[wasm_bindgen(js_name = ballProfile)]
pub fn ball_profile_json(n: usize, q: f64, beta: f64, c: f64, eps: f64, radius: f64, points: usize) -> String {
    to_json(ball_profile(n, q, beta, c, eps, radius, points))
}

#[wasm_bindgen(js_name = shapeAsymmetry)]
pub fn shape_asymmetry_json(shape: &str, samples: usize) -> String {
    to_json(shape_asymmetry(shape, samples))
}

#[wasm_bindgen(js_name = femSolve)]
pub fn fem_solve_json(shape: &str, q: f64, beta: f64, c: f64, n_r: usize, n_theta: usize) -> String {
    to_json(fem_solve(shape, q, beta, c, n_r, n_theta))
}
