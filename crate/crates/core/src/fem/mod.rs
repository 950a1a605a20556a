//! Linear finite elements on structured polar meshes.

mod assembly;
mod eigen;
mod mesh;
mod skyline;
mod solve;

use std::sync::Arc;

pub use assembly::{assemble, Assembled, CsrMatrix};
pub use eigen::EigenOptions;
pub use mesh::{mesh_star, Mesh};
pub use skyline::SkylineCholesky;
pub use solve::{EnergyReport, MinimizeOptions, RobinSystem, ScalarField};

use crate::error::Result;
use crate::radial::RadialParams;

/// Minimizes `E^c` on `mesh` with default options.
pub fn minimize_energy(mesh: &Arc<Mesh>, params: &RadialParams) -> Result<(ScalarField, EnergyReport)> {
    RobinSystem::new(mesh.clone(), params.beta)?.minimize(params, &MinimizeOptions::default())
}

pub fn lambda_q(mesh: &Arc<Mesh>, q: f64, beta: f64) -> Result<f64> {
    RobinSystem::new(mesh.clone(), beta)?.lambda_q(q)
}

pub fn lambda_2(mesh: &Arc<Mesh>, beta: f64) -> Result<f64> {
    RobinSystem::new(mesh.clone(), beta)?.lambda_2()
}
