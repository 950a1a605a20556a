use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::assembly::{assemble, Assembled, CsrMatrix};
use super::mesh::Mesh;
use super::skyline::SkylineCholesky;
use crate::error::{invalid, Error, Result};
use crate::io::{csv_writer, fmt_real};
use crate::radial::{lambda_from_energy, RadialParams};

/// Nodal values over a mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(invalid("values", format!("expected {} nodal values, got {}", mesh.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("nodal value {i} is not finite")));
        }
        Ok(ScalarField { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Result<Self> {
        let n = mesh.len();
        ScalarField::new(mesh, vec![value; n])
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `x, y, u` per vertex.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["x", "y", "u"])?;
        for (p, u) in self.mesh.vertices().iter().zip(&self.values) {
            w.write_record([fmt_real(p.x), fmt_real(p.y), fmt_real(*u)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Energy of a discrete minimizer. With an obstacle `c > 0`, `energy` is
/// `E^c` and the breakdown is written in terms of `v = u - c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub dirichlet: f64,
    pub boundary: f64,
    pub bulk: f64,
    pub inf_u: f64,
    pub sup_u: f64,
    pub lambda_q: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub relaxation: f64,
    pub max_iterations: usize,
    /// Relative energy decrease below which the iteration may stop.
    pub energy_tol: f64,
    /// Max nodal fixed-point residual `|z - u_k|` below which the iteration
    /// may stop.
    pub update_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { relaxation: 0.7, max_iterations: 500, energy_tol: 1e-12, update_tol: 1e-10 }
    }
}

/// Robin operator `A = K + beta B` on one mesh, with cached factorizations.
#[derive(Debug, Clone)]
pub struct RobinSystem {
    mesh: Arc<Mesh>,
    beta: f64,
    forms: Assembled,
    operator: CsrMatrix,
    factor: SkylineCholesky,
}

impl RobinSystem {
    pub fn new(mesh: Arc<Mesh>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        mesh.validate()?;
        let forms = assemble(&mesh);
        let operator = forms.stiffness.add_scaled(beta, &forms.boundary_mass);
        let factor = SkylineCholesky::factor(&operator)?;
        Ok(RobinSystem { mesh, beta, forms, operator, factor })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn forms(&self) -> &Assembled {
        &self.forms
    }
    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }
    pub(crate) fn factor(&self) -> &SkylineCholesky {
        &self.factor
    }

    pub fn area(&self) -> f64 {
        self.forms.lumped.iter().sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.mesh.boundary_length()
    }

    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        0.5 * self.forms.stiffness.quad_form(u)
    }

    /// `int_boundary u^2`.
    pub fn boundary_norm2(&self, u: &[f64]) -> f64 {
        self.forms.boundary_mass.quad_form(u)
    }

    /// Lumped `int u^q`.
    pub fn bulk_integral(&self, u: &[f64], q: f64) -> f64 {
        self.forms.lumped.iter().zip(u).map(|(w, v)| w * v.max(0.0).powf(q)).sum()
    }

    /// `(int |grad u|^2 + beta int_boundary u^2) / (int u^q)^(2/q)`.
    pub fn rayleigh_quotient(&self, u: &[f64], q: f64) -> f64 {
        self.operator.quad_form(u) / self.bulk_integral(u, q).powf(2.0 / q)
    }

    /// Terms of `E^c` at `u = c + v` with the lumped bulk integral.
    fn energy_terms(&self, u: &[f64], params: &RadialParams) -> (f64, f64, f64) {
        let c = params.c;
        let v: Vec<f64> = u.iter().map(|x| x - c).collect();
        let dirichlet = self.dirichlet_energy(&v);
        let bm = &self.forms.boundary_mass;
        let trace_v: f64 = bm.mul_vec(&v).iter().sum();
        let boundary = 0.5 * self.beta * (bm.quad_form(&v) + 2.0 * c * trace_v);
        let bulk = -self.forms.lumped.iter().zip(&v).map(|(w, x)| w * params.theta(*x)).sum::<f64>();
        (dirichlet, boundary, bulk)
    }

    fn energy(&self, u: &[f64], params: &RadialParams) -> f64 {
        let (a, b, c) = self.energy_terms(u, params);
        a + b + c
    }

    /// Minimizes `E^c` over nodal fields `u >= c` (`c = 0` gives `E`).
    ///
    /// Majorize-minimize fixed point: the concave bulk term is replaced by
    /// its tangent at `u_k`, leaving the obstacle QP
    /// `min 1/2 z^T A z - f^T z, z >= c` with `f = w u_k^(q-1)`, solved exactly
    /// by a primal-dual active set method. The relaxed update
    /// `u_(k+1) = (1 - omega) u_k + omega z` never increases the energy;
    /// `omega` is halved within a step if rounding ever makes it do so.
    pub fn minimize(&self, params: &RadialParams, opts: &MinimizeOptions) -> Result<(ScalarField, EnergyReport)> {
        params.validate()?;
        if params.n != 2 {
            return Err(invalid("n", "finite elements are planar; n must be 2"));
        }
        if params.eps != 0.0 {
            return Err(invalid("eps", "the finite element path only supports eps = 0"));
        }
        if params.q >= 2.0 {
            return Err(invalid("q", "energy minimization needs q < 2; use lambda_2 for q = 2"));
        }
        if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
            return Err(invalid("relaxation", "must lie in (0, 1]"));
        }
        let c = params.c;
        let w = &self.forms.lumped;
        let mut qp = ObstacleQp::new(self, c);
        let mut u = qp.solve(w)?;
        let mut energy = self.energy(&u, params);
        let mut converged = params.q == 1.0;
        let mut iterations = 1;
        while !converged && iterations < opts.max_iterations {
            iterations += 1;
            let f: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi * ui.max(0.0).powf(params.q - 1.0)).collect();
            let z = qp.solve(&f)?;
            let residual = u.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            // energy evaluation loses a few digits to cancellation between terms
            let slack = 1e-13 * energy.abs();
            let mut omega = opts.relaxation;
            let (next, next_energy) = loop {
                let next: Vec<f64> = u.iter().zip(&z).map(|(a, b)| (1.0 - omega) * a + omega * b).collect();
                let e = self.energy(&next, params);
                if e <= energy + slack || omega * residual < opts.update_tol * 1e-3 {
                    break (next, e);
                }
                omega *= 0.5;
            };
            let decrease = (energy - next_energy) / next_energy.abs().max(f64::MIN_POSITIVE);
            u = next;
            energy = next_energy;
            converged = decrease.abs() < opts.energy_tol && residual < opts.update_tol;
        }
        if c == 0.0 {
            if let Some(i) = u.iter().position(|v| !(*v > 0.0)) {
                return Err(Error::SolverFailure(format!("nodal value {} = {:e} is not positive at the minimizer", i, u[i])));
            }
        }
        let (dirichlet, boundary, bulk) = self.energy_terms(&u, params);
        let energy = dirichlet + boundary + bulk;
        let field = ScalarField::new(self.mesh.clone(), u)?;
        let lambda_q = if c == 0.0 { lambda_from_energy(params.q, energy).ok() } else { None };
        let report = EnergyReport {
            energy,
            dirichlet,
            boundary,
            bulk,
            inf_u: field.min(),
            sup_u: field.max(),
            lambda_q,
            iterations,
            converged,
        };
        Ok((field, report))
    }

    /// `lambda_q` from the minimum energy at `c = 0`.
    pub fn lambda_q(&self, q: f64) -> Result<f64> {
        let params = RadialParams::plain(2, q, self.beta)?;
        let (_, report) = self.minimize(&params, &MinimizeOptions::default())?;
        if !report.converged {
            return Err(Error::NoConvergence { iterations: report.iterations, detail: "energy minimization".into() });
        }
        lambda_from_energy(q, report.energy)
    }
}

/// `min 1/2 z^T A z - f^T z` subject to `z >= c`, by primal-dual active sets.
/// The factorization for the last active set is cached; across fixed-point
/// steps the contact set settles quickly, so refactoring is rare.
struct ObstacleQp<'a> {
    system: &'a RobinSystem,
    c: f64,
    cached: Option<(Vec<bool>, SkylineCholesky)>,
}

impl<'a> ObstacleQp<'a> {
    const MAX_SWEEPS: usize = 100;

    fn new(system: &'a RobinSystem, c: f64) -> Self {
        ObstacleQp { system, c, cached: None }
    }

    fn solve_with(&mut self, f: &[f64], active: &[bool]) -> Result<Vec<f64>> {
        let a = &self.system.operator;
        if !active.iter().any(|&x| x) {
            return Ok(self.system.factor.solve(f));
        }
        let stale = !matches!(&self.cached, Some((set, _)) if set.as_slice() == active);
        if stale {
            let factor = SkylineCholesky::factor_pinned(a, Some(active))?;
            self.cached = Some((active.to_vec(), factor));
        }
        let rhs: Vec<f64> = (0..f.len())
            .map(|i| {
                if active[i] {
                    self.c
                } else {
                    f[i] - self.c * a.row(i).filter(|&(j, _)| active[j]).map(|(_, v)| v).sum::<f64>()
                }
            })
            .collect();
        Ok(self.cached.as_ref().unwrap().1.solve(&rhs))
    }

    fn solve(&mut self, f: &[f64]) -> Result<Vec<f64>> {
        let a = &self.system.operator;
        let kappa = a.diagonal();
        let scale = f.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let threshold = 1e-13 * scale;
        let mut active = match &self.cached {
            Some((set, _)) => set.clone(),
            None => vec![false; f.len()],
        };
        for _ in 0..Self::MAX_SWEEPS {
            let z = self.solve_with(f, &active)?;
            let az = a.mul_vec(&z);
            let next: Vec<bool> = (0..f.len())
                .map(|i| {
                    let multiplier = if active[i] { az[i] - f[i] } else { 0.0 };
                    multiplier + kappa[i] * (self.c - z[i]) > threshold
                })
                .collect();
            if next == active {
                return Ok(z);
            }
            active = next;
        }
        Err(Error::NoConvergence { iterations: Self::MAX_SWEEPS, detail: "obstacle active set did not settle".into() })
    }
}
