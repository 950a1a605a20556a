//! Radial reductions on balls.
//!
//! Radial minimizers solve `psi'' + (n-1)/r psi' + (psi + c)^(q-1) = 0` with
//! `psi'(0) = 0` and, at `r = R`, the (modified) Robin law
//! `psi'(R) + beta (psi(R) + c (1+eps) psi(R)^eps) = 0`. When `eps = 0` and the
//! obstacle binds, the boundary law becomes the complementarity condition
//! `psi(R) = 0`, `psi'(R) + beta c >= 0`.
//!
//! Everything here is solved by shooting on the center value with a fixed-step
//! RK4 integrator and bisection.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{InequalityReport, Provenance};

/// Parameters of the radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialParams {
    /// Space dimension.
    pub n: usize,
    pub q: f64,
    pub beta: f64,
    /// Obstacle level.
    pub c: f64,
    /// Exponent regularization of the boundary term.
    pub eps: f64,
}

impl RadialParams {
    pub fn new(n: usize, q: f64, beta: f64, c: f64, eps: f64) -> Result<Self> {
        let p = RadialParams { n, q, beta, c, eps };
        p.validate()?;
        Ok(p)
    }

    /// `c = 0`, `eps = 0`: the plain energy `E`.
    pub fn plain(n: usize, q: f64, beta: f64) -> Result<Self> {
        RadialParams::new(n, q, beta, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", format!("dimension must be >= 2, got {}", self.n)));
        }
        if !(1.0..=2.0).contains(&self.q) {
            return Err(invalid("q", format!("must lie in [1, 2], got {}", self.q)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive, got {}", self.beta)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be nonnegative, got {}", self.c)));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return Err(invalid("eps", format!("must lie in [0, 1), got {}", self.eps)));
        }
        Ok(())
    }

    pub fn with_c(self, c: f64) -> Self {
        RadialParams { c, ..self }
    }

    pub fn with_eps(self, eps: f64) -> Self {
        RadialParams { eps, ..self }
    }

    /// Right-hand side `(c + psi)^(q-1)`.
    pub fn source(&self, psi: f64) -> f64 {
        (self.c + psi).max(0.0).powf(self.q - 1.0)
    }

    fn source_derivative(&self, psi: f64) -> f64 {
        if self.q == 1.0 {
            0.0
        } else {
            (self.q - 1.0) * (self.c + psi).max(0.0).powf(self.q - 2.0)
        }
    }

    /// `(c + psi)^q / q`.
    pub fn potential(&self, psi: f64) -> f64 {
        (self.c + psi).max(0.0).powf(self.q) / self.q
    }

    /// Bulk nonlinearity `((c + v)^q - c^q) / q`.
    pub fn theta(&self, v: f64) -> f64 {
        ((self.c + v).max(0.0).powf(self.q) - self.c.powf(self.q)) / self.q
    }

    /// Boundary density `v^2 + 2 c v^(1+eps)`.
    pub fn jump_density(&self, v: f64) -> f64 {
        let v = v.max(0.0);
        v * v + 2.0 * self.c * v.powf(1.0 + self.eps)
    }

    /// `beta (v + c (1+eps) v^eps)`; the `v^eps` term is read as `1` when
    /// `eps = 0` (one-sided derivative of the linear term) and vanishes when
    /// `c = 0`.
    pub fn robin_flux(&self, v: f64) -> f64 {
        let v = v.max(0.0);
        let shift = if self.c == 0.0 { 0.0 } else { self.c * (1.0 + self.eps) * v.powf(self.eps) };
        self.beta * (v + shift)
    }
}

/// Volume of the unit ball, `omega_n = omega_(n-2) 2 pi / n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

pub fn ball_volume(n: usize, radius: f64) -> f64 {
    unit_ball_volume(n) * radius.powi(n as i32)
}

/// Surface measure of the sphere of radius `radius`.
pub fn sphere_area(n: usize, radius: f64) -> f64 {
    n as f64 * unit_ball_volume(n) * radius.powi(n as i32 - 1)
}

/// Radius of the ball of volume `m`.
pub fn ball_radius(n: usize, m: f64) -> f64 {
    (m / unit_ball_volume(n)).powf(1.0 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Robin,
    ObstacleContact,
    ModifiedRobin,
    /// `q = 2`, `c = 0`: the equation is linear and homogeneous; the profile is
    /// the principal Robin eigenfunction with `psi(0) = 1`.
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// RK4 steps on `[0, R]`; must be even (Simpson quadrature).
    pub steps: usize,
    pub max_bisections: usize,
    pub max_expansions: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { steps: 4096, max_bisections: 200, max_expansions: 60 }
    }
}

impl ShootingOptions {
    pub fn with_steps(steps: usize) -> Self {
        ShootingOptions { steps, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 8 || !self.steps.is_multiple_of(2) {
            return Err(invalid("steps", format!("must be even and >= 8, got {}", self.steps)));
        }
        Ok(())
    }
}

/// Sampled radial solution on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    params: RadialParams,
    radius: f64,
    grid: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    bc_residual: f64,
    mode: BoundaryMode,
    eigenvalue: Option<f64>,
}

/// Sup-norm bound on the finite-difference ODE residual of a profile.
pub const ODE_RESIDUAL_TOL: f64 = 1e-8;
/// Bound on the boundary-condition residual of a profile.
pub const BC_RESIDUAL_TOL: f64 = 1e-9;

impl RadialProfile {
    /// Assembles a profile and checks every invariant: nonnegativity,
    /// `psi'(0) = 0`, the ODE residual, Hamiltonian monotonicity and the
    /// boundary residual.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: RadialParams,
        radius: f64,
        grid: Vec<f64>,
        psi: Vec<f64>,
        dpsi: Vec<f64>,
        bc_residual: f64,
        mode: BoundaryMode,
        eigenvalue: Option<f64>,
    ) -> Result<Self> {
        params.validate()?;
        let reject = |why: String| Err(Error::InvalidProfile(why));
        let m = grid.len();
        if m < 9 || psi.len() != m || dpsi.len() != m {
            return reject(format!("need >= 9 nodes of equal length, got {m}/{}/{}", psi.len(), dpsi.len()));
        }
        if grid[0] != 0.0 || (grid[m - 1] - radius).abs() > 1e-12 * radius {
            return reject("grid must span [0, R]".into());
        }
        if mode == BoundaryMode::Eigen && eigenvalue.is_none() {
            return reject("eigen mode requires an eigenvalue".into());
        }
        if let Some(i) = psi.iter().position(|v| !(*v >= -1e-12)) {
            return reject(format!("psi({}) = {} is negative", grid[i], psi[i]));
        }
        if dpsi[0].abs() > 1e-14 {
            return reject(format!("psi'(0) = {} is not zero", dpsi[0]));
        }
        if bc_residual.abs() > BC_RESIDUAL_TOL || !bc_residual.is_finite() {
            return reject(format!("boundary residual {bc_residual:e} exceeds {BC_RESIDUAL_TOL:e}"));
        }
        let profile = RadialProfile { params, radius, grid, psi, dpsi, bc_residual, mode, eigenvalue };
        let ode = profile.ode_residual();
        let scale = profile.psi.iter().map(|&v| profile.source_at(v).abs()).fold(1.0, f64::max);
        if ode > ODE_RESIDUAL_TOL * scale {
            return reject(format!("ODE residual {ode:e} exceeds {:e}", ODE_RESIDUAL_TOL * scale));
        }
        let h = profile.hamiltonian();
        let hscale = h.iter().fold(1.0, |acc: f64, v| acc.max(v.abs()));
        if let Some(i) = (0..m - 1).find(|&i| h[i + 1] > h[i] + 1e-10 * hscale) {
            return reject(format!("Hamiltonian increases at r = {}", profile.grid[i]));
        }
        Ok(profile)
    }

    pub fn params(&self) -> &RadialParams {
        &self.params
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
    pub fn dpsi(&self) -> &[f64] {
        &self.dpsi
    }
    pub fn bc_residual(&self) -> f64 {
        self.bc_residual
    }
    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }
    pub fn eigenvalue(&self) -> Option<f64> {
        self.eigenvalue
    }
    pub fn center_value(&self) -> f64 {
        self.psi[0]
    }
    pub fn boundary_value(&self) -> f64 {
        *self.psi.last().unwrap()
    }
    pub fn boundary_slope(&self) -> f64 {
        *self.dpsi.last().unwrap()
    }

    fn source_at(&self, v: f64) -> f64 {
        match self.eigenvalue {
            Some(lambda) if self.mode == BoundaryMode::Eigen => lambda * v,
            _ => self.params.source(v),
        }
    }

    fn potential_at(&self, v: f64) -> f64 {
        match self.eigenvalue {
            Some(lambda) if self.mode == BoundaryMode::Eigen => 0.5 * lambda * v * v,
            _ => self.params.potential(v),
        }
    }

    /// `H(r) = psi'^2 / 2 + (c + psi)^q / q` at every node.
    pub fn hamiltonian(&self) -> Vec<f64> {
        self.psi.iter().zip(&self.dpsi).map(|(&v, &d)| 0.5 * d * d + self.potential_at(v)).collect()
    }

    fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Sup norm of `psi'' + (n-1)/r psi' + source(psi)` with `psi''` from a
    /// five-point difference of the stored `psi'`.
    pub fn ode_residual(&self) -> f64 {
        let h = self.step();
        let n1 = self.params.n as f64 - 1.0;
        let d = &self.dpsi;
        (2..self.grid.len() - 2)
            .map(|i| {
                let second = (-d[i + 2] + 8.0 * d[i + 1] - 8.0 * d[i - 1] + d[i - 2]) / (12.0 * h);
                (second + n1 * d[i] / self.grid[i] + self.source_at(self.psi[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes columns `r, psi, dpsi, H`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = crate::io::csv_writer(out);
        w.write_record(["r", "psi", "dpsi", "H"])?;
        for (i, h) in self.hamiltonian().into_iter().enumerate() {
            w.write_record([self.grid[i], self.psi[i], self.dpsi[i], h].map(crate::io::fmt_real))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `psi(h)`, `psi'(h)` from the series `a + alpha r^2 + gamma r^4` that clears
/// the `(n-1)/r` singularity.
fn series_start(n: usize, a: f64, g: f64, dg: f64, h: f64) -> (f64, f64) {
    let nf = n as f64;
    let alpha = -g / (2.0 * nf);
    let gamma = dg * g / (8.0 * nf * (nf + 2.0));
    let h2 = h * h;
    (a + alpha * h2 + gamma * h2 * h2, 2.0 * alpha * h + 4.0 * gamma * h2 * h)
}

/// One RK4 step of `(psi, p)' = (p, -(n-1)/r p - g(psi))` from `r` to `r + h`.
#[inline]
fn rk4_step(n1: f64, r: f64, h: f64, psi: f64, p: f64, g: &impl Fn(f64) -> f64) -> (f64, f64) {
    let f = |r: f64, y: f64, p: f64| -n1 * p / r - g(y);
    let k1y = p;
    let k1p = f(r, psi, p);
    let k2y = p + 0.5 * h * k1p;
    let k2p = f(r + 0.5 * h, psi + 0.5 * h * k1y, p + 0.5 * h * k1p);
    let k3y = p + 0.5 * h * k2p;
    let k3p = f(r + 0.5 * h, psi + 0.5 * h * k2y, p + 0.5 * h * k2p);
    let k4y = p + h * k3p;
    let k4p = f(r + h, psi + h * k3y, p + h * k3p);
    (psi + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y), p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
}

/// Integrates from the center with `psi(0) = a`; fills `store` when given and
/// returns the end state.
fn integrate_from_center(
    n: usize,
    a: f64,
    radius: f64,
    steps: usize,
    g: &impl Fn(f64) -> f64,
    dg: &impl Fn(f64) -> f64,
    mut store: Option<(&mut Vec<f64>, &mut Vec<f64>)>,
) -> (f64, f64) {
    let h = radius / steps as f64;
    let n1 = n as f64 - 1.0;
    let (mut psi, mut p) = series_start(n, a, g(a), dg(a), h);
    if let Some((ys, ps)) = store.as_mut() {
        ys.clear();
        ps.clear();
        ys.extend([a, psi]);
        ps.extend([0.0, p]);
    }
    for i in 1..steps {
        (psi, p) = rk4_step(n1, i as f64 * h, h, psi, p, g);
        if let Some((ys, ps)) = store.as_mut() {
            ys.push(psi);
            ps.push(p);
        }
    }
    (psi, p)
}

fn uniform_grid(radius: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| radius * i as f64 / steps as f64).collect()
}

/// Bisection on a predicate that is false below the root and true above it.
fn bisect(mut lo: f64, mut hi: f64, max_iter: usize, mut above: impl FnMut(f64) -> bool) -> (f64, f64) {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

pub fn solve_ball(params: RadialParams, radius: f64) -> Result<RadialProfile> {
    solve_ball_with(params, radius, &ShootingOptions::default())
}

/// Radial minimizer on `B_R` by shooting on `a = psi(0)`.
pub fn solve_ball_with(params: RadialParams, radius: f64, opts: &ShootingOptions) -> Result<RadialProfile> {
    let shot = shoot_ball(params, radius, opts)?;
    finish_profile(params, radius, opts, shot.center, shot.bc_residual, shot.mode, shot.eigenvalue)
}

/// Outcome of the shooting stage, before the profile is sampled and validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallShot {
    pub center: f64,
    pub bc_residual: f64,
    pub mode: BoundaryMode,
    pub eigenvalue: Option<f64>,
}

/// Finds the center value `psi(0)` and the boundary mode.
pub fn shoot_ball(params: RadialParams, radius: f64, opts: &ShootingOptions) -> Result<BallShot> {
    params.validate()?;
    opts.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("R", format!("radius must be positive, got {radius}")));
    }
    if params.q == 2.0 && params.c == 0.0 {
        let lambda = eigenvalue_q2_ball_with(params.n, params.beta, radius, opts)?;
        let g = |v: f64| lambda * v;
        let dg = |_: f64| lambda;
        let (psi, p) = integrate_from_center(params.n, 1.0, radius, opts.steps, &g, &dg, None);
        return Ok(BallShot {
            center: 1.0,
            bc_residual: p + params.beta * psi,
            mode: BoundaryMode::Eigen,
            eigenvalue: Some(lambda),
        });
    }
    let n = params.n;
    let g = |v: f64| params.source(v);
    let dg = |v: f64| params.source_derivative(v);
    let end = |a: f64| integrate_from_center(n, a, radius, opts.steps, &g, &dg, None);
    // None when the trajectory goes negative (psi is decreasing, so psi(R) is its minimum)
    let residual = |a: f64| {
        let (psi, p) = end(a);
        (psi >= 0.0).then(|| p + params.robin_flux(psi))
    };

    let nf = n as f64;
    let mut hi = 10.0 * (radius / (nf * params.beta) + radius * radius / (2.0 * nf) + params.c);
    let mut expansions = 0;
    while !matches!(residual(hi), Some(f) if f > 0.0) {
        expansions += 1;
        if expansions > opts.max_expansions {
            return Err(Error::BracketExhausted { lo: 0.0, hi });
        }
        hi *= 2.0;
    }

    let mut lo = 0.0;
    if params.eps == 0.0 && params.c > 0.0 {
        // Dirichlet shot: smallest center value keeping psi >= 0 on [0, R]
        let (a_lo, a_hi) = bisect(0.0, hi, opts.max_bisections, |a| end(a).0 >= 0.0);
        let (psi_lo, _) = end(a_lo);
        let (psi_hi, _) = end(a_hi);
        let a0 = if psi_hi.abs() <= psi_lo.abs() { a_hi } else { a_lo };
        let (psi_r, slope) = end(a0);
        // c = R/(n beta) sits exactly on the switch; allow rounding there
        if slope + params.beta * params.c >= -1e-10 {
            return Ok(BallShot { center: a0, bc_residual: psi_r, mode: BoundaryMode::ObstacleContact, eigenvalue: None });
        }
        lo = a0;
    }

    let (a_lo, a_hi) = bisect(lo, hi, opts.max_bisections, |a| matches!(residual(a), Some(f) if f > 0.0));
    let (a, f) = [a_lo, a_hi]
        .into_iter()
        .filter_map(|a| residual(a).map(|f| (a, f)))
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .ok_or(Error::BracketExhausted { lo: a_lo, hi: a_hi })?;
    let mode = if params.eps > 0.0 { BoundaryMode::ModifiedRobin } else { BoundaryMode::Robin };
    if mode == BoundaryMode::ModifiedRobin && params.c > 0.0 && end(a).0 <= 0.0 {
        return Err(Error::SolverFailure("modified Robin root left the region psi(R) > 0".into()));
    }
    Ok(BallShot { center: a, bc_residual: f, mode, eigenvalue: None })
}

fn finish_profile(
    params: RadialParams,
    radius: f64,
    opts: &ShootingOptions,
    a: f64,
    bc_residual: f64,
    mode: BoundaryMode,
    eigenvalue: Option<f64>,
) -> Result<RadialProfile> {
    let (mut psi, mut dpsi) = (Vec::new(), Vec::new());
    match eigenvalue {
        Some(lambda) => {
            let g = |v: f64| lambda * v;
            let dg = |_: f64| lambda;
            integrate_from_center(params.n, a, radius, opts.steps, &g, &dg, Some((&mut psi, &mut dpsi)));
        }
        None => {
            let g = |v: f64| params.source(v);
            let dg = |v: f64| params.source_derivative(v);
            integrate_from_center(params.n, a, radius, opts.steps, &g, &dg, Some((&mut psi, &mut dpsi)));
        }
    }
    let grid = uniform_grid(radius, opts.steps);
    let last = psi.len() - 1;
    if let Some(i) = psi[..last].iter().position(|v| *v < 0.0) {
        return Err(Error::NegativeProfile { r: grid[i] });
    }
    if mode == BoundaryMode::ObstacleContact {
        // contact: psi(R) = 0 up to the Dirichlet shot residual
        psi[last] = psi[last].max(0.0);
    }
    RadialProfile::from_parts(params, radius, grid, psi, dpsi, bc_residual, mode, eigenvalue)
}

pub fn eigenvalue_q2_ball(n: usize, beta: f64, radius: f64) -> Result<f64> {
    eigenvalue_q2_ball_with(n, beta, radius, &ShootingOptions::default())
}

/// First Robin eigenvalue of the ball by shooting in `lambda` on
/// `psi'(R) + beta psi(R) = 0`, `psi(0) = 1`.
///
/// The bracket is `[0, n(n+4) / (2 R^2)]`; the upper end is the Rayleigh
/// quotient of `1 - r^2/R^2`, which bounds the first Dirichlet eigenvalue.
pub fn eigenvalue_q2_ball_with(n: usize, beta: f64, radius: f64, opts: &ShootingOptions) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", "dimension must be >= 2"));
    }
    if !(beta > 0.0 && radius > 0.0) {
        return Err(invalid("beta/R", "beta and R must be positive"));
    }
    opts.validate()?;
    let nf = n as f64;
    let residual = |lambda: f64| {
        let g = |v: f64| lambda * v;
        let dg = |_: f64| lambda;
        let (psi, p) = integrate_from_center(n, 1.0, radius, opts.steps, &g, &dg, None);
        p + beta * psi
    };
    let hi = nf * (nf + 4.0) / (2.0 * radius * radius);
    if residual(hi) >= 0.0 {
        return Err(Error::BracketExhausted { lo: 0.0, hi });
    }
    let (lo, hi) = bisect(0.0, hi, opts.max_bisections, |l| residual(l) < 0.0);
    Ok(0.5 * (lo + hi))
}

/// Energy of a radial profile split into its three terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallEnergy {
    pub energy: f64,
    /// `1/2 int |psi'|^2`
    pub dirichlet: f64,
    /// `beta/2 Per(B_R) (psi(R)^2 + 2 c psi(R)^(1+eps))`
    pub boundary: f64,
    /// `-int Theta(psi)`
    pub bulk: f64,
    pub lambda_q: Option<f64>,
}

/// Composite Simpson weights on a uniform grid with an even number of steps.
pub(crate) fn simpson(values: impl Iterator<Item = f64>, h: f64) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    let mut last = 0.0;
    for (i, v) in values.enumerate() {
        let w = if i == 0 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        total += w * v;
        last = v;
        count = i + 1;
    }
    debug_assert!(count % 2 == 1, "Simpson needs an even number of intervals");
    // the last node was weighted 2 but belongs to the end
    (total - last) * h / 3.0
}

/// Energy terms of a radial field sampled on a uniform grid over `[0, R]`.
pub(crate) fn radial_energy_terms(params: &RadialParams, grid: &[f64], psi: &[f64], dpsi: &[f64]) -> (f64, f64, f64) {
    let n = params.n;
    let sigma = sphere_area(n, 1.0);
    let h = grid[1] - grid[0];
    let weight = |r: f64| sigma * r.powi(n as i32 - 1);
    let dirichlet = 0.5 * simpson(grid.iter().zip(dpsi).map(|(&r, &d)| d * d * weight(r)), h);
    let bulk = -simpson(grid.iter().zip(psi).map(|(&r, &v)| params.theta(v) * weight(r)), h);
    let radius = *grid.last().unwrap();
    let boundary = 0.5 * params.beta * sphere_area(n, radius) * params.jump_density(*psi.last().unwrap());
    (dirichlet, boundary, bulk)
}

pub fn ball_energy(profile: &RadialProfile) -> BallEnergy {
    let p = profile.params;
    let (dirichlet, boundary, bulk) = radial_energy_terms(&p, &profile.grid, &profile.psi, &profile.dpsi);
    let energy = dirichlet + boundary + bulk;
    let lambda_q = if p.c == 0.0 { lambda_from_energy(p.q, energy).ok() } else { None };
    BallEnergy { energy, dirichlet, boundary, bulk, lambda_q }
}

/// `lambda_q = ((2q/(q-2)) E)^((q-2)/q)`, the inverse of
/// `E = (q-2)/(2q) lambda_q^(q/(q-2))`.
pub fn lambda_from_energy(q: f64, energy: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&q) {
        return Err(invalid("q", format!("energy/eigenvalue relation needs q in [1, 2), got {q}")));
    }
    if !(energy < 0.0) {
        return Err(invalid("E", format!("energy must be negative, got {energy}")));
    }
    Ok((2.0 * q / (q - 2.0) * energy).powf((q - 2.0) / q))
}

pub fn energy_from_lambda(q: f64, lambda: f64) -> f64 {
    (q - 2.0) / (2.0 * q) * lambda.powf(q / (q - 2.0))
}

/// Closed-form minimizer of `E^c(.; B_R)` for `q = 1`:
/// `v(r) = (R/(n beta) - c)_+ + (R^2 - r^2) / (2n)`.
pub fn q1_ball_field(n: usize, beta: f64, c: f64, radius: f64, r: f64) -> f64 {
    let nf = n as f64;
    (radius / (nf * beta) - c).max(0.0) + (radius * radius - r * r) / (2.0 * nf)
}

/// Closed-form `E^c(B_R)` for `q = 1`, obtained by testing the Euler-Lagrange
/// equation of `v` with `v` itself:
/// `-|B_R|/2 (A + R^2/(n(n+2))) + beta/2 c Per(B_R) A`, `A = (R/(n beta) - c)_+`.
pub fn q1_ball_energy(n: usize, beta: f64, c: f64, radius: f64) -> f64 {
    let nf = n as f64;
    let shift = (radius / (nf * beta) - c).max(0.0);
    -0.5 * ball_volume(n, radius) * (shift + radius * radius / (nf * (nf + 2.0)))
        + 0.5 * beta * c * sphere_area(n, radius) * shift
}

/// Checks that `H` is nonincreasing and that `dH/dr = -(n-1)/r psi'^2`.
pub fn hamiltonian_monotonicity(profile: &RadialProfile) -> InequalityReport {
    let h = profile.hamiltonian();
    let min_drop = h.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let step = profile.step();
    let n1 = profile.params.n as f64 - 1.0;
    let identity_error = (2..h.len() - 2)
        .map(|i| {
            let dh = (-h[i + 2] + 8.0 * h[i + 1] - 8.0 * h[i - 1] + h[i - 2]) / (12.0 * step);
            (dh + n1 / profile.grid[i] * profile.dpsi[i].powi(2)).abs()
        })
        .fold(0.0, f64::max);
    let p = profile.params;
    InequalityReport::at_least("hamiltonian_monotonicity", min_drop, 0.0, 1e-10)
        .with_condition("dH/dr identity error", identity_error, 1e-6, identity_error <= 1e-6)
        .with_input("n", p.n as f64)
        .with_input("q", p.q)
        .with_input("beta", p.beta)
        .with_input("c", p.c)
        .with_input("eps", p.eps)
        .with_input("R", profile.radius)
        .with_term("H", Provenance::Radial)
}

/// Solution of the radial equation on an annulus `r1 < r < r2` with modified
/// Robin conditions at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusProfile {
    pub r1: f64,
    pub r2: f64,
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub bc_residual: f64,
}

fn integrate_annulus(params: &RadialParams, a: f64, r1: f64, r2: f64, steps: usize, store: bool) -> (Vec<f64>, Vec<f64>, f64) {
    let h = (r2 - r1) / steps as f64;
    let n1 = params.n as f64 - 1.0;
    let g = |v: f64| params.source(v);
    let (mut psi, mut p) = (a, params.robin_flux(a));
    let mut min_psi = psi;
    let (mut ys, mut ps) = (Vec::new(), Vec::new());
    if store {
        ys.push(psi);
        ps.push(p);
    }
    for i in 0..steps {
        (psi, p) = rk4_step(n1, r1 + i as f64 * h, h, psi, p, &g);
        min_psi = min_psi.min(psi);
        if store {
            ys.push(psi);
            ps.push(p);
        }
    }
    if !store {
        ys.push(psi);
        ps.push(p);
    }
    (ys, ps, min_psi)
}

/// Shoots on `psi(r1)` (the inner condition then fixes `psi'(r1)`); `None` if
/// no nonnegative solution satisfies the outer condition.
pub fn solve_annulus(params: RadialParams, r1: f64, r2: f64, opts: &ShootingOptions) -> Result<Option<AnnulusProfile>> {
    params.validate()?;
    opts.validate()?;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(invalid("r1/r2", format!("need 0 < r1 < r2, got ({r1}, {r2})")));
    }
    let residual = |a: f64| {
        let (ys, ps, min_psi) = integrate_annulus(&params, a, r1, r2, opts.steps, false);
        (min_psi >= 0.0).then(|| ps[0] + params.robin_flux(ys[0]))
    };
    let nf = params.n as f64;
    let mut hi = 10.0 * (r2 / (nf * params.beta) + r2 * r2 / (2.0 * nf) + params.c);
    let mut expansions = 0;
    while !matches!(residual(hi), Some(f) if f > 0.0) {
        expansions += 1;
        if expansions > opts.max_expansions {
            return Ok(None);
        }
        hi *= 2.0;
    }
    let (lo, hi) = bisect(0.0, hi, opts.max_bisections, |a| matches!(residual(a), Some(f) if f > 0.0));
    let Some((a, f)) =
        [lo, hi].into_iter().filter_map(|a| residual(a).map(|f| (a, f))).min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
    else {
        return Ok(None);
    };
    if f.abs() > BC_RESIDUAL_TOL || a <= 0.0 {
        return Ok(None);
    }
    let (psi, dpsi, _) = integrate_annulus(&params, a, r1, r2, opts.steps, true);
    let grid = (0..=opts.steps).map(|i| r1 + (r2 - r1) * i as f64 / opts.steps as f64).collect();
    Ok(Some(AnnulusProfile { r1, r2, grid, psi, dpsi, bc_residual: f }))
}

/// First-variation residual of the annulus under volume-preserving moves of
/// both radii, after substituting the boundary conditions:
/// `H(r1) - H(r2) + beta/2 (n-1) (S(psi1)/r1 + S(psi2)/r2)`,
/// `S(v) = v^2 + 2 c v^(1+eps)`. Stationarity would require zero.
pub fn annulus_exclusion(params: RadialParams, r1: f64, r2: f64) -> Result<InequalityReport> {
    let profile = solve_annulus(params, r1, r2, &ShootingOptions::default())?;
    let base = |r: InequalityReport| {
        r.with_input("n", params.n as f64)
            .with_input("q", params.q)
            .with_input("beta", params.beta)
            .with_input("c", params.c)
            .with_input("eps", params.eps)
            .with_input("r1", r1)
            .with_input("r2", r2)
    };
    let Some(prof) = profile else {
        return Ok(base(InequalityReport::at_least("annulus_exclusion", 0.0, 0.0, 1.0))
            .with_input("admissible", 0.0)
            .with_note("no admissible annulus profile"));
    };
    let (psi1, psi2) = (prof.psi[0], *prof.psi.last().unwrap());
    let (d1, d2) = (prof.dpsi[0], *prof.dpsi.last().unwrap());
    let hamiltonian = |v: f64, d: f64| 0.5 * d * d + params.potential(v);
    let geometric =
        0.5 * params.beta * (params.n as f64 - 1.0) * (params.jump_density(psi1) / r1 + params.jump_density(psi2) / r2);
    let reduced = hamiltonian(psi1, d1) - hamiltonian(psi2, d2) + geometric;
    let full = 0.5 * (d2 * d2 - d1 * d1)
        + (params.theta(psi1) - params.theta(psi2))
        + geometric
        + params.robin_flux(psi1) * d1
        + params.robin_flux(psi2) * d2;
    let mismatch = (full - reduced).abs();
    Ok(base(InequalityReport::strictly_above("annulus_exclusion", reduced, 0.0, 1e-4))
        .with_input("admissible", 1.0)
        .with_input("psi1", psi1)
        .with_input("psi2", psi2)
        .with_input("first_variation", full)
        .with_condition("boundary-condition substitution", mismatch, 1e-8, mismatch <= 1e-8)
        .with_term("H(r1) - H(r2)", Provenance::Radial)
        .with_term("boundary terms", Provenance::Radial))
}

/// Samples `rho -> E(B_rho) + 2k|B_rho|` on `(0, r_m]` (`r_m` the radius of
/// volume `m`) and checks that `E(B_rho)` decreases, that
/// `dE/drho <= n E(B_rho) / rho`, and that the minimum sits at `r_m` whenever
/// `k < k0 = -E(B_(r_m)) / (2m)`.
pub fn penalized_ball_argmin(params: RadialParams, m: f64, k: f64, points: usize) -> Result<(f64, InequalityReport)> {
    params.validate()?;
    if params.c != 0.0 || params.eps != 0.0 {
        return Err(invalid("params", "penalized ball problem needs c = 0 and eps = 0"));
    }
    if !(m > 0.0) || !(k >= 0.0) {
        return Err(invalid("m/k", "need m > 0 and k >= 0"));
    }
    if points < 8 {
        return Err(invalid("points", "need at least 8 grid points"));
    }
    let n = params.n;
    let r_m = ball_radius(n, m);
    let rho: Vec<f64> = (1..=points).map(|i| r_m * i as f64 / points as f64).collect();
    let energies = rho.iter().map(|&r| Ok(ball_energy(&solve_ball(params, r)?).energy)).collect::<Result<Vec<f64>>>()?;
    let penalized: Vec<f64> = rho.iter().zip(&energies).map(|(&r, &e)| e + 2.0 * k * ball_volume(n, r)).collect();
    let argmin = (0..points).fold(0, |best, i| if penalized[i] < penalized[best] { i } else { best });

    let decreasing = energies.windows(2).all(|w| w[1] < w[0]);
    let max_increase = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let h = r_m / points as f64;
    let nf = n as f64;
    let min_slack = (2..points - 2)
        .map(|i| {
            let de = (-energies[i + 2] + 8.0 * energies[i + 1] - 8.0 * energies[i - 1] + energies[i - 2]) / (12.0 * h);
            nf * energies[i] / rho[i] - de
        })
        .fold(f64::INFINITY, f64::min);
    let e_m = energies[points - 1];
    let k0 = -e_m / (2.0 * m);
    let below = k < k0;
    let at_rm = argmin == points - 1;
    let mut report = InequalityReport::at_least("penalized_ball", min_slack, 0.0, 1e-6)
        .with_condition("E(B_rho) strictly decreasing", max_increase, 0.0, decreasing)
        .with_input("n", nf)
        .with_input("q", params.q)
        .with_input("beta", params.beta)
        .with_input("m", m)
        .with_input("k", k)
        .with_input("k0", k0)
        .with_input("r_m", r_m)
        .with_input("rho_star", rho[argmin])
        .with_input("k_above_threshold", if below { 0.0 } else { 1.0 })
        .with_term("E(B_rho)", Provenance::Radial);
    if below {
        report = report.with_condition("argmin at r_m", rho[argmin], r_m, at_rm);
    } else {
        report = report.with_note(format!("k = {k} is not below the threshold k0 = {k0}; argmin condition not applied"));
    }
    Ok((rho[argmin], report))
}
