//! Star-shaped planar domains and their geometric functionals.
//!
//! A [`StarDomain`] is stored in polar form: `K` radii sampled at the equally
//! spaced angles `theta_j = 2 pi j / K` around a center point. The domain is
//! the polygon through the sampled boundary points; every functional below is
//! evaluated on that polygon exactly, except the Fraenkel asymmetry, which is
//! integrated by a polar quadrature (analytic in the radial direction).

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smallest admissible number of boundary samples.
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(center: Point, radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point::new(center.x + radius * c, center.y + radius * s)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// A ball (disk) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// Ball of the given area.
    pub fn with_area(center: Point, area: f64) -> Result<Self> {
        Ball::new(center, (area / PI).sqrt())
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn perimeter(&self) -> f64 {
        TAU * self.radius
    }
}

/// Star-shaped planar domain given by sampled boundary radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    center: Point,
    radii: Vec<f64>,
}

impl StarDomain {
    pub fn new(center: Point, radii: Vec<f64>) -> Result<Self> {
        if radii.len() < MIN_SAMPLES {
            return Err(Error::InvalidDomain(format!("need at least {MIN_SAMPLES} boundary samples, got {}", radii.len())));
        }
        if let Some((j, r)) = radii.iter().enumerate().find(|(_, r)| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidDomain(format!("radius r[{j}] = {r} is not positive")));
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return Err(Error::InvalidDomain("center is not finite".into()));
        }
        Ok(StarDomain { center, radii })
    }

    /// Samples `radius(theta)` at `k` equally spaced angles.
    pub fn from_radius_fn(center: Point, k: usize, radius: impl Fn(f64) -> f64) -> Result<Self> {
        let radii = (0..k).map(|j| radius(TAU * j as f64 / k as f64)).collect();
        StarDomain::new(center, radii)
    }

    pub fn disk(radius: f64, k: usize) -> Result<Self> {
        StarDomain::from_radius_fn(Point::ORIGIN, k, |_| radius)
    }

    /// Ellipse with semi-axes `a` (along x) and `b` (along y).
    pub fn ellipse(a: f64, b: f64, k: usize) -> Result<Self> {
        StarDomain::from_radius_fn(Point::ORIGIN, k, |t| {
            let (s, c) = t.sin_cos();
            a * b / (b * b * c * c + a * a * s * s).sqrt()
        })
    }

    /// `r(theta) = radius * (1 + amplitude * cos(mode * theta))`.
    pub fn perturbed(radius: f64, amplitude: f64, mode: u32, k: usize) -> Result<Self> {
        if amplitude.abs() >= 1.0 {
            return Err(invalid("amplitude", format!("|amplitude| must be < 1, got {amplitude}")));
        }
        StarDomain::from_radius_fn(Point::ORIGIN, k, |t| radius * (1.0 + amplitude * (mode as f64 * t).cos()))
    }

    /// Stadium: the set of points within `radius` of the segment
    /// `[-length/2, length/2] x {0}`, in polar form about its centroid.
    pub fn stadium(length: f64, radius: f64, k: usize) -> Result<Self> {
        if length < 0.0 {
            return Err(invalid("length", "stadium length must be nonnegative"));
        }
        let half = 0.5 * length;
        StarDomain::from_radius_fn(Point::ORIGIN, k, |t| {
            let (s, c) = t.sin_cos();
            if s.abs() > 0.0 {
                let flat = radius / s.abs();
                if flat * c.abs() <= half {
                    return flat;
                }
            }
            // hits the cap centered at (+-half, 0)
            let p = half * c.abs();
            p + (p * p - half * half + radius * radius).sqrt()
        })
    }

    /// Axis-aligned square of the given side, centered at the origin.
    pub fn square(side: f64, k: usize) -> Result<Self> {
        StarDomain::from_radius_fn(Point::ORIGIN, k, |t| {
            let (s, c) = t.sin_cos();
            0.5 * side / c.abs().max(s.abs())
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn samples(&self) -> usize {
        self.radii.len()
    }

    fn step(&self) -> f64 {
        TAU / self.radii.len() as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.step() * j as f64
    }

    pub fn vertex(&self, j: usize) -> Point {
        let k = self.radii.len();
        Point::polar(self.center, self.radii[j % k], self.angle(j % k))
    }

    pub fn vertices(&self) -> Vec<Point> {
        (0..self.samples()).map(|j| self.vertex(j)).collect()
    }

    /// Distance from the center to the polygon boundary along direction
    /// `theta` (exact for the polygon, not an interpolation of the radii).
    pub fn radius_at(&self, theta: f64) -> f64 {
        let k = self.radii.len();
        let dt = self.step();
        let t = theta.rem_euclid(TAU);
        let j = ((t / dt).floor() as usize).min(k - 1);
        let local = (t - j as f64 * dt).clamp(0.0, dt);
        let r0 = self.radii[j];
        let r1 = self.radii[(j + 1) % k];
        r0 * r1 * dt.sin() / (r0 * local.sin() + r1 * (dt - local).sin())
    }

    /// The same polygon boundary sampled at `k` equally spaced angles. The new
    /// vertices lie on the old polygon.
    pub fn resample(&self, k: usize) -> Result<Self> {
        if k == self.samples() {
            return Ok(self.clone());
        }
        StarDomain::from_radius_fn(self.center, k, |t| self.radius_at(t))
    }

    /// Image under the homothety `x -> t x` about the origin.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(invalid("t", "scale factor must be positive"));
        }
        StarDomain::new(Point::new(t * self.center.x, t * self.center.y), self.radii.iter().map(|r| t * r).collect())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        StarDomain { center: self.center.translate(dx, dy), radii: self.radii.clone() }
    }

    /// Polygon area (signed-sum formula written in polar form).
    pub fn area(&self) -> f64 {
        let k = self.radii.len();
        let sum: f64 = (0..k).map(|j| self.radii[j] * self.radii[(j + 1) % k]).sum();
        0.5 * self.step().sin() * sum
    }

    /// Sum of the boundary edge lengths.
    pub fn perimeter(&self) -> f64 {
        let k = self.radii.len();
        let half_sin = (0.5 * self.step()).sin();
        let chord_factor = 4.0 * half_sin * half_sin; // 2 (1 - cos dt)
        (0..k)
            .map(|j| {
                let (a, b) = (self.radii[j], self.radii[(j + 1) % k]);
                ((a - b) * (a - b) + a * b * chord_factor).sqrt()
            })
            .sum()
    }

    pub fn centroid(&self) -> Point {
        let k = self.radii.len();
        let (mut ax, mut ay, mut total) = (0.0, 0.0, 0.0);
        for j in 0..k {
            let p = self.vertex(j);
            let q = self.vertex(j + 1);
            let (px, py) = (p.x - self.center.x, p.y - self.center.y);
            let (qx, qy) = (q.x - self.center.x, q.y - self.center.y);
            let w = 0.5 * (px * qy - py * qx);
            ax += w * (px + qx) / 3.0;
            ay += w * (py + qy) / 3.0;
            total += w;
        }
        Point::new(self.center.x + ax / total, self.center.y + ay / total)
    }

    /// `(min corner, max corner)` of the polygon.
    pub fn bounding_box(&self) -> (Point, Point) {
        self.vertices()
            .iter()
            .fold((Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)), |(lo, hi), p| {
                (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))
            })
    }

    /// Equal-area ball centered at the domain center.
    pub fn equal_area_ball(&self) -> Ball {
        Ball { center: self.center, radius: (self.area() / PI).sqrt() }
    }
}

pub fn area(d: &StarDomain) -> f64 {
    d.area()
}

pub fn perimeter(d: &StarDomain) -> f64 {
    d.perimeter()
}

/// Scale-invariant isoperimetric deficit `Per / sqrt|Omega| - 2 sqrt(pi)`.
pub fn iso_deficit(d: &StarDomain) -> f64 {
    d.perimeter() / d.area().sqrt() - 2.0 * PI.sqrt()
}

/// Settings for the Fraenkel asymmetry search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryOptions {
    /// Angular midpoint nodes of the polar quadrature.
    pub angular_nodes: usize,
    /// Coarse grid of `grid x grid` candidate centers over the bounding box.
    pub grid: usize,
    /// Simplex size at which the center refinement stops.
    pub center_tol: f64,
    pub max_iterations: usize,
}

impl Default for AsymmetryOptions {
    fn default() -> Self {
        AsymmetryOptions { angular_nodes: 4096, grid: 21, center_tol: 1e-6, max_iterations: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub ball: Ball,
    /// Two distinct coarse-grid centers tied within `1e-6`.
    pub tie: bool,
    pub evaluations: usize,
}

/// Polar quadrature of `|Omega \ B| + |B \ Omega|`, exact along every ray.
struct SymDiff<'a> {
    domain: &'a StarDomain,
    dirs: Vec<(f64, f64)>,
    boundary: Vec<f64>,
    weight: f64,
}

impl<'a> SymDiff<'a> {
    fn new(domain: &'a StarDomain, nodes: usize) -> Self {
        let weight = TAU / nodes as f64;
        let thetas = (0..nodes).map(|i| (i as f64 + 0.5) * weight);
        let (dirs, boundary) = thetas.map(|t| ((t.cos(), t.sin()), domain.radius_at(t))).unzip();
        SymDiff { domain, dirs, boundary, weight }
    }

    fn area(&self, center: Point, radius: f64) -> f64 {
        let o = self.domain.center;
        let (wx, wy) = (o.x - center.x, o.y - center.y);
        let w2 = wx * wx + wy * wy;
        let mut total = 0.0;
        for (&(dx, dy), &r) in self.dirs.iter().zip(&self.boundary) {
            // ray o + s d, s >= 0, against |x - center| < radius
            let b = wx * dx + wy * dy;
            let disc = b * b - w2 + radius * radius;
            let own = 0.5 * r * r;
            let contribution = if disc <= 0.0 {
                own
            } else {
                let root = disc.sqrt();
                let hi = -b + root;
                if hi <= 0.0 {
                    own
                } else {
                    let lo = (-b - root).max(0.0);
                    let ball_part = 0.5 * (hi * hi - lo * lo);
                    let top = hi.min(r);
                    let common = if top > lo { 0.5 * (top * top - lo * lo) } else { 0.0 };
                    own + ball_part - 2.0 * common
                }
            };
            total += contribution;
        }
        total * self.weight
    }
}

/// Normalized symmetric difference `|Omega triangle B| / |Omega|`.
pub fn symmetric_difference(d: &StarDomain, ball: &Ball, angular_nodes: usize) -> f64 {
    SymDiff::new(d, angular_nodes).area(ball.center, ball.radius) / d.area()
}

pub fn fraenkel_asymmetry(d: &StarDomain) -> Result<Asymmetry> {
    fraenkel_asymmetry_with(d, &AsymmetryOptions::default())
}

/// Fraenkel asymmetry: infimum over equal-area balls of the normalized
/// symmetric difference. Coarse grid over the bounding box (plus the
/// centroid), then Nelder-Mead refinement of the best center.
pub fn fraenkel_asymmetry_with(d: &StarDomain, opts: &AsymmetryOptions) -> Result<Asymmetry> {
    if opts.grid < 2 || opts.angular_nodes < 16 {
        return Err(invalid("asymmetry options", "grid >= 2 and angular_nodes >= 16 required"));
    }
    let area = d.area();
    let radius = (area / PI).sqrt();
    let quad = SymDiff::new(d, opts.angular_nodes);
    let mut evaluations = 0usize;
    let mut objective = |p: Point| {
        evaluations += 1;
        quad.area(p, radius) / area
    };

    let (lo, hi) = d.bounding_box();
    let g = opts.grid;
    let spacing = ((hi.x - lo.x) / (g - 1) as f64).max((hi.y - lo.y) / (g - 1) as f64);
    let mut best = (d.centroid(), f64::INFINITY);
    best.1 = objective(best.0);
    let mut grid_values = Vec::with_capacity(g * g);
    for iy in 0..g {
        for ix in 0..g {
            let p =
                Point::new(lo.x + (hi.x - lo.x) * ix as f64 / (g - 1) as f64, lo.y + (hi.y - lo.y) * iy as f64 / (g - 1) as f64);
            let v = objective(p);
            grid_values.push(v);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    grid_values.sort_by(f64::total_cmp);
    let tie = grid_values.len() >= 2 && (grid_values[1] - grid_values[0]).abs() < 1e-6;

    let (center, value) = nelder_mead(&mut objective, best.0, 0.5 * spacing, opts.center_tol, opts.max_iterations)
        .map_err(|best| Error::AsymmetrySearch { best })?;
    let (center, value) = if value <= best.1 { (center, value) } else { best };
    Ok(Asymmetry { value, ball: Ball { center, radius }, tie, evaluations })
}

/// Minimizes `f` over the plane; `Err(best value)` when the iteration cap is hit.
fn nelder_mead(
    f: &mut impl FnMut(Point) -> f64,
    start: Point,
    size: f64,
    tol: f64,
    max_iterations: usize,
) -> std::result::Result<(Point, f64), f64> {
    let mut simplex = [start, start.translate(size, 0.0), start.translate(0.0, size)].map(|p| (p, f(p)));
    let lerp = |a: Point, b: Point, t: f64| Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[0].0.dist(simplex[1].0).max(simplex[0].0.dist(simplex[2].0));
        if spread < tol {
            return Ok(simplex[0]);
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let reflected = lerp(worst.0, centroid, 2.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(worst.0, centroid, 3.0);
            let fe = f(expanded);
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 { lerp(worst.0, centroid, 1.5) } else { lerp(worst.0, centroid, 0.5) };
            let fc = f(contracted);
            if fc < worst.1.min(fr) {
                simplex[2] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = lerp(best, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Err(simplex[0].1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoReport {
    pub area: f64,
    pub perimeter: f64,
    pub asymmetry: f64,
    pub best_ball: Ball,
    pub iso_deficit: f64,
}

pub fn geo_report(d: &StarDomain, opts: &AsymmetryOptions) -> Result<GeoReport> {
    let asym = fraenkel_asymmetry_with(d, opts)?;
    Ok(GeoReport {
        area: d.area(),
        perimeter: d.perimeter(),
        asymmetry: asym.value,
        best_ball: asym.ball,
        iso_deficit: iso_deficit(d),
    })
}

/// Named shape families, written `disk(R)`, `ellipse(a,b)`,
/// `perturbed(R,a,k)` and `stadium(L,R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ShapeSpec {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Perturbed { radius: f64, amplitude: f64, mode: u32 },
    Stadium { length: f64, radius: f64 },
}

impl ShapeSpec {
    pub fn domain(&self, k: usize) -> Result<StarDomain> {
        match *self {
            ShapeSpec::Disk { radius } => StarDomain::disk(radius, k),
            ShapeSpec::Ellipse { a, b } => StarDomain::ellipse(a, b, k),
            ShapeSpec::Perturbed { radius, amplitude, mode } => StarDomain::perturbed(radius, amplitude, mode, k),
            ShapeSpec::Stadium { length, radius } => StarDomain::stadium(length, radius, k),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ShapeSpec::Disk { .. } => "disk",
            ShapeSpec::Ellipse { .. } => "ellipse",
            ShapeSpec::Perturbed { .. } => "perturbed",
            ShapeSpec::Stadium { .. } => "stadium",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            ShapeSpec::Disk { radius } => vec![radius],
            ShapeSpec::Ellipse { a, b } => vec![a, b],
            ShapeSpec::Perturbed { radius, amplitude, mode } => vec![radius, amplitude, mode as f64],
            ShapeSpec::Stadium { length, radius } => vec![length, radius],
        }
    }

    pub fn is_ball(&self) -> bool {
        match *self {
            ShapeSpec::Disk { .. } => true,
            ShapeSpec::Ellipse { a, b } => a == b,
            ShapeSpec::Perturbed { amplitude, .. } => amplitude == 0.0,
            ShapeSpec::Stadium { length, .. } => length == 0.0,
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ShapeSpec::Disk { radius } => write!(f, "disk({radius})"),
            ShapeSpec::Ellipse { a, b } => write!(f, "ellipse({a},{b})"),
            ShapeSpec::Perturbed { radius, amplitude, mode } => write!(f, "perturbed({radius},{amplitude},{mode})"),
            ShapeSpec::Stadium { length, radius } => write!(f, "stadium({length},{radius})"),
        }
    }
}

impl FromStr for ShapeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("bad shape `{s}`: {why}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| bad("expected name(args)"))?;
        let args = s[open + 1..].strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad("arguments must be numbers")))
            .collect::<Result<_>>()?;
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(bad(&format!("expected {n} arguments"))) };
        let spec = match s[..open].trim() {
            "disk" => {
                arity(1)?;
                ShapeSpec::Disk { radius: args[0] }
            }
            "ellipse" => {
                arity(2)?;
                ShapeSpec::Ellipse { a: args[0], b: args[1] }
            }
            "perturbed" => {
                arity(3)?;
                if args[2] < 0.0 || args[2].fract() != 0.0 {
                    return Err(bad("mode must be a nonnegative integer"));
                }
                ShapeSpec::Perturbed { radius: args[0], amplitude: args[1], mode: args[2] as u32 }
            }
            "stadium" => {
                arity(2)?;
                ShapeSpec::Stadium { length: args[0], radius: args[1] }
            }
            other => return Err(bad(&format!("unknown family `{other}`"))),
        };
        Ok(spec)
    }
}
