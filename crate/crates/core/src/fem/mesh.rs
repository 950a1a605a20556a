use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, StarDomain};
use crate::io::{csv_writer, fmt_real};

/// Structured triangulation of a star-shaped domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    n_r: usize,
    n_theta: usize,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Image of the polar disk mesh under `(rho, theta) -> center + rho r(theta) e_theta`
/// with rings `rho_i = i / n_r`. Vertex 0 is the center; vertex
/// `1 + (i-1) n_theta + j` sits on ring `i` at angle `2 pi j / n_theta`.
pub fn mesh_star(d: &StarDomain, n_r: usize, n_theta: usize) -> Result<Mesh> {
    if n_r < 4 {
        return Err(invalid("n_r", format!("must be >= 4, got {n_r}")));
    }
    if n_theta < 16 {
        return Err(invalid("n_theta", format!("must be >= 16, got {n_theta}")));
    }
    let c = d.center();
    let mut vertices = Vec::with_capacity(1 + n_r * n_theta);
    vertices.push(c);
    let boundary: Vec<(f64, f64, f64)> = (0..n_theta)
        .map(|j| {
            let t = TAU * j as f64 / n_theta as f64;
            (t.cos(), t.sin(), d.radius_at(t))
        })
        .collect();
    for i in 1..=n_r {
        let rho = i as f64 / n_r as f64;
        for &(cos, sin, r) in &boundary {
            let s = if i == n_r { r } else { rho * r };
            vertices.push(Point::new(c.x + s * cos, c.y + s * sin));
        }
    }
    let index = |i: usize, j: usize| 1 + (i - 1) * n_theta + j % n_theta;

    let mut triangles = Vec::with_capacity(2 * n_r * n_theta - n_theta);
    for j in 0..n_theta {
        triangles.push([0, index(1, j), index(1, j + 1)]);
    }
    for i in 1..n_r {
        for j in 0..n_theta {
            let (a, b) = (index(i, j), index(i, j + 1));
            let (cc, dd) = (index(i + 1, j + 1), index(i + 1, j));
            // near-ties keep one fixed diagonal so rotationally symmetric shapes get symmetric meshes
            let (forward, backward) = (vertices[a].dist(vertices[cc]), vertices[b].dist(vertices[dd]));
            if forward <= backward * (1.0 + 1e-9) {
                triangles.push([a, b, cc]);
                triangles.push([a, cc, dd]);
            } else {
                triangles.push([a, b, dd]);
                triangles.push([b, cc, dd]);
            }
        }
    }
    let threshold = 1e-14 * d.area();
    for (cell, t) in triangles.iter_mut().enumerate() {
        let mut area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if area < 0.0 {
            t.swap(1, 2);
            area = -area;
        }
        if area < threshold {
            return Err(Error::DegenerateTriangle { cell, area, threshold });
        }
    }
    let boundary_edges = (0..n_theta).map(|j| [index(n_r, j), index(n_r, j + 1)]).collect();
    Ok(Mesh { vertices, triangles, boundary_edges, n_r, n_theta })
}

impl Mesh {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of the vertex on ring `ring` (1..=n_r) at angular slot `slot`.
    pub fn ring_vertex(&self, ring: usize, slot: usize) -> usize {
        1 + (ring - 1) * self.n_theta + slot % self.n_theta
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|&[a, b]| self.vertices[a].dist(self.vertices[b])).sum()
    }

    /// Checks orientation and that the boundary edges close into one loop.
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = (0..self.triangles.len()).find(|&t| !(self.triangle_area(t) > 0.0)) {
            return Err(Error::InvalidMesh(format!("triangle {t} is not positively oriented")));
        }
        let edges = &self.boundary_edges;
        let closed = edges.iter().enumerate().all(|(k, e)| e[1] == edges[(k + 1) % edges.len()][0]);
        let mut seen: Vec<usize> = edges.iter().map(|e| e[0]).collect();
        seen.sort_unstable();
        seen.dedup();
        if !closed || seen.len() != edges.len() {
            return Err(Error::InvalidMesh("boundary edges do not form a single loop".into()));
        }
        Ok(())
    }

    pub fn write_vertices_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["x", "y"])?;
        for p in &self.vertices {
            w.write_record([fmt_real(p.x), fmt_real(p.y)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_triangles_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["a", "b", "c"])?;
        for t in &self.triangles {
            w.write_record(t.map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
