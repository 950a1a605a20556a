use super::mesh::Mesh;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    /// `self + s * other` (same dimension).
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, v)));
            triplets.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        CsrMatrix::from_triplets(self.n, triplets)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }
}

/// The discrete forms of the energy on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    /// `int grad u . grad v`
    pub stiffness: CsrMatrix,
    /// `int_boundary u v`, exact for linear traces.
    pub boundary_mass: CsrMatrix,
    /// Consistent `int u v`.
    pub mass: CsrMatrix,
    /// Row sums of the consistent mass (`area / 3` per incident triangle).
    pub lumped: Vec<f64>,
}

pub fn assemble(mesh: &Mesh) -> Assembled {
    let n = mesh.len();
    let v = mesh.vertices();
    let ntri = mesh.triangles().len();
    let mut stiff = Vec::with_capacity(9 * ntri);
    let mut mass = Vec::with_capacity(9 * ntri);
    let mut lumped = vec![0.0; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        // gradient of the hat at vertex k is (b_k, c_k) / (2 area)
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for k in 0..3 {
            let (p, q) = (v[tri[(k + 1) % 3]], v[tri[(k + 2) % 3]]);
            b[k] = p.y - q.y;
            c[k] = q.x - p.x;
        }
        for k in 0..3 {
            lumped[tri[k]] += area / 3.0;
            for l in 0..3 {
                stiff.push((tri[k], tri[l], (b[k] * b[l] + c[k] * c[l]) / (4.0 * area)));
                let m = if k == l { area / 6.0 } else { area / 12.0 };
                mass.push((tri[k], tri[l], m));
            }
        }
    }
    let mut bmass = Vec::with_capacity(4 * mesh.boundary_edges().len());
    for &[a, b] in mesh.boundary_edges() {
        let len = v[a].dist(v[b]);
        bmass.extend([(a, a, len / 3.0), (b, b, len / 3.0), (a, b, len / 6.0), (b, a, len / 6.0)]);
    }
    Assembled {
        stiffness: CsrMatrix::from_triplets(n, stiff),
        boundary_mass: CsrMatrix::from_triplets(n, bmass),
        mass: CsrMatrix::from_triplets(n, mass),
        lumped,
    }
}
