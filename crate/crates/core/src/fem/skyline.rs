//! Envelope (variable-band) Cholesky factorization.
//!
//! Structured polar meshes number vertices ring by ring, so every row couples
//! only to the previous ring and the bandwidth stays near `2 n_theta`. The
//! envelope of row `i` is the contiguous range from its first nonzero column
//! to the diagonal; fill-in is confined to it.

use super::assembly::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    /// Row `i` of `L` for columns `first[i]..=i`.
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors the symmetric matrix `a` with the rows and columns in
    /// `pinned` replaced by the identity.
    pub fn factor_pinned(a: &CsrMatrix, pinned: Option<&[bool]>) -> Result<Self> {
        let n = a.dim();
        let is_pinned = |i: usize| pinned.is_some_and(|p| p[i]);
        let first: Vec<usize> = (0..n)
            .map(|i| {
                if is_pinned(i) {
                    return i;
                }
                a.row(i).filter(|&(j, _)| !is_pinned(j)).map(|(j, _)| j).min().unwrap_or(i).min(i)
            })
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            if is_pinned(i) {
                data[start[i + 1] - 1] = 1.0;
                continue;
            }
            for (j, v) in a.row(i) {
                if j <= i && !is_pinned(j) {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (ri, rj) = (start[i], start[j]);
                let mut s = data[ri + j - fi];
                for k in k0..j {
                    s -= data[ri + k - fi] * data[rj + k - fj];
                }
                if j < i {
                    data[ri + j - fi] = s / data[rj + j - fj];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    data[ri + i - fi] = s.sqrt();
                }
            }
        }
        Ok(SkylineCholesky { first, start, data })
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        SkylineCholesky::factor_pinned(a, None)
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.data.len()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let (fi, ri) = (self.first[i], self.start[i]);
            let mut s = x[i];
            for k in fi..i {
                s -= self.data[ri + k - fi] * x[k];
            }
            x[i] = s / self.data[ri + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, ri) = (self.first[i], self.start[i]);
            x[i] /= self.data[ri + i - fi];
            let xi = x[i];
            for k in fi..i {
                x[k] -= self.data[ri + k - fi] * xi;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tridiagonal(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        // one long-range coupling to exercise the envelope
        t.push((0, n - 1, 0.5));
        t.push((n - 1, 0, 0.5));
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn solves_spd_system() {
        let a = tridiagonal(20);
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = SkylineCholesky::factor(&a).unwrap().solve(&b);
        assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SkylineCholesky::factor(&a), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn pinned_rows_become_identity() {
        let a = tridiagonal(6);
        let pinned = [false, true, false, false, true, false];
        let f = SkylineCholesky::factor_pinned(&a, Some(&pinned)).unwrap();
        let b = [1.0, 7.0, 2.0, 3.0, -5.0, 4.0];
        let x = f.solve(&b);
        assert!((x[1] - 7.0).abs() < 1e-14 && (x[4] + 5.0).abs() < 1e-14);
        // free rows solve the reduced system with pinned columns dropped
        for i in [0, 2, 3, 5] {
            let r: f64 = a.row(i).filter(|&(j, _)| !pinned[j]).map(|(j, v)| v * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn random_diagonally_dominant(n in 2usize..30, seed in proptest::collection::vec(-1.0f64..1.0, 60)) {
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, 5.0));
                let j = (i + 1 + (seed[i] * 3.0).abs() as usize) % n;
                if j != i {
                    t.push((i, j, seed[i + n.min(30)] * 0.9));
                    t.push((j, i, seed[i + n.min(30)] * 0.9));
                }
            }
            let a = CsrMatrix::from_triplets(n, t);
            let x: Vec<f64> = (0..n).map(|i| seed[i]).collect();
            let y = SkylineCholesky::factor(&a).unwrap().solve(&a.mul_vec(&x));
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-10);
            }
        }
    }
}
