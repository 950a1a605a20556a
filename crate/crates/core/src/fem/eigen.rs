use super::solve::{RobinSystem, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tolerance: 1e-12, max_iterations: 2000 }
    }
}

impl RobinSystem {
    /// Smallest generalized eigenvalue of `(K + beta B) x = lambda M x` with the
    /// consistent mass `M`, by inverse iteration (shift zero: the operator is
    /// already positive definite). The eigenvector is positive, with unit
    /// `M`-norm.
    pub fn lambda_2_with(&self, opts: &EigenOptions) -> Result<(f64, ScalarField)> {
        let mass = &self.forms().mass;
        let a = self.operator();
        let mut x = vec![1.0; self.mesh().len()];
        let mut lambda = a.quad_form(&x) / mass.quad_form(&x);
        // rounding floor for the eigenvalue change when lambda itself is tiny (beta -> 0)
        let stiffness_scale = a.diagonal().iter().zip(mass.diagonal()).map(|(k, m)| k / m).fold(0.0, f64::max);
        let floor = 64.0 * f64::EPSILON * stiffness_scale;
        for _ in 0..opts.max_iterations {
            let mut y = self.factor().solve(&mass.mul_vec(&x));
            let norm = mass.quad_form(&y).sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
            let next = a.quad_form(&y);
            x = y;
            let change = (next - lambda).abs();
            lambda = next;
            if change <= (opts.tolerance * lambda).max(floor) {
                if x.iter().any(|v| *v < 0.0) {
                    return Err(Error::SolverFailure("principal eigenvector changes sign".into()));
                }
                return Ok((lambda, ScalarField::new(self.mesh().clone(), x)?));
            }
        }
        Err(Error::NoConvergence { iterations: opts.max_iterations, detail: format!("inverse iteration at lambda = {lambda}") })
    }

    pub fn lambda_2(&self) -> Result<f64> {
        self.lambda_2_with(&EigenOptions::default()).map(|(l, _)| l)
    }
}
