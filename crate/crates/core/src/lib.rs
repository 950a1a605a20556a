//! Numerical laboratory for semilinear Robin problems on planar star-shaped
//! domains.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`] holds star-shaped domains sampled in polar form together
//!   with area, perimeter, Fraenkel asymmetry and isoperimetric deficit.
//! * [`radial`] solves the radial reductions on balls (shooting on the
//!   center value), evaluates ball energies and the annulus/Hamiltonian
//!   structure.
//! * [`fem`] discretizes the energy
//!   `E(u) = 1/2 |grad u|^2 + beta/2 |u|^2_{boundary} - 1/q |u|^q_q`
//!   with linear triangles on a structured polar mesh, minimizes it (with an
//!   optional obstacle `u >= c`) and computes the linear Robin eigenvalue.
//! * [`inequalities`] turns the shape inequalities into deficit reports and
//!   drives sweeps over shape families.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod geometry;
pub mod inequalities;
pub mod io;
pub mod radial;
pub mod report;

pub use error::{Error, Result};
pub use geometry::{Ball, GeoReport, Point, ShapeSpec, StarDomain};
pub use radial::{BallEnergy, BoundaryMode, RadialParams, RadialProfile};
pub use report::{Comparison, InequalityReport, Provenance};
