//! Boundary representation, tables and curvature functionals.

mod curve;
mod functionals;
mod profile;

pub use curve::{wrap_angle, BoundaryCurve, Frame, PolarJet};
pub use functionals::{
    circularity, curvature_derivatives, curvature_functionals, CircularityReport, CurvatureFunctionals,
    MAX_DERIVATIVE_ORDER,
};
pub use profile::{FourierProfile, Profile};
pub(crate) use profile::sinc;

use crate::error::Result;

/// Builds the boundary of r(θ) = 1 + τ f(θ) with `grid_size` table nodes.
pub fn build_boundary(profile: impl Into<Profile>, tau: f64, grid_size: usize) -> Result<BoundaryCurve> {
    BoundaryCurve::new(profile.into(), tau, grid_size)
}
