//! Numerical toolkit for convex billiards close to the unit disk.
//!
//! The crate covers the boundary geometry of r(θ) = 1 + τ f(θ) (and exact ellipses), the
//! billiard map and its lift, q-loop functions and their critical points, length-spectrum
//! bands, Melnikov functions of linear deformations, and oscillatory-integral diagnostics.

pub mod billiard;
pub mod deform;
pub mod domain;
pub mod error;
pub mod export;
pub mod geometry;
pub mod loops;
pub mod osc;
pub mod quad;
pub mod roots;
pub mod settings;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{build_boundary, BoundaryCurve, FourierProfile, Profile};
pub use settings::Settings;
