//! Winding helicity of magnetic fields between two horizontal planes.
//!
//! The crate computes the winding helicity of a gridded field in two
//! algebraically independent ways (the winding-gauge contraction and the
//! pairwise winding-rate double sum), splits it into self and mutual parts
//! over labeled subdomains, evaluates the thin-tube closed forms, and
//! integrates self/mutual helicity flux through a plane from footpoint
//! motions.
//!
//! Module map:
//!
//! * [`grid`]: uniform grids, vector fields, the WH3D file format, sampling
//!   and diagnostics.
//! * [`analytic`]: generated oracle fields and curves.
//! * [`fieldline`]: RK4 field-line tracing and monotone partitioning.
//! * [`winding`]: pairwise winding of curves, including turning points.
//! * [`labeling`]: open/closed subdomain masks and the WHMSK format.
//! * [`helicity`]: winding gauge, helicity quadratures, decomposition.
//! * [`thin_tube`]: closed-form thin-tube and arch formulas.
//! * [`flux`]: helicity flux through a plane and the C-field diagnostic.
//! * [`cli`]: the `winding-helicity` command-line front end.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fieldline;
pub mod flux;
pub mod geom;
pub mod grid;
mod header;
pub mod helicity;
pub mod labeling;
pub mod report;
pub mod sum;
pub mod thin_tube;
pub mod winding;

pub use error::{Error, Result};
