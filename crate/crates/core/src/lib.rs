//! Numerical construction and verification of totally umbilical hypersurfaces in
//! warped products and of totally geodesic surfaces in three-manifolds carrying a
//! unit Killing field.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod cli;
pub mod constructor;
pub mod curvature;
pub mod error;
pub mod field;
pub mod format;
pub mod function;
pub mod geodesic;
pub mod hypersurface;
pub mod presets;
pub mod structure;

pub use chart::{ChartKind, Christoffel, ChristoffelMethod, Fiber, MetricChart};
pub use error::{Error, Result};
pub use function::{DerivativeQuality, FunctionForm, FunctionSpec1D};
