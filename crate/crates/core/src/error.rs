use thiserror::Error;

/// Errors raised by the geometry, construction and check routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfDomain {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("derivative order {0} is not supported (max 4)")]
    UnsupportedOrder(usize),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("unsupported schema version {0} (expected 1)")]
    Schema(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("tangent vectors span a degenerate plane (|v1 ^ v2| = {0:e})")]
    DegeneratePlane(f64),
    #[error("vector is not unit length: |v| = {0}")]
    NotUnit(f64),
    #[error("field is not a unit Killing field at {point:?} (|xi| - 1 = {norm_defect:e}, Killing defect = {killing_defect:e})")]
    NotUnitKilling {
        point: Vec<f64>,
        norm_defect: f64,
        killing_defect: f64,
    },
    #[error("no frame vector orthogonal to the field could be found")]
    DegenerateFrame,
    #[error("immersion Jacobian is rank deficient at {0:?}")]
    RankDeficient(Vec<f64>),
    #[error("surface is not totally geodesic (max |S| = {0:e})")]
    NotTotallyGeodesic(f64),
    #[error("xi is tangent to the surface at {0:?}")]
    TangentToXi(Vec<f64>),
    #[error("conserved quantity drifted by {drift:e} at s = {s} (step {step})")]
    ConservationBreach { drift: f64, s: f64, step: f64 },
    #[error("profile warping function differs from the chart warping function")]
    MismatchedWarping,
    #[error("warping function is not positive at t = {0}")]
    NonPositiveWarping(f64),
    #[error("twist function is nonzero ({tau:e}) along the geodesic at s = {s}")]
    TauNonzeroOnGeodesic { s: f64, tau: f64 },
    #[error("direction is not orthogonal to xi (<dir, xi> = {0:e})")]
    NotOrthogonal(f64),
    #[error("vector is not horizontal (<v, xi> = {0:e})")]
    NotHorizontal(f64),
    #[error("the field has no xi direction on this chart")]
    NoXiField,
    #[error("{what}: closed form {closed} disagrees with numeric {numeric}")]
    CrossCheck {
        what: &'static str,
        closed: f64,
        numeric: f64,
    },
    #[error("iteration failed to converge: {0}")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn out_of_domain(what: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Error::OutOfDomain {
            what: what.into(),
            value,
            lo,
            hi,
        }
    }
}
