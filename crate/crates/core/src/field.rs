//! Vector-field diagnostics: covariant derivatives, Killing and closed-conformal
//! defects, and the twist function of a unit Killing field in dimension three.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::{fd_step, MetricChart};
use crate::error::{Error, Result};
use crate::function::FunctionSpec1D;

/// Gate applied before the twist function is extracted.
pub const UNIT_KILLING_TOL: f64 = 1e-6;

type FieldFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A vector field on a chart.
#[derive(Clone)]
pub enum VectorFieldSpec {
    /// The coordinate field `d/dx_i`.
    Coordinate(usize),
    /// The chart's distinguished unit Killing field (see [`MetricChart::xi`]).
    Xi,
    /// `sum_i c_i(p[axis]) d/dx_i`.
    LinearCombination {
        axis: usize,
        coefficients: Vec<FunctionSpec1D>,
    },
    /// Arbitrary components; derivatives are taken by centered differences.
    Custom(Arc<FieldFn>),
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Coordinate(i) => write!(f, "Coordinate({i})"),
            Self::Xi => write!(f, "Xi"),
            Self::LinearCombination { axis, coefficients } => f
                .debug_struct("LinearCombination")
                .field("axis", axis)
                .field("coefficients", coefficients)
                .finish(),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl VectorFieldSpec {
    pub fn custom(f: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn zero(dim: usize) -> Self {
        Self::LinearCombination {
            axis: 0,
            coefficients: vec![FunctionSpec1D::constant(0.0); dim],
        }
    }

    fn check(&self, chart: &MetricChart) -> Result<()> {
        let d = chart.dim();
        match self {
            Self::Coordinate(i) if *i >= d => Err(Error::InvalidSpec(format!(
                "coordinate field {i} on a {d}-dimensional chart"
            ))),
            Self::LinearCombination { axis, coefficients } if *axis >= d || coefficients.len() != d => {
                Err(Error::Dimension {
                    expected: d,
                    got: coefficients.len(),
                })
            }
            Self::Xi if chart.xi().is_none() => Err(Error::NoXiField),
            _ => Ok(()),
        }
    }

    /// Components at `p`.
    pub fn components(&self, chart: &MetricChart, p: &[f64]) -> Result<Vec<f64>> {
        self.check(chart)?;
        let d = chart.dim();
        Ok(match self {
            Self::Coordinate(i) => {
                let mut v = vec![0.0; d];
                v[*i] = 1.0;
                v
            }
            Self::Xi => chart.xi().expect("checked"),
            Self::LinearCombination { axis, coefficients } => coefficients
                .iter()
                .map(|c| c.eval_unchecked(p[*axis], 0))
                .collect(),
            Self::Custom(f) => {
                let v = f(p)?;
                if v.len() != d {
                    return Err(Error::Dimension {
                        expected: d,
                        got: v.len(),
                    });
                }
                v
            }
        })
    }

    /// Partial derivatives `J[i][j] = d_j V^i`.
    pub fn partials(&self, chart: &MetricChart, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check(chart)?;
        let d = chart.dim();
        Ok(match self {
            Self::Coordinate(_) | Self::Xi => DMatrix::zeros(d, d),
            Self::LinearCombination { axis, coefficients } => {
                let mut m = DMatrix::zeros(d, d);
                for (i, c) in coefficients.iter().enumerate() {
                    m[(i, *axis)] = c.eval_unchecked(p[*axis], 1);
                }
                m
            }
            Self::Custom(_) => {
                let mut m = DMatrix::zeros(d, d);
                for j in 0..d {
                    let h = fd_step(p[j]);
                    let mut a = p.to_vec();
                    let mut b = p.to_vec();
                    a[j] += h;
                    b[j] -= h;
                    let (va, vb) = (self.components(chart, &a)?, self.components(chart, &b)?);
                    for i in 0..d {
                        m[(i, j)] = (va[i] - vb[i]) / (2.0 * h);
                    }
                }
                m
            }
        })
    }
}

/// `nabla V` in the coordinate frame: column `j` is `nabla_{d_j} V`.
pub fn covariant_matrix_at(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64]) -> Result<DMatrix<f64>> {
    chart.check_point(p)?;
    let d = chart.dim();
    let v = field.components(chart, p)?;
    let mut m = field.partials(chart, p)?;
    let gamma = chart.christoffel_closed(p);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] += (0..d).map(|k| gamma.get(i, j, k) * v[k]).sum::<f64>();
        }
    }
    Ok(m)
}

/// Rewrites a coordinate-frame endomorphism in a `g`-orthonormal frame.
fn to_orthonormal(g: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let l = g
        .clone()
        .cholesky()
        .expect("metric is positive definite")
        .l();
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    // frame e = L^-T, components of M e in that frame: L^T M L^-T
    l.transpose() * m * linv.transpose()
}

fn killing_defect_at(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64]) -> Result<f64> {
    let m = covariant_matrix_at(chart, field, p)?;
    let g = chart.metric_unchecked(p);
    let a = to_orthonormal(&g, &m);
    let sym = &a + a.transpose();
    Ok(sym
        .symmetric_eigenvalues()
        .iter()
        .map(|e| e.abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingReport {
    pub points: Vec<Vec<f64>>,
    pub defects: Vec<f64>,
    /// Largest operator norm of the symmetrized covariant derivative.
    pub max_defect: f64,
    pub tolerance: f64,
    pub is_killing: bool,
}

pub fn killing_defect(chart: &MetricChart, field: &VectorFieldSpec, grid: &[Vec<f64>], tol: f64) -> Result<KillingReport> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty grid".into()));
    }
    let defects = grid
        .iter()
        .map(|p| killing_defect_at(chart, field, p))
        .collect::<Result<Vec<_>>>()?;
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    Ok(KillingReport {
        points: grid.to_vec(),
        defects,
        max_defect,
        tolerance: tol,
        is_killing: max_defect < tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub points: Vec<Vec<f64>>,
    /// Estimated factor `trace(nabla V) / d` per point.
    pub phi: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub is_closed_conformal: bool,
}

pub fn closed_conformal_defect(chart: &MetricChart, field: &VectorFieldSpec, grid: &[Vec<f64>], tol: f64) -> Result<ConformalReport> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty grid".into()));
    }
    let d = chart.dim();
    let mut phi = Vec::with_capacity(grid.len());
    let mut residuals = Vec::with_capacity(grid.len());
    for p in grid {
        let m = covariant_matrix_at(chart, field, p)?;
        let f = m.trace() / d as f64;
        let g = chart.metric_unchecked(p);
        let dev = to_orthonormal(&g, &(m - DMatrix::identity(d, d) * f));
        let r = (0..d).map(|j| dev.column(j).norm()).fold(0.0, f64::max);
        phi.push(f);
        residuals.push(r);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ConformalReport {
        points: grid.to_vec(),
        phi,
        residuals,
        max_residual,
        tolerance: tol,
        is_closed_conformal: max_residual < tol,
    })
}

/// Cross product on a three-dimensional chart, oriented by the coordinate order.
pub fn cross_at(chart: &MetricChart, p: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if chart.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: chart.dim(),
        });
    }
    let g = chart.metric_unchecked(p);
    let vol = g.determinant().sqrt();
    let lowered = [
        vol * (u[1] * v[2] - u[2] * v[1]),
        vol * (u[2] * v[0] - u[0] * v[2]),
        vol * (u[0] * v[1] - u[1] * v[0]),
    ];
    let ginv = g.try_inverse().expect("metric is positive definite");
    Ok((0..3)
        .map(|i| (0..3).map(|j| ginv[(i, j)] * lowered[j]).sum())
        .collect())
}

fn gate_unit_killing(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64]) -> Result<Vec<f64>> {
    if chart.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: chart.dim(),
        });
    }
    chart.check_point(p)?;
    let xi = field.components(chart, p)?;
    let norm_defect = (chart.norm(p, &xi) - 1.0).abs();
    let killing = killing_defect_at(chart, field, p)?;
    if norm_defect > UNIT_KILLING_TOL || killing > UNIT_KILLING_TOL {
        return Err(Error::NotUnitKilling {
            point: p.to_vec(),
            norm_defect,
            killing_defect: killing,
        });
    }
    Ok(xi)
}

/// Twist `tau` of a unit Killing field, `nabla_X xi = tau (X x xi)`, evaluated with
/// the frame vector `e` (projected orthogonally to `xi` and normalized).
pub fn tau_at_with(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64], e: &[f64]) -> Result<f64> {
    let xi = gate_unit_killing(chart, field, p)?;
    let along = chart.inner(p, e, &xi);
    let perp: Vec<f64> = e.iter().zip(&xi).map(|(a, b)| a - along * b).collect();
    let n = chart.norm(p, &perp);
    if n < 1e-8 {
        return Err(Error::DegenerateFrame);
    }
    let e: Vec<f64> = perp.iter().map(|x| x / n).collect();
    let m = covariant_matrix_at(chart, field, p)?;
    let nabla_e: Vec<f64> = (0..3).map(|i| (0..3).map(|j| m[(i, j)] * e[j]).sum()).collect();
    let exi = cross_at(chart, p, &e, &xi)?;
    Ok(chart.inner(p, &nabla_e, &exi))
}

/// Twist `tau` with the frame vector taken from the coordinate basis.
pub fn tau_at(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64]) -> Result<f64> {
    let xi = gate_unit_killing(chart, field, p)?;
    let best = (0..3)
        .map(|i| {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let along = chart.inner(p, &e, &xi);
            let perp: Vec<f64> = e.iter().zip(&xi).map(|(a, b)| a - along * b).collect();
            let n = chart.norm(p, &perp);
            (n, perp)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::DegenerateFrame)?;
    tau_at_with(chart, field, p, &best.1)
}

/// `xi(tau)` by a centered difference along the field.
pub fn tau_derivative_along_field(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64]) -> Result<f64> {
    let xi = field.components(chart, p)?;
    let h = 1e-4;
    let a: Vec<f64> = p.iter().zip(&xi).map(|(x, v)| x + h * v).collect();
    let b: Vec<f64> = p.iter().zip(&xi).map(|(x, v)| x - h * v).collect();
    Ok((tau_at(chart, field, &a)? - tau_at(chart, field, &b)?) / (2.0 * h))
}

/// `[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i`.
pub fn lie_bracket_at(chart: &MetricChart, x: &VectorFieldSpec, y: &VectorFieldSpec, p: &[f64]) -> Result<Vec<f64>> {
    chart.check_point(p)?;
    let d = chart.dim();
    let (xv, yv) = (x.components(chart, p)?, y.components(chart, p)?);
    let (dx, dy) = (x.partials(chart, p)?, y.partials(chart, p)?);
    Ok((0..d)
        .map(|i| (0..d).map(|j| xv[j] * dy[(i, j)] - yv[j] * dx[(i, j)]).sum())
        .collect())
}
