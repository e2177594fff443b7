//! Immersed hypersurfaces: fundamental forms, shape operator, umbilicity, and the
//! decomposition `xi = T + nu N` of the ambient unit Killing field.
//!
//! Sign conventions: the unit normal `N` completes the tangent frame
//! `(dS(e_1), .., dS(e_{d-1}), N)` to a positively oriented frame (flipped when the
//! immersion asks for it), `h(X, Y) = <nabla_X dS(Y), N>` and `S X = -nabla_X N`, so
//! `h(X, Y) = <S X, Y>`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chart::{cartesian, MetricChart};
use crate::error::{Error, Result};
use crate::format::num;
use crate::field::{covariant_matrix_at, killing_defect, KillingReport, VectorFieldSpec};

/// Relative (to the parameter box width) step for parameter-space differences.
pub const PARAM_FD_STEP: f64 = 1e-4;

pub type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
pub type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImmersionKind {
    Slice,
    VerticalLift,
    ProfileBuilt,
    LevelX,
    FlowSweep,
    Custom,
}

/// What a constructor predicts about the surface it built.
#[derive(Clone)]
pub enum Expectation {
    None,
    /// Umbilical with the given factor as a function of the parameters.
    Umbilical(Arc<ScalarFn>),
    TotallyGeodesic,
    /// Coordinate level surface: geodesic verdict and `det S`.
    Level {
        totally_geodesic: bool,
        extrinsic_curvature: f64,
    },
}

impl fmt::Debug for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => write!(f, "None"),
            Self::Umbilical(_) => write!(f, "Umbilical(..)"),
            Self::TotallyGeodesic => write!(f, "TotallyGeodesic"),
            Self::Level {
                totally_geodesic,
                extrinsic_curvature,
            } => f
                .debug_struct("Level")
                .field("totally_geodesic", totally_geodesic)
                .field("extrinsic_curvature", extrinsic_curvature)
                .finish(),
        }
    }
}

/// A parametrized hypersurface of a chart.
#[derive(Clone)]
pub struct ImmersionSpec {
    kind: ImmersionKind,
    param_box: Vec<[f64; 2]>,
    map: Arc<MapFn>,
    jacobian: Option<Arc<JacobianFn>>,
    flip_normal: bool,
    expectation: Expectation,
}

impl fmt::Debug for ImmersionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionSpec")
            .field("kind", &self.kind)
            .field("param_box", &self.param_box)
            .field("closed_form_jacobian", &self.jacobian.is_some())
            .field("flip_normal", &self.flip_normal)
            .field("expectation", &self.expectation)
            .finish()
    }
}

impl ImmersionSpec {
    /// General immersion; without a Jacobian, tangents come from centered
    /// differences of `map`.
    pub fn custom(
        param_box: Vec<[f64; 2]>,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jacobian: Option<Arc<JacobianFn>>,
    ) -> Self {
        Self {
            kind: ImmersionKind::Custom,
            param_box,
            map: Arc::new(map),
            jacobian,
            flip_normal: false,
            expectation: Expectation::None,
        }
    }

    /// The coordinate hypersurface `{p[axis] = value}`, parametrized by the remaining
    /// coordinates over the chart box.
    pub fn slice(chart: &MetricChart, axis: usize, value: f64) -> Result<Self> {
        let d = chart.dim();
        if axis >= d {
            return Err(Error::InvalidSpec(format!("axis {axis} on a {d}-dimensional chart")));
        }
        let [lo, hi] = chart.bounds()[axis];
        if !(value >= lo && value <= hi) {
            return Err(Error::out_of_domain(chart.coordinate_names()[axis].clone(), value, lo, hi));
        }
        let param_box: Vec<[f64; 2]> = (0..d).filter(|&i| i != axis).map(|i| chart.bounds()[i]).collect();
        let insert = move |q: &[f64]| -> Vec<f64> {
            let mut p = q.to_vec();
            p.insert(axis, value);
            p
        };
        let jac = move |_q: &[f64]| -> Vec<Vec<f64>> {
            (0..d)
                .filter(|&i| i != axis)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect()
        };
        let kind = if axis == 0 { ImmersionKind::Slice } else { ImmersionKind::VerticalLift };
        Ok(Self {
            kind,
            param_box,
            map: Arc::new(insert),
            jacobian: Some(Arc::new(jac)),
            flip_normal: false,
            expectation: Expectation::None,
        })
    }

    /// Graph `p[axis] = height(q)` over the other coordinates. `height` returns the
    /// value and its gradient.
    pub fn graph(
        chart: &MetricChart,
        axis: usize,
        param_box: Vec<[f64; 2]>,
        height: impl Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = chart.dim();
        if axis >= d || param_box.len() + 1 != d {
            return Err(Error::Dimension {
                expected: d - 1,
                got: param_box.len(),
            });
        }
        let height = Arc::new(height);
        let h2 = height.clone();
        let map = move |q: &[f64]| -> Vec<f64> {
            let mut p = q.to_vec();
            p.insert(axis, height(q).0);
            p
        };
        let jac = move |q: &[f64]| -> Vec<Vec<f64>> {
            let grad = h2(q).1;
            let others: Vec<usize> = (0..d).filter(|&i| i != axis).collect();
            others
                .iter()
                .enumerate()
                .map(|(a, &i)| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e[axis] = grad[a];
                    e
                })
                .collect()
        };
        Ok(Self {
            kind: ImmersionKind::Custom,
            param_box,
            map: Arc::new(map),
            jacobian: Some(Arc::new(jac)),
            flip_normal: false,
            expectation: Expectation::None,
        })
    }

    pub fn with_kind(mut self, kind: ImmersionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_param_box(mut self, param_box: Vec<[f64; 2]>) -> Self {
        self.param_box = param_box;
        self
    }

    pub fn with_expectation(mut self, expectation: Expectation) -> Self {
        self.expectation = expectation;
        self
    }

    /// Same immersion with the opposite unit normal.
    pub fn flipped(mut self) -> Self {
        self.flip_normal = !self.flip_normal;
        self
    }

    pub fn kind(&self) -> ImmersionKind {
        self.kind
    }

    pub fn param_box(&self) -> &[[f64; 2]] {
        &self.param_box
    }

    pub fn expectation(&self) -> &Expectation {
        &self.expectation
    }

    pub fn normal_flipped(&self) -> bool {
        self.flip_normal
    }

    pub fn point(&self, q: &[f64]) -> Vec<f64> {
        (self.map)(q)
    }

    /// `n` samples per parameter axis, inclusive, row-major.
    pub fn param_grid(&self, n: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .param_box
            .iter()
            .map(|b| {
                if n <= 1 {
                    vec![0.5 * (b[0] + b[1])]
                } else {
                    (0..n).map(|i| b[0] + (b[1] - b[0]) * i as f64 / (n - 1) as f64).collect()
                }
            })
            .collect();
        cartesian(&axes)
    }

    fn step(&self, a: usize) -> f64 {
        let b = self.param_box[a];
        PARAM_FD_STEP * (b[1] - b[0]).max(1e-3)
    }

    /// Tangent vectors `dS(e_a)` in chart components.
    pub fn tangents(&self, q: &[f64]) -> Vec<Vec<f64>> {
        if let Some(j) = &self.jacobian {
            return j(q);
        }
        (0..q.len())
            .map(|a| {
                let h = 0.1 * self.step(a);
                let mut qa = q.to_vec();
                let mut qb = q.to_vec();
                qa[a] += h;
                qb[a] -= h;
                let (pa, pb) = ((self.map)(&qa), (self.map)(&qb));
                pa.iter().zip(&pb).map(|(x, y)| (x - y) / (2.0 * h)).collect()
            })
            .collect()
    }

    fn check_params(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.param_box.len() {
            return Err(Error::Dimension {
                expected: self.param_box.len(),
                got: q.len(),
            });
        }
        for (i, (x, b)) in q.iter().zip(&self.param_box).enumerate() {
            if !(*x >= b[0] && *x <= b[1]) {
                return Err(Error::out_of_domain(format!("q{i}"), *x, b[0], b[1]));
            }
        }
        Ok(())
    }
}

/// Point, tangents, first fundamental form and unit normal.
#[derive(Debug, Clone, PartialEq)]
struct Frame {
    point: Vec<f64>,
    tangents: Vec<Vec<f64>>,
    first: DMatrix<f64>,
    normal: Vec<f64>,
}

fn frame_unchecked(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<Frame> {
    let d = chart.dim();
    let point = imm.point(q);
    let tangents = imm.tangents(q);
    if tangents.len() + 1 != d || tangents.iter().any(|t| t.len() != d) {
        return Err(Error::Dimension {
            expected: d - 1,
            got: tangents.len(),
        });
    }
    let jm = DMatrix::from_fn(d, d - 1, |i, a| tangents[a][i]);
    let smallest = jm.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > 1e-8) {
        return Err(Error::RankDeficient(q.to_vec()));
    }
    let g = chart.metric_unchecked(&point);
    let first = jm.transpose() * &g * &jm;
    // covector n(v) = det[t_1, .., t_{d-1}, v]
    let cofactor: Vec<f64> = (0..d)
        .map(|i| {
            let mut m = DMatrix::zeros(d, d);
            m.view_mut((0, 0), (d, d - 1)).copy_from(&jm);
            m[(i, d - 1)] = 1.0;
            m.determinant()
        })
        .collect();
    let ginv = g.clone().try_inverse().expect("metric is positive definite");
    let raised = &ginv * DVector::from_vec(cofactor);
    let len = chart.norm(&point, raised.as_slice());
    let sign = if imm.flip_normal { -1.0 } else { 1.0 };
    let normal = raised.iter().map(|x| sign * x / len).collect();
    Ok(Frame {
        point,
        tangents,
        first,
        normal,
    })
}

fn frame_at(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<Frame> {
    imm.check_params(q)?;
    let point = imm.point(q);
    chart.check_point(&point)?;
    frame_unchecked(chart, imm, q)
}

/// Unit normal at the parameters `q`.
pub fn normal_at(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<Vec<f64>> {
    Ok(frame_at(chart, imm, q)?.normal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub params: Vec<f64>,
    pub point: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    /// First fundamental form in the parameter frame.
    pub first: DMatrix<f64>,
    pub normal: Vec<f64>,
    /// Second fundamental form in the parameter frame.
    pub second: DMatrix<f64>,
    /// `I^-1 II`
    pub shape: DMatrix<f64>,
}

impl FundamentalForms {
    /// Eigenvalues of the shape operator in increasing order.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let l = self
            .first
            .clone()
            .cholesky()
            .expect("first fundamental form is positive definite")
            .l();
        let linv = l.try_inverse().expect("triangular factor is invertible");
        let sym = &linv * &self.second * linv.transpose();
        let sym = (&sym + sym.transpose()) * 0.5;
        let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn gauss_kronecker(&self) -> f64 {
        self.shape.determinant()
    }
}

pub fn fundamental_forms_at(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<FundamentalForms> {
    let frame = frame_at(chart, imm, q)?;
    let n = q.len();
    let d = chart.dim();
    let gamma = chart.christoffel_closed(&frame.point);
    // d_a t_b by centered differences of the tangents
    let dt: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|a| {
            let h = imm.step(a);
            let mut qa = q.to_vec();
            let mut qb = q.to_vec();
            qa[a] += h;
            qb[a] -= h;
            let (ta, tb) = (imm.tangents(&qa), imm.tangents(&qb));
            (0..n)
                .map(|b| (0..d).map(|i| (ta[b][i] - tb[b][i]) / (2.0 * h)).collect())
                .collect()
        })
        .collect();
    let mut second = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let gab = gamma.contract(&frame.tangents[a], &frame.tangents[b]);
            let acc: Vec<f64> = (0..d).map(|i| dt[a][b][i] + gab[i]).collect();
            second[(a, b)] = chart.inner(&frame.point, &acc, &frame.normal);
        }
    }
    let second = (&second + second.transpose()) * 0.5;
    let shape = frame
        .first
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient(q.to_vec()))?
        * &second;
    Ok(FundamentalForms {
        params: q.to_vec(),
        point: frame.point,
        tangents: frame.tangents,
        first: frame.first,
        normal: frame.normal,
        second,
        shape,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicityReport {
    pub params: Vec<Vec<f64>>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// Mean principal curvature per point.
    pub mean_eigenvalue: Vec<f64>,
    /// `max - min` principal curvature per point.
    pub spread: Vec<f64>,
    pub deviation: f64,
    pub max_abs_eigenvalue: f64,
    pub tolerance: f64,
    pub totally_umbilical: bool,
    pub totally_geodesic: bool,
    pub normal_convention: String,
}

pub fn umbilicity_report(chart: &MetricChart, imm: &ImmersionSpec, grid: &[Vec<f64>], tol: f64) -> Result<UmbilicityReport> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty grid".into()));
    }
    let mut eigenvalues = Vec::with_capacity(grid.len());
    let mut mean = Vec::with_capacity(grid.len());
    let mut spread = Vec::with_capacity(grid.len());
    for q in grid {
        let e = fundamental_forms_at(chart, imm, q)?.principal_curvatures();
        mean.push(e.iter().sum::<f64>() / e.len() as f64);
        spread.push(e.last().unwrap() - e.first().unwrap());
        eigenvalues.push(e);
    }
    let deviation = spread.iter().copied().fold(0.0, f64::max);
    let max_abs = eigenvalues
        .iter()
        .flatten()
        .map(|e| e.abs())
        .fold(0.0, f64::max);
    let totally_umbilical = deviation < tol;
    let convention = if imm.flip_normal {
        "N = -(positively oriented completion of the tangent frame); S X = -nabla_X N"
    } else {
        "N = positively oriented completion of the tangent frame; S X = -nabla_X N"
    };
    Ok(UmbilicityReport {
        params: grid.to_vec(),
        eigenvalues,
        mean_eigenvalue: mean,
        spread,
        deviation,
        max_abs_eigenvalue: max_abs,
        tolerance: tol,
        totally_umbilical,
        totally_geodesic: totally_umbilical && max_abs < tol,
        normal_convention: convention.into(),
    })
}

/// `xi = dS(T) + nu N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSplit {
    pub params: Vec<f64>,
    pub point: Vec<f64>,
    /// `T` in the parameter frame.
    pub tangent_params: Vec<f64>,
    /// `dS(T)` in chart components.
    pub tangent: Vec<f64>,
    pub nu: f64,
}

fn split_from_frame(chart: &MetricChart, frame: &Frame, q: &[f64]) -> Result<XiSplit> {
    let xi = chart.xi().ok_or(Error::NoXiField)?;
    let p = &frame.point;
    let nu = chart.inner(p, &xi, &frame.normal);
    let rest: Vec<f64> = xi.iter().zip(&frame.normal).map(|(x, n)| x - nu * n).collect();
    let rhs = DVector::from_iterator(
        frame.tangents.len(),
        frame.tangents.iter().map(|t| chart.inner(p, t, &rest)),
    );
    let tq = frame
        .first
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(q.to_vec()))?
        .solve(&rhs);
    let d = chart.dim();
    let tangent = (0..d)
        .map(|i| frame.tangents.iter().zip(tq.iter()).map(|(t, c)| t[i] * c).sum())
        .collect();
    Ok(XiSplit {
        params: q.to_vec(),
        point: p.clone(),
        tangent_params: tq.iter().copied().collect(),
        tangent,
        nu,
    })
}

pub fn decompose_xi_at(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<XiSplit> {
    let frame = frame_at(chart, imm, q)?;
    split_from_frame(chart, &frame, q)
}

fn split_unchecked(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<XiSplit> {
    let frame = frame_unchecked(chart, imm, q)?;
    split_from_frame(chart, &frame, q)
}

/// Residuals of `nabla_X T = nu S X + (nabla~_X xi)^T` and
/// `X(nu) = -h(X, T) + <nabla~_X xi, N>` over an orthonormal tangent frame. On a
/// product with parallel `xi` the correction terms vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Residual {
    pub tangential: f64,
    pub normal: f64,
}

pub fn lemma1_residual(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<Lemma1Residual> {
    let forms = fundamental_forms_at(chart, imm, q)?;
    let split = decompose_xi_at(chart, imm, q)?;
    let n = q.len();
    let d = chart.dim();
    let p = &forms.point;

    // parameter derivatives of T, nu and I
    let mut dtq = vec![vec![0.0; n]; n]; // dtq[a][c] = d_a T^c
    let mut dnu = vec![0.0; n];
    let mut dfirst = Vec::with_capacity(n);
    for a in 0..n {
        let h = imm.step(a);
        let mut qa = q.to_vec();
        let mut qb = q.to_vec();
        qa[a] += h;
        qb[a] -= h;
        let (sa, sb) = (split_unchecked(chart, imm, &qa)?, split_unchecked(chart, imm, &qb)?);
        for c in 0..n {
            dtq[a][c] = (sa.tangent_params[c] - sb.tangent_params[c]) / (2.0 * h);
        }
        dnu[a] = (sa.nu - sb.nu) / (2.0 * h);
        let (fa, fb) = (frame_unchecked(chart, imm, &qa)?, frame_unchecked(chart, imm, &qb)?);
        dfirst.push((fa.first - fb.first) / (2.0 * h));
    }
    let iinv = forms.first.clone().try_inverse().ok_or_else(|| Error::RankDeficient(q.to_vec()))?;
    // intrinsic Christoffels of the induced metric
    let gamma_hat = |c: usize, a: usize, b: usize| -> f64 {
        0.5 * (0..n)
            .map(|e| iinv[(c, e)] * (dfirst[a][(b, e)] + dfirst[b][(a, e)] - dfirst[e][(a, b)]))
            .sum::<f64>()
    };
    // nabla_{e_a} T in parameter components
    let nabla_t = DMatrix::from_fn(n, n, |c, a| {
        dtq[a][c] + (0..n).map(|b| gamma_hat(c, a, b) * split.tangent_params[b]).sum::<f64>()
    });

    let xi_cov = match chart.xi() {
        Some(_) => covariant_matrix_at(chart, &VectorFieldSpec::Xi, p)?,
        None => return Err(Error::NoXiField),
    };
    let jm = DMatrix::from_fn(d, n, |i, a| forms.tangents[a][i]);
    let g = chart.metric_unchecked(p);

    let l = forms.first.clone().cholesky().ok_or_else(|| Error::RankDeficient(q.to_vec()))?.l();
    let frame = l.transpose().try_inverse().expect("triangular factor is invertible");
    let tvec = DVector::from_vec(split.tangent_params.clone());
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for b in 0..n {
        let x = frame.column(b).into_owned();
        let ambient = &xi_cov * (&jm * &x);
        let ambient_tan = &iinv * (jm.transpose() * &g * &ambient);
        let ambient_nor = chart.inner(p, ambient.as_slice(), &forms.normal);
        let lhs = &nabla_t * &x;
        let rhs = &forms.shape * &x * split.nu + ambient_tan;
        let diff = lhs - rhs;
        r1 = r1.max((diff.transpose() * &forms.first * &diff)[(0, 0)].max(0.0).sqrt());
        let x_nu: f64 = (0..n).map(|a| x[a] * dnu[a]).sum();
        let h_xt = (x.transpose() * &forms.second * &tvec)[(0, 0)];
        r2 = r2.max((x_nu + h_xt - ambient_nor).abs());
    }
    Ok(Lemma1Residual {
        tangential: r1,
        normal: r2,
    })
}

/// `T(nu)`, the derivative of `nu` along the tangential part of `xi`.
pub fn nu_derivative_along_t(chart: &MetricChart, imm: &ImmersionSpec, q: &[f64]) -> Result<f64> {
    let split = decompose_xi_at(chart, imm, q)?;
    let mut acc = 0.0;
    for a in 0..q.len() {
        let h = imm.step(a);
        let mut qa = q.to_vec();
        let mut qb = q.to_vec();
        qa[a] += h;
        qb[a] -= h;
        let d = (split_unchecked(chart, imm, &qa)?.nu - split_unchecked(chart, imm, &qb)?.nu) / (2.0 * h);
        acc += split.tangent_params[a] * d;
    }
    Ok(acc)
}

/// Solves `S(q) + t xi = p` for the surface parameters and flow time.
fn flow_preimage(chart: &MetricChart, imm: &ImmersionSpec, xi: &[f64], p: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = chart.dim();
    let n = d - 1;
    let mut q: Vec<f64> = imm.param_box.iter().map(|b| 0.5 * (b[0] + b[1])).collect();
    let mut t = 0.0;
    for _ in 0..60 {
        let s = imm.point(&q);
        let f = DVector::from_iterator(d, (0..d).map(|i| s[i] + t * xi[i] - p[i]));
        if f.norm() < 1e-14 {
            return Ok((q, t));
        }
        let tan = imm.tangents(&q);
        let jac = DMatrix::from_fn(d, d, |i, a| if a < n { tan[a][i] } else { xi[i] });
        let delta = jac.lu().solve(&f).ok_or(Error::NoConvergence("flow preimage"))?;
        for a in 0..n {
            q[a] -= delta[a];
        }
        t -= delta[n];
        if delta.norm() < 1e-15 {
            return Ok((q, t));
        }
    }
    Err(Error::NoConvergence("flow preimage"))
}

/// Extends `T` off a totally geodesic surface by the flow of `xi` and measures the
/// Killing defect of the extension on `grid3d`.
///
/// The flow of `xi` is a coordinate translation on the charts that carry one.
pub fn extended_t_killing_defect(chart: &MetricChart, imm: &ImmersionSpec, grid3d: &[Vec<f64>], tol: f64) -> Result<KillingReport> {
    let xi = chart.xi().ok_or(Error::NoXiField)?;
    let surface_grid = imm.param_grid(5);
    let report = umbilicity_report(chart, imm, &surface_grid, 1e-6)?;
    if !report.totally_geodesic {
        return Err(Error::NotTotallyGeodesic(report.max_abs_eigenvalue));
    }
    for q in &surface_grid {
        let split = decompose_xi_at(chart, imm, q)?;
        if split.nu.abs() < 1e-8 {
            return Err(Error::TangentToXi(split.point));
        }
    }
    let (c, s) = (chart.clone(), imm.clone());
    let field = VectorFieldSpec::custom(move |p: &[f64]| {
        let (q, _) = flow_preimage(&c, &s, &xi, p)?;
        Ok(split_unchecked(&c, &s, &q)?.tangent)
    });
    killing_defect(chart, &field, grid3d, tol)
}

/// One CSV row per report point: parameters, chart point, mean principal curvature
/// and eigenvalue spread.
pub fn report_csv(chart: &MetricChart, imm: &ImmersionSpec, report: &UmbilicityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..imm.param_box.len()).map(|a| format!("q{a}")).collect();
    header.extend(chart.coordinate_names());
    header.push("lambda_mean".into());
    header.push("deviation".into());
    w.write_record(&header).map_err(csv_error)?;
    for (i, q) in report.params.iter().enumerate() {
        let mut row: Vec<String> = q.iter().map(|x| num(*x)).collect();
        row.extend(imm.point(q).iter().map(|x| num(*x)));
        row.push(num(report.mean_eigenvalue[i]));
        row.push(num(report.spread[i]));
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSpec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidSpec(e.to_string())
}

/// ASCII mesh of a surface over an `n x n` parameter grid: `v x y z` vertex lines
/// followed by `f i j k` triangles with 1-based indices. Points with more than three
/// coordinates keep the first three.
pub fn mesh_ascii(imm: &ImmersionSpec, n: usize) -> Result<String> {
    if imm.param_box.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: imm.param_box.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidSpec("mesh needs at least 2 samples per axis".into()));
    }
    let mut out = String::new();
    for q in imm.param_grid(n) {
        let p = imm.point(&q);
        let c: Vec<String> = p.iter().take(3).map(|x| num(*x)).collect();
        out.push_str(&format!("v {}\n", c.join(" ")));
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let a = i * n + j + 1;
            let (b, c, d) = (a + 1, a + n, a + n + 1);
            out.push_str(&format!("f {a} {b} {d}\nf {a} {d} {c}\n"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Fiber;
    use crate::function::FunctionSpec1D;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn flat3() -> MetricChart {
        MetricChart::warped_product(FunctionSpec1D::constant(1.0), 1, Fiber::Flat).unwrap()
    }

    fn hopf() -> MetricChart {
        MetricChart::theta3(FunctionSpec1D::affine(0.0, 1.0).on(0.05, FRAC_PI_2 - 0.05)).unwrap()
    }

    #[test]
    fn hyperplane_in_flat_space_is_geodesic() {
        let c = flat3();
        let s = ImmersionSpec::slice(&c, 0, 0.0).unwrap();
        let f = fundamental_forms_at(&c, &s, &[0.3, -0.2]).unwrap();
        assert_eq!(f.second, DMatrix::zeros(2, 2));
        let split = decompose_xi_at(&c, &s, &[0.3, -0.2]).unwrap();
        assert_abs_diff_eq!(split.nu.abs(), 1.0, epsilon = 1e-14);
        assert!(split.tangent_params.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn vertical_lift_contains_xi() {
        let c = flat3();
        let s = ImmersionSpec::slice(&c, 1, 0.5).unwrap();
        assert_eq!(s.kind(), ImmersionKind::VerticalLift);
        let split = decompose_xi_at(&c, &s, &[0.1, 0.2]).unwrap();
        assert_abs_diff_eq!(split.nu, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hopf_level_surface_principal_curvatures() {
        let c = hopf();
        let s = ImmersionSpec::slice(&c, 0, FRAC_PI_4).unwrap();
        let f = fundamental_forms_at(&c, &s, &[0.0, 0.0]).unwrap();
        let e = f.principal_curvatures();
        assert_abs_diff_eq!(e[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.gauss_kronecker(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        let c = hopf();
        let s = ImmersionSpec::graph(&c, 2, vec![[0.3, 1.2], [-1.0, 1.0]], |q| {
            (0.2 * q[0] * q[1], vec![0.2 * q[1], 0.2 * q[0]])
        })
        .unwrap();
        let f = fundamental_forms_at(&c, &s, &[0.7, 0.4]).unwrap();
        assert_abs_diff_eq!(c.norm(&f.point, &f.normal), 1.0, epsilon = 1e-12);
        for t in &f.tangents {
            assert_abs_diff_eq!(c.inner(&f.point, t, &f.normal), 0.0, epsilon = 1e-12);
        }
        assert_eq!(f.second, f.second.transpose());
    }

    #[test]
    fn flipping_the_normal_negates_second_form() {
        let c = hopf();
        let s = ImmersionSpec::graph(&c, 2, vec![[0.3, 1.2], [-1.0, 1.0]], |q| {
            (0.1 * q[1] * q[1], vec![0.0, 0.2 * q[1]])
        })
        .unwrap();
        let q = [0.5, 0.3];
        let a = fundamental_forms_at(&c, &s, &q).unwrap();
        let b = fundamental_forms_at(&c, &s.clone().flipped(), &q).unwrap();
        assert_eq!(a.first, b.first);
        assert!((a.second.clone() + b.second.clone()).abs().max() < 1e-14);
        let (sa, sb) = (decompose_xi_at(&c, &s, &q).unwrap(), decompose_xi_at(&c, &s.flipped(), &q).unwrap());
        assert_abs_diff_eq!(sa.nu, -sb.nu, epsilon = 1e-14);
        for (x, y) in sa.tangent_params.iter().zip(&sb.tangent_params) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn coordinate_planes_of_normal_form_are_geodesic() {
        let c = MetricChart::theta3(FunctionSpec1D::sine_affine(FRAC_PI_4, 0.2, 1.0, 0.0)).unwrap();
        for axis in [1, 2] {
            let s = ImmersionSpec::slice(&c, axis, 0.0).unwrap();
            let r = umbilicity_report(&c, &s, &s.param_grid(5), 1e-10).unwrap();
            assert!(r.totally_geodesic);
            assert!(r.totally_umbilical);
        }
    }

    #[test]
    fn mesh_and_csv_exports() {
        let c = flat3();
        let s = ImmersionSpec::slice(&c, 0, 0.0).unwrap().with_param_box(vec![[0.0, 1.0], [0.0, 1.0]]);
        let m = mesh_ascii(&s, 3).unwrap();
        assert_eq!(m.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(m.lines().filter(|l| l.starts_with("f ")).count(), 8);
        assert!(m.starts_with("v 0 0 0\nv 0 0 0.5\n"));
        let grid = s.param_grid(2);
        let r = umbilicity_report(&c, &s, &grid, 1e-8).unwrap();
        let csv = report_csv(&c, &s, &r).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "q0,q1,x0,x1,u1,lambda_mean,deviation");
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn rank_deficient_immersion() {
        let c = flat3();
        let s = ImmersionSpec::custom(vec![[-1.0, 1.0], [-1.0, 1.0]], |q| vec![q[0], q[0], 0.0], None);
        assert!(matches!(
            fundamental_forms_at(&c, &s, &[0.0, 0.0]),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn lemma1_on_flat_slice_is_zero() {
        let c = flat3();
        let s = ImmersionSpec::slice(&c, 0, 1.0).unwrap();
        let r = lemma1_residual(&c, &s, &[0.2, 0.3]).unwrap();
        assert!(r.tangential < 1e-12 && r.normal < 1e-12);
    }

    #[test]
    fn extended_t_on_coordinate_plane_is_coordinate_field() {
        let c = MetricChart::theta3(FunctionSpec1D::sine_affine(FRAC_PI_4, 0.1, 1.0, 0.0)).unwrap();
        let s = ImmersionSpec::slice(&c, 2, 0.0).unwrap();
        let q = [0.4, 0.7];
        let split = decompose_xi_at(&c, &s, &q).unwrap();
        assert_abs_diff_eq!(split.tangent[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(split.tangent[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(split.tangent[2], 0.0, epsilon = 1e-14);
        let grid = c.sample_grid_inset(3, 0.2);
        let r = extended_t_killing_defect(&c, &s, &grid, 1e-10).unwrap();
        assert!(r.is_killing, "{}", r.max_defect);
    }

    #[test]
    fn extended_t_requires_geodesic_surface() {
        let c = MetricChart::theta3(FunctionSpec1D::sine_affine(FRAC_PI_4, 0.1, 1.0, 0.0)).unwrap();
        let s = ImmersionSpec::graph(&c, 2, vec![[-1.0, 1.0], [-1.0, 1.0]], |q| (0.1 * q[1], vec![0.0, 0.1])).unwrap();
        let grid = c.sample_grid_inset(3, 0.2);
        assert!(matches!(
            extended_t_killing_defect(&c, &s, &grid, 1e-10),
            Err(Error::NotTotallyGeodesic(_))
        ));
    }
}
