//! Coordinate metric charts and their Levi-Civita connections.
//!
//! Every supported chart is diagonal and separable: each diagonal entry is a product
//! of squared single-variable factors, `g_ii(p) = prod_k w_ik(p_k)^2`. That covers
//! warped products over flat or round fibers, the `dx^2 + sin^2(theta) dy^2 +
//! cos^2(theta) dz^2` normal form, its two-dimensional submersion base and their
//! conformal rescalings, and gives exact metric partials for the closed-form
//! Christoffel symbols.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::FunctionSpec1D;

/// Relative step used by every centered-difference stencil on chart coordinates.
pub const FD_STEP: f64 = 1e-4;

pub(crate) fn fd_step(x: f64) -> f64 {
    FD_STEP * x.abs().max(1.0)
}

const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fiber {
    Flat,
    RoundUnitSphere,
}

/// The supported metric families.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    /// `dx0^2 + dx1^2 + f(x1)^2 g_fiber` on `(x0, x1, u1..um)`.
    WarpedProduct {
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
    /// `dx^2 + sin^2(theta(x)) dy^2 + cos^2(theta(x)) dz^2` on `(x, y, z)`.
    Theta3 { theta: FunctionSpec1D },
    /// `du^2 + 1/4 sin^2(2 theta(u)) dv^2` on `(u, v)`.
    Base2 { theta: FunctionSpec1D },
    /// `dx^2 + a(x)^2 dy^2 + b(x)^2 dz^2`.
    DiagonalAxis { a: FunctionSpec1D, b: FunctionSpec1D },
    /// `h(s)^2 (ds^2 + dx1^2 + f(x1)^2 g_fiber)` on `(s, x1, u1..um)`.
    ConformalProduct {
        factor: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
    /// `dt^2 + F(t)^2 (dx1^2 + f(x1)^2 g_fiber)` on `(t, x1, u1..um)`.
    WarpedOverWarped {
        outer: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Factor {
    Of(FunctionSpec1D),
    SinOf(FunctionSpec1D),
    CosOf(FunctionSpec1D),
    HalfSinDoubleOf(FunctionSpec1D),
    Sin,
}

impl Factor {
    fn value_slope(&self, x: f64) -> (f64, f64) {
        match self {
            Factor::Of(f) => (f.eval_unchecked(x, 0), f.eval_unchecked(x, 1)),
            Factor::SinOf(t) => {
                let (th, d) = (t.eval_unchecked(x, 0), t.eval_unchecked(x, 1));
                (th.sin(), th.cos() * d)
            }
            Factor::CosOf(t) => {
                let (th, d) = (t.eval_unchecked(x, 0), t.eval_unchecked(x, 1));
                (th.cos(), -th.sin() * d)
            }
            Factor::HalfSinDoubleOf(t) => {
                let (th, d) = (t.eval_unchecked(x, 0), t.eval_unchecked(x, 1));
                (0.5 * (2.0 * th).sin(), (2.0 * th).cos() * d)
            }
            Factor::Sin => (x.sin(), x.cos()),
        }
    }
}

/// Levi-Civita connection coefficients `Gamma^k_ij` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gamma^k_ij`
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let d = self.dim;
        self.data[(k * d + i) * d + j] = v;
    }

    fn set_sym(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.set(k, i, j, v);
        self.set(k, j, i, v);
    }

    /// `Gamma(u, v)^k = Gamma^k_ij u^i v^j`
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        acc += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChristoffelMethod {
    ClosedForm,
    FiniteDifference,
}

/// A coordinate chart together with its metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartRepr", into = "ChartRepr")]
pub struct MetricChart {
    kind: ChartKind,
    bounds: Vec<[f64; 2]>,
    factors: Vec<Vec<(usize, Factor)>>,
}

impl MetricChart {
    pub fn warped_product(warp: FunctionSpec1D, fiber_dim: usize, fiber: Fiber) -> Result<Self> {
        Self::build(ChartKind::WarpedProduct {
            warp,
            fiber_dim,
            fiber,
        })
    }

    pub fn theta3(theta: FunctionSpec1D) -> Result<Self> {
        Self::build(ChartKind::Theta3 { theta })
    }

    pub fn base2(theta: FunctionSpec1D) -> Result<Self> {
        Self::build(ChartKind::Base2 { theta })
    }

    pub fn diagonal_axis(a: FunctionSpec1D, b: FunctionSpec1D) -> Result<Self> {
        Self::build(ChartKind::DiagonalAxis { a, b })
    }

    pub fn conformal_product(
        factor: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    ) -> Result<Self> {
        Self::build(ChartKind::ConformalProduct {
            factor,
            warp,
            fiber_dim,
            fiber,
        })
    }

    pub fn warped_over_warped(
        outer: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    ) -> Result<Self> {
        Self::build(ChartKind::WarpedOverWarped {
            outer,
            warp,
            fiber_dim,
            fiber,
        })
    }

    /// Replaces the coordinate box and re-runs the construction checks.
    pub fn with_bounds(self, bounds: Vec<[f64; 2]>) -> Result<Self> {
        Self::build_with(self.kind, Some(bounds))
    }

    fn build(kind: ChartKind) -> Result<Self> {
        Self::build_with(kind, None)
    }

    fn build_with(kind: ChartKind, bounds: Option<Vec<[f64; 2]>>) -> Result<Self> {
        let factors = factors_for(&kind)?;
        let dim = factors.len();
        let bounds = match bounds {
            Some(b) => {
                if b.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: b.len(),
                    });
                }
                b
            }
            None => default_bounds(&kind),
        };
        for (i, b) in bounds.iter().enumerate() {
            if !(b[0] < b[1]) || !b[0].is_finite() || !b[1].is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "coordinate {i} has invalid bounds [{}, {}]",
                    b[0], b[1]
                )));
            }
        }
        let chart = Self {
            kind,
            bounds,
            factors,
        };
        chart.validate()?;
        Ok(chart)
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bounds[0];
        let axis: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
        match &self.kind {
            ChartKind::Theta3 { theta } | ChartKind::Base2 { theta } => {
                check_covers(theta, lo, hi, "theta")?;
                for &x in &axis {
                    let t = theta.eval_unchecked(x, 0);
                    if !(t > 0.0 && t < std::f64::consts::FRAC_PI_2) {
                        return Err(Error::InvalidSpec(format!(
                            "theta({x}) = {t} leaves (0, pi/2)"
                        )));
                    }
                }
            }
            ChartKind::WarpedProduct { warp, .. } => {
                let [a, b] = self.bounds[1];
                positive_on(warp, a, b, "warp")?;
            }
            ChartKind::DiagonalAxis { a, b } => {
                check_covers(a, lo, hi, "a")?;
                check_covers(b, lo, hi, "b")?;
            }
            ChartKind::ConformalProduct { factor, warp, .. } => {
                positive_on(factor, lo, hi, "factor")?;
                let [a, b] = self.bounds[1];
                positive_on(warp, a, b, "warp")?;
            }
            ChartKind::WarpedOverWarped { outer, warp, .. } => {
                positive_on(outer, lo, hi, "outer")?;
                let [a, b] = self.bounds[1];
                positive_on(warp, a, b, "warp")?;
            }
        }
        if let ChartKind::WarpedProduct { fiber_dim, fiber, .. }
        | ChartKind::ConformalProduct { fiber_dim, fiber, .. }
        | ChartKind::WarpedOverWarped { fiber_dim, fiber, .. } = &self.kind
        {
            if *fiber == Fiber::RoundUnitSphere && *fiber_dim == 2 {
                let [a, b] = self.bounds[2];
                if a <= 0.0 || b >= std::f64::consts::PI {
                    return Err(Error::InvalidSpec(
                        "polar fiber coordinate must stay inside (0, pi)".into(),
                    ));
                }
            }
        }
        // positive definiteness on a 5^d sample grid
        for p in self.sample_grid(5) {
            let g = self.metric_unchecked(&p);
            if g.cholesky().is_none() {
                return Err(Error::NotPositiveDefinite(p));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        let fibered = |first: &str, m: usize| {
            let mut v = vec![first.to_string(), "x1".to_string()];
            v.extend((1..=m).map(|i| format!("u{i}")));
            v
        };
        match &self.kind {
            ChartKind::WarpedProduct { fiber_dim, .. } => fibered("x0", *fiber_dim),
            ChartKind::ConformalProduct { fiber_dim, .. } => fibered("s", *fiber_dim),
            ChartKind::WarpedOverWarped { fiber_dim, .. } => fibered("t", *fiber_dim),
            ChartKind::Theta3 { .. } | ChartKind::DiagonalAxis { .. } => {
                vec!["x".into(), "y".into(), "z".into()]
            }
            ChartKind::Base2 { .. } => vec!["u".into(), "v".into()],
        }
    }

    /// The normal-form profile `theta` when the chart is a `Theta3` or `Base2` chart.
    pub fn theta(&self) -> Option<&FunctionSpec1D> {
        match &self.kind {
            ChartKind::Theta3 { theta } | ChartKind::Base2 { theta } => Some(theta),
            _ => None,
        }
    }

    /// Components of the distinguished unit Killing field, where the chart has one:
    /// `d/dy + d/dz` on `Theta3`, `d/dx0` on warped products.
    pub fn xi(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ChartKind::Theta3 { .. } => Some(vec![0.0, 1.0, 1.0]),
            ChartKind::WarpedProduct { .. } => {
                let mut v = vec![0.0; self.dim()];
                v[0] = 1.0;
                Some(v)
            }
            _ => None,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.bounds)
                .all(|(x, b)| *x >= b[0] && *x <= b[1])
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: p.len(),
            });
        }
        let names = self.coordinate_names();
        for ((x, b), name) in p.iter().zip(&self.bounds).zip(names) {
            if !(*x >= b[0] && *x <= b[1]) {
                return Err(Error::out_of_domain(name, *x, b[0], b[1]));
            }
        }
        Ok(())
    }

    /// `n` points per axis spanning the coordinate box (inclusive), row-major.
    pub fn sample_grid(&self, n: usize) -> Vec<Vec<f64>> {
        self.sample_grid_inset(n, 0.0)
    }

    /// Like [`Self::sample_grid`] but shrinks every axis by `inset` times its width
    /// at both ends.
    pub fn sample_grid_inset(&self, n: usize, inset: f64) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .bounds
            .iter()
            .map(|b| {
                let w = b[1] - b[0];
                let (lo, hi) = (b[0] + inset * w, b[1] - inset * w);
                if n <= 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            })
            .collect();
        cartesian(&axes)
    }

    pub(crate) fn metric_diag_unchecked(&self, p: &[f64]) -> Vec<f64> {
        self.factors
            .iter()
            .map(|fs| {
                fs.iter()
                    .map(|(axis, f)| f.value_slope(p[*axis]).0.powi(2))
                    .product()
            })
            .collect()
    }

    pub(crate) fn metric_unchecked(&self, p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.metric_diag_unchecked(p)))
    }

    /// Metric matrix at `p`.
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        Ok(self.metric_unchecked(p))
    }

    /// `<u, v>_g` at `p`, without domain checks.
    pub fn inner(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        self.metric_diag_unchecked(p)
            .iter()
            .zip(u.iter().zip(v))
            .map(|(g, (a, b))| g * a * b)
            .sum()
    }

    pub fn norm(&self, p: &[f64], v: &[f64]) -> f64 {
        self.inner(p, v, v).sqrt()
    }

    /// `half_dlog[i][m] = d_m g_ii / (2 g_ii)`, exact.
    fn half_dlog(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        self.factors
            .iter()
            .map(|fs| {
                let mut row = vec![0.0; d];
                for (axis, f) in fs {
                    let (w, dw) = f.value_slope(p[*axis]);
                    row[*axis] += dw / w;
                }
                row
            })
            .collect()
    }

    /// Christoffel symbols at `p` by the requested method.
    pub fn christoffel_at(&self, p: &[f64], method: ChristoffelMethod) -> Result<Christoffel> {
        self.check_point(p)?;
        Ok(match method {
            ChristoffelMethod::ClosedForm => self.christoffel_closed(p),
            ChristoffelMethod::FiniteDifference => self.christoffel_fd(p),
        })
    }

    pub(crate) fn christoffel_closed(&self, p: &[f64]) -> Christoffel {
        match &self.kind {
            ChartKind::Theta3 { theta } => theta3_connection(theta, p[0]),
            _ => self.diagonal_connection(p),
        }
    }

    /// Exact connection of a diagonal metric from exact metric partials.
    fn diagonal_connection(&self, p: &[f64]) -> Christoffel {
        let d = self.dim();
        let g = self.metric_diag_unchecked(p);
        let hl = self.half_dlog(p);
        let mut c = Christoffel::zeros(d);
        for i in 0..d {
            c.set(i, i, i, hl[i][i]);
            for m in 0..d {
                if m == i {
                    continue;
                }
                // Gamma^i_im = d_m g_ii / (2 g_ii)
                c.set_sym(i, i, m, hl[i][m]);
                // Gamma^m_ii = -d_m g_ii / (2 g_mm)
                c.set(m, i, i, -hl[i][m] * g[i] / g[m]);
            }
        }
        c
    }

    /// Koszul formula with centered differences of the metric entries.
    pub(crate) fn christoffel_fd(&self, p: &[f64]) -> Christoffel {
        let d = self.dim();
        let ginv = self
            .metric_unchecked(p)
            .try_inverse()
            .expect("metric is positive definite on the chart box");
        let dg: Vec<DMatrix<f64>> = (0..d)
            .map(|m| {
                let h = fd_step(p[m]);
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[m] += h;
                b[m] -= h;
                (self.metric_unchecked(&a) - self.metric_unchecked(&b)) / (2.0 * h)
            })
            .collect();
        let mut c = Christoffel::zeros(d);
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        acc += ginv[(k, l)]
                            * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    c.set_sym(k, i, j, 0.5 * acc);
                }
            }
        }
        c
    }

    /// Centered difference `d_m g_ij`, used by compatibility checks.
    pub fn metric_partial_fd(&self, p: &[f64], m: usize) -> DMatrix<f64> {
        let h = fd_step(p[m]);
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[m] += h;
        b[m] -= h;
        (self.metric_unchecked(&a) - self.metric_unchecked(&b)) / (2.0 * h)
    }
}

/// The six nonzero connection coefficients of the normal form, written out:
/// `nabla_x d_y = cot(theta) theta' d_y`, `nabla_x d_z = -tan(theta) theta' d_z`,
/// `nabla_y d_y = -cos sin theta' d_x`, `nabla_z d_z = cos sin theta' d_x`.
fn theta3_connection(theta: &FunctionSpec1D, x: f64) -> Christoffel {
    let t = theta.eval_unchecked(x, 0);
    let dt = theta.eval_unchecked(x, 1);
    let (s, c) = t.sin_cos();
    let mut g = Christoffel::zeros(3);
    g.set_sym(1, 0, 1, c / s * dt);
    g.set_sym(2, 0, 2, -s / c * dt);
    g.set(0, 1, 1, -c * s * dt);
    g.set(0, 2, 2, c * s * dt);
    g
}

fn fiber_factors(
    factors: &mut Vec<Vec<(usize, Factor)>>,
    warp: &FunctionSpec1D,
    fiber_dim: usize,
    fiber: Fiber,
) -> Result<()> {
    if !(1..=2).contains(&fiber_dim) {
        return Err(Error::InvalidSpec(format!(
            "fiber dimension must be 1 or 2, got {fiber_dim}"
        )));
    }
    factors.push(vec![(1, Factor::Of(warp.clone()))]);
    if fiber_dim == 2 {
        let mut last = vec![(1, Factor::Of(warp.clone()))];
        if fiber == Fiber::RoundUnitSphere {
            last.push((2, Factor::Sin));
        }
        factors.push(last);
    }
    Ok(())
}

fn factors_for(kind: &ChartKind) -> Result<Vec<Vec<(usize, Factor)>>> {
    let mut f: Vec<Vec<(usize, Factor)>> = Vec::new();
    match kind {
        ChartKind::WarpedProduct {
            warp,
            fiber_dim,
            fiber,
        } => {
            f.push(vec![]);
            f.push(vec![]);
            fiber_factors(&mut f, warp, *fiber_dim, *fiber)?;
        }
        ChartKind::ConformalProduct {
            factor,
            warp,
            fiber_dim,
            fiber,
        } => {
            f.push(vec![]);
            f.push(vec![]);
            fiber_factors(&mut f, warp, *fiber_dim, *fiber)?;
            for row in f.iter_mut() {
                row.push((0, Factor::Of(factor.clone())));
            }
        }
        ChartKind::WarpedOverWarped {
            outer,
            warp,
            fiber_dim,
            fiber,
        } => {
            f.push(vec![]);
            f.push(vec![]);
            fiber_factors(&mut f, warp, *fiber_dim, *fiber)?;
            for row in f.iter_mut().skip(1) {
                row.push((0, Factor::Of(outer.clone())));
            }
        }
        ChartKind::Theta3 { theta } => {
            f.push(vec![]);
            f.push(vec![(0, Factor::SinOf(theta.clone()))]);
            f.push(vec![(0, Factor::CosOf(theta.clone()))]);
        }
        ChartKind::Base2 { theta } => {
            f.push(vec![]);
            f.push(vec![(0, Factor::HalfSinDoubleOf(theta.clone()))]);
        }
        ChartKind::DiagonalAxis { a, b } => {
            f.push(vec![]);
            f.push(vec![(0, Factor::Of(a.clone()))]);
            f.push(vec![(0, Factor::Of(b.clone()))]);
        }
    }
    Ok(f)
}

fn clip(f: &FunctionSpec1D) -> [f64; 2] {
    let (lo, hi) = f.domain();
    [lo.max(-DEFAULT_HALF_WIDTH), hi.min(DEFAULT_HALF_WIDTH)]
}

fn default_bounds(kind: &ChartKind) -> Vec<[f64; 2]> {
    use std::f64::consts::PI;
    let flat = [-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH];
    let angle = [-PI, PI];
    let fiber = |m: usize, fib: Fiber| -> Vec<[f64; 2]> {
        match (fib, m) {
            (Fiber::Flat, _) => vec![flat; m],
            (Fiber::RoundUnitSphere, 1) => vec![angle],
            (Fiber::RoundUnitSphere, _) => vec![[0.2, PI - 0.2], angle],
        }
    };
    match kind {
        ChartKind::WarpedProduct {
            warp,
            fiber_dim,
            fiber: fib,
        } => {
            let mut b = vec![flat, clip(warp)];
            b.extend(fiber(*fiber_dim, *fib));
            b
        }
        ChartKind::ConformalProduct {
            factor,
            warp,
            fiber_dim,
            fiber: fib,
        } => {
            let mut b = vec![clip(factor), clip(warp)];
            b.extend(fiber(*fiber_dim, *fib));
            b
        }
        ChartKind::WarpedOverWarped {
            outer,
            warp,
            fiber_dim,
            fiber: fib,
        } => {
            let mut b = vec![clip(outer), clip(warp)];
            b.extend(fiber(*fiber_dim, *fib));
            b
        }
        ChartKind::Theta3 { theta } => vec![clip(theta), angle, angle],
        ChartKind::Base2 { theta } => vec![clip(theta), angle],
        ChartKind::DiagonalAxis { a, b } => {
            let (alo, ahi) = a.domain();
            let (blo, bhi) = b.domain();
            let x = [
                alo.max(blo).max(-DEFAULT_HALF_WIDTH),
                ahi.min(bhi).min(DEFAULT_HALF_WIDTH),
            ];
            vec![x, flat, flat]
        }
    }
}

fn check_covers(f: &FunctionSpec1D, lo: f64, hi: f64, name: &str) -> Result<()> {
    if !f.contains(lo) || !f.contains(hi) {
        let (a, b) = f.domain();
        return Err(Error::InvalidSpec(format!(
            "{name} is defined on [{a}, {b}] but the chart needs [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn positive_on(f: &FunctionSpec1D, lo: f64, hi: f64, name: &str) -> Result<()> {
    check_covers(f, lo, hi, name)?;
    for i in 0..=200 {
        let x = lo + (hi - lo) * i as f64 / 200.0;
        if !(f.eval_unchecked(x, 0) > 0.0) {
            return Err(Error::InvalidSpec(format!("{name}({x}) is not positive")));
        }
    }
    Ok(())
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

// ---- JSON representation ---------------------------------------------------

fn schema_one() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartRepr {
    #[serde(default = "schema_one")]
    schema: u32,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    bounds: Option<Vec<[f64; 2]>>,
    metric: MetricRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum MetricRepr {
    WarpedProduct {
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
    Theta3 {
        theta: FunctionSpec1D,
    },
    Base2 {
        theta: FunctionSpec1D,
    },
    DiagonalAxis {
        a: FunctionSpec1D,
        b: FunctionSpec1D,
    },
    ConformalProduct {
        factor: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
    WarpedOverWarped {
        outer: FunctionSpec1D,
        warp: FunctionSpec1D,
        fiber_dim: usize,
        fiber: Fiber,
    },
}

impl MetricChart {
    /// Parses the versioned JSON form, keeping validation errors typed.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: ChartRepr = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::try_from(repr)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

impl TryFrom<ChartRepr> for MetricChart {
    type Error = Error;

    fn try_from(r: ChartRepr) -> Result<Self> {
        if r.schema != 1 {
            return Err(Error::Schema(r.schema));
        }
        let kind = match r.metric {
            MetricRepr::WarpedProduct {
                warp,
                fiber_dim,
                fiber,
            } => ChartKind::WarpedProduct {
                warp,
                fiber_dim,
                fiber,
            },
            MetricRepr::Theta3 { theta } => ChartKind::Theta3 { theta },
            MetricRepr::Base2 { theta } => ChartKind::Base2 { theta },
            MetricRepr::DiagonalAxis { a, b } => ChartKind::DiagonalAxis { a, b },
            MetricRepr::ConformalProduct {
                factor,
                warp,
                fiber_dim,
                fiber,
            } => ChartKind::ConformalProduct {
                factor,
                warp,
                fiber_dim,
                fiber,
            },
            MetricRepr::WarpedOverWarped {
                outer,
                warp,
                fiber_dim,
                fiber,
            } => ChartKind::WarpedOverWarped {
                outer,
                warp,
                fiber_dim,
                fiber,
            },
        };
        MetricChart::build_with(kind, r.bounds)
    }
}

impl From<MetricChart> for ChartRepr {
    fn from(c: MetricChart) -> Self {
        let metric = match c.kind {
            ChartKind::WarpedProduct {
                warp,
                fiber_dim,
                fiber,
            } => MetricRepr::WarpedProduct {
                warp,
                fiber_dim,
                fiber,
            },
            ChartKind::Theta3 { theta } => MetricRepr::Theta3 { theta },
            ChartKind::Base2 { theta } => MetricRepr::Base2 { theta },
            ChartKind::DiagonalAxis { a, b } => MetricRepr::DiagonalAxis { a, b },
            ChartKind::ConformalProduct {
                factor,
                warp,
                fiber_dim,
                fiber,
            } => MetricRepr::ConformalProduct {
                factor,
                warp,
                fiber_dim,
                fiber,
            },
            ChartKind::WarpedOverWarped {
                outer,
                warp,
                fiber_dim,
                fiber,
            } => MetricRepr::WarpedOverWarped {
                outer,
                warp,
                fiber_dim,
                fiber,
            },
        };
        ChartRepr {
            schema: 1,
            bounds: Some(c.bounds),
            metric,
        }
    }
}
