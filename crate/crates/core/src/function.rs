//! One-dimensional scalar profiles with derivatives up to order four.
//!
//! Every analytic kind differentiates in closed form. Tabulated data is held as a
//! not-a-knot cubic spline, which reproduces cubic polynomials exactly; its third and
//! fourth derivatives are taken by centered differences of the spline's second
//! derivative and [`FunctionSpec1D::derivative_quality`] reports that downgrade.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order any [`FunctionSpec1D`] supports.
pub const MAX_ORDER: usize = 4;

/// How a derivative of a given order is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeQuality {
    Exact,
    FiniteDifference,
}

/// Analytic or tabulated form of a profile function.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionForm {
    Constant { value: f64 },
    /// `a + b x`
    Affine { a: f64, b: f64 },
    /// `a + b sin(omega x + phase)`
    SineAffine { a: f64, b: f64, omega: f64, phase: f64 },
    /// `c0 + c1 x + c2 x^2 + ...`
    Polynomial { coefficients: Vec<f64> },
    /// `a + b tanh(c x)`
    TanhBump { a: f64, b: f64, c: f64 },
    /// `a + b exp(c x)`
    Exponential { a: f64, b: f64, c: f64 },
    TabulatedSpline(Spline),
}

/// A scalar function on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct FunctionSpec1D {
    form: FunctionForm,
    lo: f64,
    hi: f64,
}

impl FunctionSpec1D {
    pub fn constant(value: f64) -> Self {
        Self::unbounded(FunctionForm::Constant { value })
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self::unbounded(FunctionForm::Affine { a, b })
    }

    pub fn sine_affine(a: f64, b: f64, omega: f64, phase: f64) -> Self {
        Self::unbounded(FunctionForm::SineAffine { a, b, omega, phase })
    }

    /// `cos(x)` written as a phase-shifted sine.
    pub fn cosine() -> Self {
        Self::sine_affine(0.0, 1.0, 1.0, std::f64::consts::FRAC_PI_2)
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self::unbounded(FunctionForm::Polynomial { coefficients })
    }

    pub fn tanh_bump(a: f64, b: f64, c: f64) -> Self {
        Self::unbounded(FunctionForm::TanhBump { a, b, c })
    }

    pub fn exponential(a: f64, b: f64, c: f64) -> Self {
        Self::unbounded(FunctionForm::Exponential { a, b, c })
    }

    /// Not-a-knot cubic spline through `(knots[i], values[i])`. The domain is the
    /// knot range.
    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = Spline::new(knots, values)?;
        let lo = spline.knots[0];
        let hi = *spline.knots.last().unwrap();
        Ok(Self {
            form: FunctionForm::TabulatedSpline(spline),
            lo,
            hi,
        })
    }

    fn unbounded(form: FunctionForm) -> Self {
        Self {
            form,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// Restricts the domain to `[lo, hi]`.
    ///
    /// Panics if `lo >= hi`, or if a spline's knots do not cover the interval.
    pub fn on(self, lo: f64, hi: f64) -> Self {
        self.try_on(lo, hi).expect("invalid function domain")
    }

    pub fn try_on(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidSpec(format!("empty domain [{lo}, {hi}]")));
        }
        if let FunctionForm::TabulatedSpline(s) = &self.form {
            let (klo, khi) = (s.knots[0], *s.knots.last().unwrap());
            if lo < klo || hi > khi {
                return Err(Error::InvalidSpec(format!(
                    "spline domain [{lo}, {hi}] exceeds knot range [{klo}, {khi}]"
                )));
            }
        }
        self.lo = lo;
        self.hi = hi;
        Ok(self)
    }

    pub fn form(&self) -> &FunctionForm {
        &self.form
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn derivative_quality(&self, order: usize) -> DerivativeQuality {
        match self.form {
            FunctionForm::TabulatedSpline(_) if order >= 3 => DerivativeQuality::FiniteDifference,
            _ => DerivativeQuality::Exact,
        }
    }

    /// `d^order/dx^order` of the function at `x`.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if !self.contains(x) || x.is_nan() {
            return Err(Error::out_of_domain("x", x, self.lo, self.hi));
        }
        Ok(self.eval_unchecked(x, order))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.eval(x, 0)
    }

    /// Evaluation without the domain test. Analytic kinds extend naturally and
    /// splines extrapolate with their end cubics; used by stencils that may
    /// straddle a boundary.
    pub(crate) fn eval_unchecked(&self, x: f64, order: usize) -> f64 {
        match &self.form {
            FunctionForm::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            FunctionForm::Affine { a, b } => match order {
                0 => a + b * x,
                1 => *b,
                _ => 0.0,
            },
            FunctionForm::SineAffine { a, b, omega, phase } => {
                let shift = order as f64 * std::f64::consts::FRAC_PI_2;
                let v = b * omega.powi(order as i32) * (omega * x + phase + shift).sin();
                if order == 0 {
                    a + v
                } else {
                    v
                }
            }
            FunctionForm::Polynomial { coefficients } => poly_derivative(coefficients, x, order),
            FunctionForm::TanhBump { a, b, c } => {
                let t = (c * x).tanh();
                let s = 1.0 - t * t;
                let d = match order {
                    0 => return a + b * t,
                    1 => s,
                    2 => -2.0 * t * s,
                    3 => (6.0 * t * t - 2.0) * s,
                    _ => (16.0 * t - 24.0 * t * t * t) * s,
                };
                b * c.powi(order as i32) * d
            }
            FunctionForm::Exponential { a, b, c } => {
                let v = b * c.powi(order as i32) * (c * x).exp();
                if order == 0 {
                    a + v
                } else {
                    v
                }
            }
            FunctionForm::TabulatedSpline(s) => match order {
                0..=2 => s.eval(x, order),
                _ => {
                    let h = 1e-4 * x.abs().max(1.0);
                    let (m, c, p) = (s.eval(x - h, 2), s.eval(x, 2), s.eval(x + h, 2));
                    if order == 3 {
                        (p - m) / (2.0 * h)
                    } else {
                        (p - 2.0 * c + m) / (h * h)
                    }
                }
            },
        }
    }
}

fn poly_derivative(coefficients: &[f64], x: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coefficients.iter().enumerate().skip(order).rev() {
        let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
        acc = acc * x + c * falling;
    }
    acc
}

/// Not-a-knot cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 4 {
            return Err(Error::InvalidSpec("spline needs at least 4 knots".into()));
        }
        if values.len() != n {
            return Err(Error::InvalidSpec(format!(
                "spline has {n} knots but {} values",
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpec("spline knots must increase strictly".into()));
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("spline data must be finite".into()));
        }
        let second = not_a_knot_second_derivatives(&knots, &values);
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: f64, order: usize) -> f64 {
        let n = self.knots.len();
        let j = match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (m0, m1) = (self.second[j], self.second[j + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        match order {
            0 => m0 * a.powi(3) / (6.0 * h) + m1 * b.powi(3) / (6.0 * h) + c0 * a + c1 * b,
            1 => -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1,
            _ => (m0 * a + m1 * b) / h,
        }
    }
}

/// Second derivatives at the knots for the not-a-knot end conditions. The two end
/// unknowns are eliminated so the remaining system is tridiagonal.
fn not_a_knot_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m = n - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for r in 0..m {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    // M0 = (1 + h0/h1) M1 - (h0/h1) M2
    let q0 = h[0] / h[1];
    diag[0] += h[0] * (1.0 + q0);
    sup[0] -= h[0] * q0;
    // M_{n-1} = (1 + h_{n-2}/h_{n-3}) M_{n-2} - (h_{n-2}/h_{n-3}) M_{n-3}
    let q1 = h[n - 2] / h[n - 3];
    diag[m - 1] += h[n - 2] * (1.0 + q1);
    sub[m - 1] -= h[n - 2] * q1;

    // Thomas sweep
    for r in 1..m {
        let w = sub[r] / diag[r - 1];
        diag[r] -= w * sup[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    let mut inner = vec![0.0; m];
    inner[m - 1] = rhs[m - 1] / diag[m - 1];
    for r in (0..m - 1).rev() {
        inner[r] = (rhs[r] - sup[r] * inner[r + 1]) / diag[r];
    }

    let mut out = vec![0.0; n];
    out[1..n - 1].copy_from_slice(&inner);
    out[0] = (1.0 + q0) * out[1] - q0 * out[2];
    out[n - 1] = (1.0 + q1) * out[n - 2] - q1 * out[n - 3];
    out
}

// ---- JSON representation ---------------------------------------------------

fn schema_one() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionRepr {
    #[serde(default = "schema_one")]
    schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<[f64; 2]>,
    form: FormRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum FormRepr {
    Constant { value: f64 },
    Affine { a: f64, b: f64 },
    SineAffine { a: f64, b: f64, omega: f64, phase: f64 },
    Polynomial { coefficients: Vec<f64> },
    TanhBump { a: f64, b: f64, c: f64 },
    Exponential { a: f64, b: f64, c: f64 },
    TabulatedSpline { knots: Vec<f64>, values: Vec<f64> },
}

impl FunctionSpec1D {
    /// Parses the versioned JSON form, keeping validation errors typed.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: FunctionRepr = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::try_from(repr)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

impl TryFrom<FunctionRepr> for FunctionSpec1D {
    type Error = Error;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        if r.schema != 1 {
            return Err(Error::Schema(r.schema));
        }
        let f = match r.form {
            FormRepr::Constant { value } => Self::constant(value),
            FormRepr::Affine { a, b } => Self::affine(a, b),
            FormRepr::SineAffine { a, b, omega, phase } => Self::sine_affine(a, b, omega, phase),
            FormRepr::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidSpec("polynomial needs coefficients".into()));
                }
                Self::polynomial(coefficients)
            }
            FormRepr::TanhBump { a, b, c } => Self::tanh_bump(a, b, c),
            FormRepr::Exponential { a, b, c } => Self::exponential(a, b, c),
            FormRepr::TabulatedSpline { knots, values } => Self::tabulated(knots, values)?,
        };
        match r.domain {
            Some([lo, hi]) => f.try_on(lo, hi),
            None => Ok(f),
        }
    }
}

impl From<FunctionSpec1D> for FunctionRepr {
    fn from(f: FunctionSpec1D) -> Self {
        let domain = (f.lo.is_finite() && f.hi.is_finite()).then_some([f.lo, f.hi]);
        let form = match f.form {
            FunctionForm::Constant { value } => FormRepr::Constant { value },
            FunctionForm::Affine { a, b } => FormRepr::Affine { a, b },
            FunctionForm::SineAffine { a, b, omega, phase } => {
                FormRepr::SineAffine { a, b, omega, phase }
            }
            FunctionForm::Polynomial { coefficients } => FormRepr::Polynomial { coefficients },
            FunctionForm::TanhBump { a, b, c } => FormRepr::TanhBump { a, b, c },
            FunctionForm::Exponential { a, b, c } => FormRepr::Exponential { a, b, c },
            FunctionForm::TabulatedSpline(s) => FormRepr::TabulatedSpline {
                knots: s.knots,
                values: s.values,
            },
        };
        FunctionRepr {
            schema: 1,
            domain,
            form,
        }
    }
}
