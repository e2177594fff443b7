//! Global checks on the normal-form profile `theta`: smooth closure on `S^3` and
//! `S^2 x R`, admissibility on `R^3`, the submersion onto the base surface, and
//! constant-curvature detection.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{fd_step, MetricChart};
use crate::constructor::build_level_surface;
use crate::curvature::sectional_curvature_at;
use crate::error::{Error, Result};
use crate::function::FunctionSpec1D;
use crate::hypersurface::fundamental_forms_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureTarget {
    S3,
    S2xR,
    R3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub condition: String,
    /// Where the condition is evaluated; `None` for conditions over an interval.
    pub endpoint: Option<f64>,
    /// Derivative order of `theta` involved.
    pub order: usize,
    pub measured: f64,
    pub expected: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Derivatives of `phi = sin(theta)` and `psi = cos(theta)` at an endpoint, orders
/// `0..=2 k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDerivatives {
    pub endpoint: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub target: ClosureTarget,
    pub k_max: usize,
    pub tolerance: f64,
    /// `tolerance * (1 + C)` with `C` the sampled bound on `|theta^(j)|, j <= 4`.
    pub effective_tolerance: f64,
    pub entries: Vec<ConditionEntry>,
    pub endpoint_derivatives: Vec<EndpointDerivatives>,
    pub passed: bool,
    pub note: String,
}

impl SmoothnessReport {
    pub fn first_failure(&self) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| !e.passed)
    }
}

/// Taylor coefficients of `sin(theta(x0 + h))` and `cos(theta(x0 + h))` turned back
/// into derivatives, orders `0..=n` with `n <= 4`.
fn sin_cos_derivatives(t: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
    let mul = |a: &[f64; 5], b: &[f64; 5]| -> [f64; 5] {
        let mut c = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 - i {
                c[i + j] += a[i] * b[j];
            }
        }
        c
    };
    let mut d = [0.0; 5];
    for j in 1..5 {
        d[j] = t[j] / FACT[j];
    }
    let d2 = mul(&d, &d);
    let d3 = mul(&d2, &d);
    let d4 = mul(&d3, &d);
    let mut sin_d = [0.0; 5];
    let mut cos_d = [0.0; 5];
    for i in 0..5 {
        sin_d[i] = d[i] - d3[i] / 6.0;
        cos_d[i] = -d2[i] / 2.0 + d4[i] / 24.0;
    }
    cos_d[0] += 1.0;
    let (s0, c0) = t[0].sin_cos();
    let phi = (0..=n).map(|i| FACT[i] * (s0 * cos_d[i] + c0 * sin_d[i])).collect();
    let psi = (0..=n).map(|i| FACT[i] * (c0 * cos_d[i] - s0 * sin_d[i])).collect();
    (phi, psi)
}

/// Checks the endpoint conditions for `theta` on `[0, b]` to close up smoothly on
/// `S^3` (`theta(0) = 0`, `theta(b) = pi/2`, `theta'(0) = theta'(b) = 1`,
/// `theta^(2k)` vanishing at both ends for `1 <= k <= k_max`) or on `S^2 x R`
/// (`theta(0) = theta(b) = 0`, `theta'(0) = -theta'(b) = 1`, `theta^(2k)` vanishing for
/// `0 <= k <= k_max`), plus `0 < theta < pi/2` inside.
///
/// Entries are ordered: conditions at `0` by increasing order, then at `b`, then the
/// interior range.
pub fn closure_smoothness_check(theta: &FunctionSpec1D, b: f64, target: ClosureTarget, k_max: usize, tol: f64) -> Result<SmoothnessReport> {
    if k_max > 2 {
        return Err(Error::UnsupportedOrder(2 * k_max));
    }
    if target == ClosureTarget::R3 {
        return Err(Error::InvalidSpec("use r3_admissibility for the R^3 target".into()));
    }
    if !(b > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidSpec("need b > 0 and tol > 0".into()));
    }
    let (lo, hi) = theta.domain();
    if lo > 0.0 || hi < b {
        return Err(Error::out_of_domain("b", b, lo, hi));
    }
    let samples: Vec<f64> = (0..=200).map(|i| b * i as f64 / 200.0).collect();
    let c4 = samples
        .iter()
        .flat_map(|&x| (0..=4).map(move |j| (x, j)))
        .map(|(x, j)| theta.eval_unchecked(x, j).abs())
        .fold(0.0, f64::max);
    let eff = tol * (1.0 + c4);

    let (theta_b, slope_b) = match target {
        ClosureTarget::S3 => (FRAC_PI_2, 1.0),
        _ => (0.0, -1.0),
    };
    // the endpoint values are hypotheses for S^3 and the k = 0 even condition for S^2 x R
    let label = |order: usize, at: &str| -> String {
        match order {
            0 => format!("theta({at})"),
            1 => format!("theta'({at})"),
            2 => format!("theta''({at})"),
            n => format!("theta^({n})({at})"),
        }
    };
    let mut conditions = Vec::new();
    for (x, at, value, slope) in [(0.0, "0", 0.0, 1.0), (b, "b", theta_b, slope_b)] {
        conditions.push((format!("{} = {}", label(0, at), fmt_target(value)), x, 0, value));
        conditions.push((format!("{} = {}", label(1, at), fmt_target(slope)), x, 1, slope));
        for k in 1..=k_max {
            conditions.push((format!("{} = 0", label(2 * k, at)), x, 2 * k, 0.0));
        }
    }
    let mut entries: Vec<ConditionEntry> = conditions
        .into_iter()
        .map(|(condition, x, order, expected)| {
            let measured = theta.eval_unchecked(x, order);
            ConditionEntry {
                condition,
                endpoint: Some(x),
                order,
                measured,
                expected,
                threshold: eff,
                passed: (measured - expected).abs() <= eff,
            }
        })
        .collect();
    let margin = samples[1..samples.len() - 1]
        .iter()
        .map(|&x| {
            let t = theta.eval_unchecked(x, 0);
            t.min(FRAC_PI_2 - t)
        })
        .fold(f64::INFINITY, f64::min);
    entries.push(ConditionEntry {
        condition: "0 < theta < pi/2 on (0, b)".into(),
        endpoint: None,
        order: 0,
        measured: margin,
        expected: 0.0,
        threshold: 0.0,
        passed: margin > 0.0,
    });
    let endpoint_derivatives = [0.0, b]
        .iter()
        .map(|&x| {
            let t: Vec<f64> = (0..=4).map(|j| theta.eval_unchecked(x, j)).collect();
            let (phi, psi) = sin_cos_derivatives(&t, 2 * k_max);
            EndpointDerivatives { endpoint: x, phi, psi }
        })
        .collect();
    let passed = entries.iter().all(|e| e.passed);
    Ok(SmoothnessReport {
        target,
        k_max,
        tolerance: tol,
        effective_tolerance: eff,
        entries,
        endpoint_derivatives,
        passed,
        note: format!("even-derivative conditions checked up to order {} only", 2 * k_max),
    })
}

fn fmt_target(v: f64) -> String {
    if v == FRAC_PI_2 {
        "pi/2".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveLength {
    pub curve: String,
    pub parameters: Vec<f64>,
    pub lengths: Vec<f64>,
    pub monotone: bool,
    /// `length >= c * parameter` at every sample.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R3Report {
    pub report: SmoothnessReport,
    /// Smallest distance of `theta` to `(pi/2) Z` on the grid.
    pub min_margin: f64,
    pub argmin: f64,
    /// `min(1, min |sin theta|, min |cos theta|)` on the grid.
    pub lower_bound_constant: f64,
    pub curves: Vec<CurveLength>,
    /// The length samples are a heuristic and never enter the verdict.
    pub heuristic_passed: bool,
}

/// Admissibility of `theta` for a metric on `R^3`: `theta` avoids `(pi/2) Z` on the
/// grid by at least `tol`. Also samples lengths of three straight curves.
pub fn r3_admissibility(theta: &FunctionSpec1D, grid: &[f64], tol: f64) -> R3Report {
    let mut min_margin = f64::INFINITY;
    let mut argmin = f64::NAN;
    let mut c: f64 = 1.0;
    let mut undefined = None;
    for &x in grid {
        let t = match theta.eval(x, 0) {
            Ok(t) => t,
            Err(_) => {
                undefined.get_or_insert(x);
                continue;
            }
        };
        let r = t.rem_euclid(FRAC_PI_2);
        let m = r.min(FRAC_PI_2 - r);
        if m < min_margin {
            min_margin = m;
            argmin = x;
        }
        c = c.min(t.sin().abs()).min(t.cos().abs());
    }
    let mut entries = vec![ConditionEntry {
        condition: "theta avoids (pi/2)Z".into(),
        endpoint: Some(argmin),
        order: 0,
        measured: min_margin,
        expected: 0.0,
        threshold: tol,
        passed: min_margin >= tol,
    }];
    if let Some(x) = undefined {
        entries.push(ConditionEntry {
            condition: "theta defined on the grid".into(),
            endpoint: Some(x),
            order: 0,
            measured: f64::NAN,
            expected: 0.0,
            threshold: 0.0,
            passed: false,
        });
    }
    let curves = length_samples(theta, grid, c);
    let heuristic_passed = curves.iter().all(|k| k.monotone && k.bound_holds);
    let passed = entries.iter().all(|e| e.passed);
    R3Report {
        report: SmoothnessReport {
            target: ClosureTarget::R3,
            k_max: 0,
            tolerance: tol,
            effective_tolerance: tol,
            entries,
            endpoint_derivatives: Vec::new(),
            passed,
            note: "admissibility on the sampled grid; completeness is only sampled".into(),
        },
        min_margin,
        argmin,
        lower_bound_constant: c,
        curves,
        heuristic_passed,
    }
}

fn length_samples(theta: &FunctionSpec1D, grid: &[f64], c: f64) -> Vec<CurveLength> {
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo < hi) {
        return Vec::new();
    }
    let mid = 0.5 * (lo + hi);
    let span = hi - lo;
    let n = 400;
    let speed = |curve: usize, t: f64| -> f64 {
        let (x, dy, dz) = match curve {
            0 => (lo + t, 1.0, 1.0),
            1 => (mid, 1.0, 0.0),
            _ => (mid, 0.0, 1.0),
        };
        let th = theta.eval_unchecked(x, 0);
        let dx = if curve == 0 { 1.0 } else { 0.0 };
        (dx * dx + (th.sin() * dy).powi(2) + (th.cos() * dz).powi(2)).sqrt()
    };
    ["(x0 + t, t, t)", "(x_mid, t, 0)", "(x_mid, 0, t)"]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let h = span / n as f64;
            let mut parameters = vec![0.0];
            let mut lengths = vec![0.0];
            let mut acc = 0.0;
            for i in 0..n {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                acc += 0.5 * h * (speed(k, a) + speed(k, b));
                parameters.push(b);
                lengths.push(acc);
            }
            let monotone = lengths.windows(2).all(|w| w[1] > w[0]);
            let bound_holds = parameters.iter().zip(&lengths).all(|(t, l)| *l >= c * t * (1.0 - 1e-12));
            CurveLength {
                curve: name.to_string(),
                parameters,
                lengths,
                monotone,
                bound_holds,
            }
        })
        .collect()
}

/// The base surface `du^2 + 1/4 sin^2(2 theta(u)) dv^2` of the submersion
/// `(x, y, z) -> (x, y - z)`.
pub fn submersion_base_chart(theta: &FunctionSpec1D) -> Result<MetricChart> {
    MetricChart::base2(theta.clone())
}

/// Gaussian curvature of the base surface, closed form and `-phi''/phi` with
/// `phi = sin(2 theta)/2` by a five-point stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseCurvature {
    pub closed_form: f64,
    pub finite_difference: f64,
}

pub const BASE_CURVATURE_AGREEMENT: f64 = 1e-6;

pub fn base_gauss_curvature_pair(theta: &FunctionSpec1D, u: f64) -> Result<BaseCurvature> {
    let t0 = theta.eval(u, 0)?;
    let t1 = theta.eval(u, 1)?;
    let t2 = theta.eval(u, 2)?;
    let closed_form = 4.0 * t1 * t1 - 2.0 * t2 / (2.0 * t0).tan();
    let phi = |x: f64| 0.5 * (2.0 * theta.eval_unchecked(x, 0)).sin();
    let h = 10.0 * fd_step(u);
    let d2 = (-phi(u + 2.0 * h) + 16.0 * phi(u + h) - 30.0 * phi(u) + 16.0 * phi(u - h) - phi(u - 2.0 * h)) / (12.0 * h * h);
    Ok(BaseCurvature {
        closed_form,
        finite_difference: -d2 / phi(u),
    })
}

/// Closed-form base curvature, rejected when the stencil estimate disagrees.
pub fn base_gauss_curvature_at(theta: &FunctionSpec1D, u: f64) -> Result<f64> {
    let k = base_gauss_curvature_pair(theta, u)?;
    if (k.closed_form - k.finite_difference).abs() >= BASE_CURVATURE_AGREEMENT {
        return Err(Error::CrossCheck {
            what: "base Gaussian curvature",
            closed: k.closed_form,
            numeric: k.finite_difference,
        });
    }
    Ok(k.closed_form)
}

/// `d pi (v)` for `pi(x, y, z) = (x, y - z)`.
pub fn submersion_differential(v: &[f64]) -> [f64; 2] {
    [v[0], v[1] - v[2]]
}

/// `| |d pi(v)|_base - 1 |` for a unit horizontal `v` at `p`.
pub fn submersion_isometry_defect(theta: &FunctionSpec1D, p: &[f64], v: &[f64]) -> Result<f64> {
    if p.len() != 3 || v.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: p.len().min(v.len()),
        });
    }
    let t = theta.eval(p[0], 0)?;
    let (s, c) = t.sin_cos();
    let along = s * s * v[1] + c * c * v[2];
    if along.abs() > 1e-8 {
        return Err(Error::NotHorizontal(along));
    }
    let norm = (v[0] * v[0] + s * s * v[1] * v[1] + c * c * v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    let w = submersion_differential(v);
    let base = (w[0] * w[0] + 0.25 * (2.0 * t).sin().powi(2) * w[1] * w[1]).sqrt();
    Ok((base - 1.0).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureClass {
    Flat,
    Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub point: Vec<f64>,
    pub plane: [Vec<f64>; 2],
    pub sectional: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCurvature {
    pub alpha_squared: Option<f64>,
    pub class: Option<CurvatureClass>,
    /// `max |theta' - mean theta'|` on the sample grid.
    pub max_deviation: f64,
    pub spot_checks: Vec<SpotCheck>,
    pub spot_checks_passed: bool,
}

pub const SPOT_CHECK_TOL: f64 = 1e-4;

/// Detects `theta' = alpha` on `interval`; on success, three seeded random
/// sectional curvatures are compared with `alpha^2`.
pub fn constant_curvature_detect(theta: &FunctionSpec1D, interval: [f64; 2], tol: f64, seed: u64) -> Result<ConstantCurvature> {
    let [a, b] = interval;
    if !(a < b) {
        return Err(Error::InvalidSpec("empty interval".into()));
    }
    let slopes = (0..=100)
        .map(|i| theta.eval(a + (b - a) * i as f64 / 100.0, 1))
        .collect::<Result<Vec<f64>>>()?;
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let max_deviation = slopes.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    if max_deviation >= tol {
        return Ok(ConstantCurvature {
            alpha_squared: None,
            class: None,
            max_deviation,
            spot_checks: Vec::new(),
            spot_checks_passed: false,
        });
    }
    let alpha2 = mean * mean;
    let class = if alpha2 == 0.0 {
        CurvatureClass::Flat
    } else {
        CurvatureClass::Spherical
    };
    let chart = MetricChart::theta3(theta.clone().try_on(a, b)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inset = 0.05 * (b - a);
    let mut spot_checks = Vec::new();
    while spot_checks.len() < 3 {
        let p = vec![
            rng.gen_range(a + inset..b - inset),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        let v1: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v2: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        match sectional_curvature_at(&chart, &p, &v1, &v2) {
            Ok(k) => spot_checks.push(SpotCheck {
                point: p,
                plane: [v1, v2],
                sectional: k,
            }),
            Err(Error::DegeneratePlane(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let spot_checks_passed = spot_checks.iter().all(|s| (s.sectional - alpha2).abs() < SPOT_CHECK_TOL);
    Ok(ConstantCurvature {
        alpha_squared: Some(alpha2),
        class: Some(class),
        max_deviation,
        spot_checks,
        spot_checks_passed,
    })
}

/// Agreement required between the closed-form and numeric `det S` of a level surface.
pub const EXTRINSIC_AGREEMENT: f64 = 1e-8;

/// `det S` of `{x = x0}`: `(cot(theta) theta') (-tan(theta) theta')`, checked against
/// the numeric shape operator.
pub fn level_surface_extrinsic_curvature(theta: &FunctionSpec1D, x0: f64) -> Result<f64> {
    let t = theta.eval(x0, 0)?;
    let d = theta.eval(x0, 1)?;
    let closed = (d / t.tan()) * (-t.tan() * d);
    // a thin slab around x0 keeps theta inside (0, pi/2) for unbounded presets
    let (lo, hi) = theta.domain();
    let w = 1e-2 * x0.abs().max(1.0);
    let chart = MetricChart::theta3(theta.clone().try_on((x0 - w).max(lo), (x0 + w).min(hi))?)?;
    let surface = build_level_surface(&chart, x0)?;
    let numeric = fundamental_forms_at(&chart, &surface, &[0.0, 0.0])?.gauss_kronecker();
    if (closed - numeric).abs() >= EXTRINSIC_AGREEMENT {
        return Err(Error::CrossCheck {
            what: "level surface extrinsic curvature",
            closed,
            numeric,
        });
    }
    Ok(closed)
}
