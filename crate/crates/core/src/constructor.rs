//! Constructions: profile curves of umbilical hypersurfaces in `R x_f`-type warped
//! products, the reparametrization of a warped product as a conformal product, and
//! totally geodesic surfaces of the normal-form metric.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{ChartKind, MetricChart};
use crate::error::{Error, Result};
use crate::format::num;
use crate::function::FunctionSpec1D;
use crate::geodesic::{geodesic_integrate, rk4_geodesic_step};
use crate::hypersurface::{Expectation, ImmersionKind, ImmersionSpec};

/// Default arc-length step of profile integration.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Drift of `sin(theta) - c f(x1)` that counts as a breach.
pub const BREACH_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub x0: f64,
    pub x1: f64,
    pub theta: f64,
}

/// Arc-length solution of `(x0', x1', theta') = (sin theta, cos theta, sin theta f'/f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub samples: Vec<ProfileSample>,
    /// First integral `sin(theta) / f(x1)`.
    pub c: f64,
    pub f: FunctionSpec1D,
    pub step: f64,
    /// Arc length at which `x1` would leave the domain of `f`.
    pub domain_exit: Option<f64>,
    pub max_drift: f64,
}

/// Knobs of [`integrate_profile_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// `None` disables the conservation check.
    pub breach_threshold: Option<f64>,
    /// Retry once at half the step before reporting a breach.
    pub retry: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            breach_threshold: Some(BREACH_THRESHOLD),
            retry: true,
        }
    }
}

fn profile_rhs(f: &FunctionSpec1D, y: [f64; 3]) -> [f64; 3] {
    let (st, ct) = y[2].sin_cos();
    let fv = f.eval_unchecked(y[1], 0);
    let fd = f.eval_unchecked(y[1], 1);
    [st, ct, st * fd / fv]
}

fn profile_step(f: &FunctionSpec1D, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |y: [f64; 3], k: [f64; 3], a: f64| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];
    let k1 = profile_rhs(f, y);
    let k2 = profile_rhs(f, add(y, k1, 0.5 * h));
    let k3 = profile_rhs(f, add(y, k2, 0.5 * h));
    let k4 = profile_rhs(f, add(y, k3, h));
    [0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

impl ProfileCurve {
    pub fn arclen(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }

    /// `(x0, x1, theta)` at arc length `s`, by one RK4 substep from the nearest sample.
    pub fn state_at(&self, s: f64) -> [f64; 3] {
        let h = self.step;
        let k = ((s / h).round().max(0.0) as usize).min(self.samples.len() - 1);
        let base = self.samples[k];
        profile_step(&self.f, [base.x0, base.x1, base.theta], s - base.s)
    }

    /// `theta'(s) = sin(theta) f'(x1) / f(x1)`.
    pub fn theta_prime_at(&self, s: f64) -> f64 {
        profile_rhs(&self.f, self.state_at(s))[2]
    }

    pub fn drift(&self, sample: &ProfileSample) -> f64 {
        (sample.theta.sin() - self.c * self.f.eval_unchecked(sample.x1, 0)).abs()
    }

    /// Columns `s, x0, x1, theta, c_drift`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["s", "x0", "x1", "theta", "c_drift"]).expect("in-memory write");
        for p in &self.samples {
            w.write_record([num(p.s), num(p.x0), num(p.x1), num(p.theta), num(self.drift(p))])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

pub fn integrate_profile(f: &FunctionSpec1D, x10: f64, x00: f64, theta0: f64, arclen: f64, step: f64) -> Result<ProfileCurve> {
    integrate_profile_with(f, x10, x00, theta0, arclen, step, ProfileOptions::default())
}

pub fn integrate_profile_with(
    f: &FunctionSpec1D,
    x10: f64,
    x00: f64,
    theta0: f64,
    arclen: f64,
    step: f64,
    options: ProfileOptions,
) -> Result<ProfileCurve> {
    if !(step > 0.0) || !(arclen >= 0.0) || !arclen.is_finite() {
        return Err(Error::InvalidSpec("step must be positive and arclen non-negative".into()));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta0) {
        return Err(Error::out_of_domain("theta0", theta0, 0.0, std::f64::consts::PI));
    }
    let f0 = f.eval(x10, 0)?;
    if !(f0 > 0.0) {
        return Err(Error::NonPositiveWarping(x10));
    }
    match run_profile(f, x10, x00, theta0, arclen, step, options.breach_threshold) {
        Err(Error::ConservationBreach { .. }) if options.retry => {
            log::info!("profile drift breach at step {step}; retrying at {}", step / 2.0);
            run_profile(f, x10, x00, theta0, arclen, step / 2.0, options.breach_threshold)
        }
        other => other,
    }
}

fn run_profile(
    f: &FunctionSpec1D,
    x10: f64,
    x00: f64,
    theta0: f64,
    arclen: f64,
    step: f64,
    breach: Option<f64>,
) -> Result<ProfileCurve> {
    let c = theta0.sin() / f.eval_unchecked(x10, 0);
    let n = (arclen / step).ceil() as usize;
    let h = if n == 0 { step } else { arclen / n as f64 };
    let mut y = [x00, x10, theta0];
    let mut samples = vec![ProfileSample {
        s: 0.0,
        x0: x00,
        x1: x10,
        theta: theta0,
    }];
    let mut domain_exit = None;
    let mut max_drift: f64 = 0.0;
    for i in 1..=n {
        let next = profile_step(f, y, h);
        let s = i as f64 * h;
        if !f.contains(next[1]) || !(f.eval_unchecked(next[1], 0) > 0.0) {
            domain_exit = Some(s);
            break;
        }
        let drift = (next[2].sin() - c * f.eval_unchecked(next[1], 0)).abs();
        if let Some(limit) = breach {
            if drift > limit {
                return Err(Error::ConservationBreach { drift, s, step: h });
            }
        }
        max_drift = max_drift.max(drift);
        y = next;
        samples.push(ProfileSample {
            s,
            x0: y[0],
            x1: y[1],
            theta: y[2],
        });
    }
    if let Some(s) = domain_exit {
        log::info!("profile leaves the domain of f at s = {s}");
    }
    Ok(ProfileCurve {
        samples,
        c,
        f: f.clone(),
        step: h,
        domain_exit,
        max_drift,
    })
}

/// The hypersurface `(s, u) -> (x0(s), x1(s), u)` swept by a profile curve.
///
/// The normal is `cos(theta) d/dx0 - sin(theta) d/dx1` and the attached expectation is
/// the umbilicity factor `theta'(s)`.
pub fn build_umbilical_immersion(chart: &MetricChart, profile: &ProfileCurve) -> Result<ImmersionSpec> {
    let (warp, m) = match chart.kind() {
        ChartKind::WarpedProduct { warp, fiber_dim, .. } => (warp, *fiber_dim),
        _ => return Err(Error::InvalidSpec("umbilical immersions need a warped-product chart".into())),
    };
    if warp != &profile.f {
        return Err(Error::MismatchedWarping);
    }
    profile_immersion(chart, profile, m)
}

fn profile_immersion(chart: &MetricChart, profile: &ProfileCurve, m: usize) -> Result<ImmersionSpec> {
    let curve = Arc::new(profile.clone());
    let (c1, c2, c3) = (curve.clone(), curve.clone(), curve);
    let map = move |q: &[f64]| -> Vec<f64> {
        let y = c1.state_at(q[0]);
        let mut p = vec![y[0], y[1]];
        p.extend_from_slice(&q[1..]);
        p
    };
    let jac = move |q: &[f64]| -> Vec<Vec<f64>> {
        let th = c2.state_at(q[0])[2];
        let mut ts = vec![0.0; m + 2];
        ts[0] = th.sin();
        ts[1] = th.cos();
        let mut out = vec![ts];
        for i in 0..m {
            let mut e = vec![0.0; m + 2];
            e[2 + i] = 1.0;
            out.push(e);
        }
        out
    };
    let mut param_box = vec![[0.0, profile.arclen()]];
    param_box.extend_from_slice(&chart.bounds()[2..]);
    let imm = ImmersionSpec::custom(param_box, map, Some(Arc::new(jac)))
        .with_kind(ImmersionKind::ProfileBuilt)
        .with_expectation(Expectation::Umbilical(Arc::new(move |q: &[f64]| c3.theta_prime_at(q[0]))));
    // the oriented completion points along cos(theta) dx0 - sin(theta) dx1 for odd m only
    let q: Vec<f64> = imm.param_box().iter().map(|b| 0.5 * (b[0] + b[1])).collect();
    let th = profile.state_at(q[0])[2];
    let n = crate::hypersurface::normal_at(chart, &imm, &q)?;
    Ok(if n[0] * th.cos() - n[1] * th.sin() < 0.0 { imm.flipped() } else { imm })
}

/// Tabulated change of variable `s = int_{t0}^t dt / f` turning
/// `dt^2 + f(t)^2 g` into `h(s)^2 (ds^2 + g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMap {
    pub t0: f64,
    pub s_of_t: FunctionSpec1D,
    pub t_of_s: FunctionSpec1D,
    /// `h(s) = f(t(s))`
    pub h: FunctionSpec1D,
    pub t_knots: Vec<f64>,
    pub s_knots: Vec<f64>,
}

/// Largest Simpson panel used by [`conformal_to_product`].
pub const SIMPSON_PANEL: f64 = 1e-3;

pub fn conformal_to_product(f: &FunctionSpec1D, interval: [f64; 2], t0: f64) -> Result<ConformalMap> {
    let [a, b] = interval;
    if !(a < b) || !(t0 >= a && t0 <= b) {
        return Err(Error::out_of_domain("t0", t0, a, b));
    }
    let n = ((b - a) / SIMPSON_PANEL).ceil().max(4.0) as usize;
    let t_knots: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mut fv = Vec::with_capacity(n + 1);
    for &t in &t_knots {
        let v = f.eval(t, 0)?;
        if !(v > 0.0) {
            return Err(Error::NonPositiveWarping(t));
        }
        fv.push(v);
    }
    // cumulative Simpson from a, one panel per knot interval
    let mut acc = vec![0.0; n + 1];
    for i in 0..n {
        let (t, u) = (t_knots[i], t_knots[i + 1]);
        let mid = f.eval(0.5 * (t + u), 0)?;
        if !(mid > 0.0) {
            return Err(Error::NonPositiveWarping(0.5 * (t + u)));
        }
        acc[i + 1] = acc[i] + (u - t) / 6.0 * (1.0 / fv[i] + 4.0 / mid + 1.0 / fv[i + 1]);
    }
    // offset so that s(t0) = 0: integrate from the knot below t0
    let k = (((t0 - a) / (b - a) * n as f64).floor() as usize).min(n - 1);
    let (t, u) = (t_knots[k], t0);
    let partial = if u > t {
        (u - t) / 6.0 * (1.0 / fv[k] + 4.0 / f.eval(0.5 * (t + u), 0)? + 1.0 / f.eval(u, 0)?)
    } else {
        0.0
    };
    let offset = acc[k] + partial;
    let s_knots: Vec<f64> = acc.iter().map(|s| s - offset).collect();
    Ok(ConformalMap {
        t0,
        s_of_t: FunctionSpec1D::tabulated(t_knots.clone(), s_knots.clone())?,
        t_of_s: FunctionSpec1D::tabulated(s_knots.clone(), t_knots.clone())?,
        h: FunctionSpec1D::tabulated(s_knots.clone(), fv)?,
        t_knots,
        s_knots,
    })
}

impl ConformalMap {
    /// Largest `|h(s(t)) - f(t)|` at the midpoints between knots.
    pub fn consistency_defect(&self, f: &FunctionSpec1D) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.t_knots.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let s = self.s_of_t.eval(t, 0)?;
            worst = worst.max((self.h.eval(s, 0)? - f.eval(t, 0)?).abs());
        }
        Ok(worst)
    }
}

/// A profile surface of the product `R x M` re-expressed in
/// `dt^2 + F(t)^2 g_M`, with `t = t(x0)` from the conformal map of `F`.
pub fn profile_in_warped_chart(chart: &MetricChart, profile: &ProfileCurve, map: &ConformalMap) -> Result<ImmersionSpec> {
    let m = match chart.kind() {
        ChartKind::WarpedOverWarped { warp, fiber_dim, .. } => {
            if warp != &profile.f {
                return Err(Error::MismatchedWarping);
            }
            *fiber_dim
        }
        _ => return Err(Error::InvalidSpec("expected a warped-over-warped chart".into())),
    };
    let curve = Arc::new(profile.clone());
    let (t_of_s, h) = (Arc::new(map.t_of_s.clone()), Arc::new(map.h.clone()));
    let (c1, c2, t1, h2) = (curve.clone(), curve, t_of_s, h);
    let map_fn = move |q: &[f64]| -> Vec<f64> {
        let y = c1.state_at(q[0]);
        let mut p = vec![t1.eval_unchecked(y[0], 0), y[1]];
        p.extend_from_slice(&q[1..]);
        p
    };
    let jac = move |q: &[f64]| -> Vec<Vec<f64>> {
        let y = c2.state_at(q[0]);
        let mut ts = vec![0.0; m + 2];
        ts[0] = h2.eval_unchecked(y[0], 0) * y[2].sin();
        ts[1] = y[2].cos();
        let mut out = vec![ts];
        for i in 0..m {
            let mut e = vec![0.0; m + 2];
            e[2 + i] = 1.0;
            out.push(e);
        }
        out
    };
    let mut param_box = vec![[0.0, profile.arclen()]];
    param_box.extend_from_slice(&chart.bounds()[2..]);
    Ok(ImmersionSpec::custom(param_box, map_fn, Some(Arc::new(jac))).with_kind(ImmersionKind::ProfileBuilt))
}

/// The same profile surface viewed in the conformal product chart `h^2 (ds^2 + g_M)`.
pub fn profile_in_conformal_chart(chart: &MetricChart, profile: &ProfileCurve) -> Result<ImmersionSpec> {
    match chart.kind() {
        ChartKind::ConformalProduct { warp, fiber_dim, .. } => {
            if warp != &profile.f {
                return Err(Error::MismatchedWarping);
            }
            Ok(profile_immersion(chart, profile, *fiber_dim)?.with_expectation(Expectation::None))
        }
        _ => Err(Error::InvalidSpec("expected a conformal-product chart".into())),
    }
}

fn theta_of(chart: &MetricChart) -> Result<&FunctionSpec1D> {
    match chart.kind() {
        ChartKind::Theta3 { theta } => Ok(theta),
        _ => Err(Error::InvalidSpec("expected a theta3 chart".into())),
    }
}

/// Tolerance on `theta'` deciding geodesic level surfaces and flow sweeps.
pub const TAU_ZERO_TOL: f64 = 1e-8;

/// The level surface `{x = x0}` of a normal-form chart.
pub fn build_level_surface(chart: &MetricChart, x0: f64) -> Result<ImmersionSpec> {
    let theta = theta_of(chart)?;
    let dtheta = theta.eval(x0, 1)?;
    let s = ImmersionSpec::slice(chart, 0, x0)?;
    Ok(s.with_kind(ImmersionKind::LevelX).with_expectation(Expectation::Level {
        totally_geodesic: dtheta.abs() < TAU_ZERO_TOL,
        extrinsic_curvature: -dtheta * dtheta,
    }))
}

/// Sweeps the geodesic from `p` in direction `dir` by the flow of `xi`,
/// `(s, t) -> gamma(s) + t (0, 1, 1)`.
pub fn build_tg_flow_surface(chart: &MetricChart, p: &[f64], dir: &[f64], arclen: f64) -> Result<ImmersionSpec> {
    let theta = theta_of(chart)?.clone();
    chart.check_point(p)?;
    let xi = chart.xi().ok_or(Error::NoXiField)?;
    let along = chart.inner(p, dir, &xi);
    if along.abs() > 1e-8 {
        return Err(Error::NotOrthogonal(along));
    }
    let path = geodesic_integrate(chart, p, dir, arclen, DEFAULT_STEP)?;
    for s in &path.samples {
        let d = theta.eval(s.point[0], 1)?;
        if d.abs() >= TAU_ZERO_TOL {
            return Err(Error::TauNonzeroOnGeodesic { s: s.s, tau: -d });
        }
    }
    let length = path.end().s;
    if !(length > 0.0) {
        return Err(Error::InvalidSpec("geodesic has zero length inside the chart".into()));
    }
    // flow times keeping y + t and z + t inside the box
    let b = chart.bounds();
    let (mut tlo, mut thi) = (f64::NEG_INFINITY, f64::INFINITY);
    for s in &path.samples {
        for k in [1, 2] {
            tlo = tlo.max(b[k][0] - s.point[k]);
            thi = thi.min(b[k][1] - s.point[k]);
        }
    }
    if !(tlo < thi) {
        return Err(Error::InvalidSpec("no flow time keeps the sweep inside the chart".into()));
    }
    let h = path.samples.get(1).map_or(DEFAULT_STEP, |s| s.s);
    let states: Arc<Vec<Vec<f64>>> = Arc::new(
        path.samples
            .iter()
            .map(|s| s.point.iter().chain(&s.velocity).copied().collect())
            .collect(),
    );
    let c = Arc::new(chart.clone());
    let state_at = move |s: f64| -> Vec<f64> {
        let k = ((s / h).round().max(0.0) as usize).min(states.len() - 1);
        rk4_geodesic_step(&c, &states[k], s - k as f64 * h)
    };
    let state_at = Arc::new(state_at);
    let (s1, s2) = (state_at.clone(), state_at);
    let map = move |q: &[f64]| -> Vec<f64> {
        let y = s1(q[0]);
        vec![y[0], y[1] + q[1], y[2] + q[1]]
    };
    let jac = move |q: &[f64]| -> Vec<Vec<f64>> {
        let y = s2(q[0]);
        vec![y[3..6].to_vec(), xi.clone()]
    };
    Ok(ImmersionSpec::custom(vec![[0.0, length], [tlo, thi]], map, Some(Arc::new(jac)))
        .with_kind(ImmersionKind::FlowSweep)
        .with_expectation(Expectation::TotallyGeodesic))
}
