//! Geodesics by the classical fourth-order Runge-Kutta method.

use serde::{Deserialize, Serialize};

use crate::chart::MetricChart;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub s: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    /// The path stopped early because the next step would leave the coordinate box.
    pub left_domain: bool,
}

impl GeodesicPath {
    /// Largest `| |gamma'|_g - 1 |` over the samples.
    pub fn max_speed_drift(&self, chart: &MetricChart) -> f64 {
        self.samples
            .iter()
            .map(|s| (chart.norm(&s.point, &s.velocity) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn end(&self) -> &GeodesicSample {
        self.samples.last().expect("a path holds at least its start")
    }
}

fn rhs(chart: &MetricChart, state: &[f64], d: usize) -> Vec<f64> {
    let (x, v) = state.split_at(d);
    let acc = chart.christoffel_closed(x).contract(v, v);
    v.iter().copied().chain(acc.into_iter().map(|a| -a)).collect()
}

/// One RK4 step of the geodesic flow on the stacked state `(x, v)`.
pub(crate) fn rk4_geodesic_step(chart: &MetricChart, state: &[f64], h: f64) -> Vec<f64> {
    let d = chart.dim();
    let axpy = |y: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(y, k)| y + a * k).collect()
    };
    let k1 = rhs(chart, state, d);
    let k2 = rhs(chart, &axpy(state, &k1, 0.5 * h), d);
    let k3 = rhs(chart, &axpy(state, &k2, 0.5 * h), d);
    let k4 = rhs(chart, &axpy(state, &k3, h), d);
    (0..2 * d)
        .map(|i| state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates the geodesic through `p` with unit initial velocity `v` for arc length
/// `length` in steps of `step`.
pub fn geodesic_integrate(chart: &MetricChart, p: &[f64], v: &[f64], length: f64, step: f64) -> Result<GeodesicPath> {
    let d = chart.dim();
    chart.check_point(p)?;
    if v.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: v.len(),
        });
    }
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::InvalidSpec("step must be positive and length non-negative".into()));
    }
    let speed = chart.norm(p, v);
    if (speed - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(speed));
    }
    let n = (length / step).ceil() as usize;
    let h = if n == 0 { 0.0 } else { length / n as f64 };
    let mut state: Vec<f64> = p.iter().chain(v).copied().collect();
    let mut samples = vec![GeodesicSample {
        s: 0.0,
        point: p.to_vec(),
        velocity: v.to_vec(),
    }];
    for i in 1..=n {
        let next = rk4_geodesic_step(chart, &state, h);
        if !chart.contains(&next[..d]) {
            return Ok(GeodesicPath {
                samples,
                left_domain: true,
            });
        }
        state = next;
        samples.push(GeodesicSample {
            s: i as f64 * h,
            point: state[..d].to_vec(),
            velocity: state[d..].to_vec(),
        });
    }
    Ok(GeodesicPath {
        samples,
        left_domain: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FunctionSpec1D;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn x_lines_are_geodesics() {
        let c = MetricChart::theta3(FunctionSpec1D::sine_affine(FRAC_PI_4, 0.2, 1.0, 0.0)).unwrap();
        let path = geodesic_integrate(&c, &[0.0, 0.5, -0.5], &[1.0, 0.0, 0.0], 1.0, 1e-3).unwrap();
        let end = path.end();
        assert_abs_diff_eq!(end.point[0], 1.0, epsilon = 1e-12);
        assert_eq!(end.point[1], 0.5);
        assert_eq!(end.point[2], -0.5);
        assert!(!path.left_domain);
    }

    #[test]
    fn hopf_fiber_direction_conserves_speed() {
        let c = MetricChart::theta3(FunctionSpec1D::affine(0.0, 1.0).on(0.05, FRAC_PI_2 - 0.05)).unwrap();
        let v = [0.0, 1.0 / FRAC_PI_4.sin(), 0.0];
        let path = geodesic_integrate(&c, &[FRAC_PI_4, 0.0, 0.0], &v, 0.5, 1e-3).unwrap();
        assert!(path.max_speed_drift(&c) < 1e-7);
    }

    #[test]
    fn leaving_the_box_is_flagged() {
        let c = MetricChart::theta3(FunctionSpec1D::affine(0.0, 1.0).on(0.05, FRAC_PI_2 - 0.05)).unwrap();
        let path = geodesic_integrate(&c, &[1.4, 0.0, 0.0], &[1.0, 0.0, 0.0], 1.0, 1e-2).unwrap();
        assert!(path.left_domain);
        assert!(path.end().point[0] <= FRAC_PI_2 - 0.05);
    }

    #[test]
    fn rejects_non_unit_velocity() {
        let c = MetricChart::theta3(FunctionSpec1D::constant(0.5)).unwrap();
        assert!(matches!(
            geodesic_integrate(&c, &[0.0, 0.0, 0.0], &[1.0, 1.0, 0.0], 1.0, 1e-3),
            Err(Error::NotUnit(_))
        ));
    }
}
