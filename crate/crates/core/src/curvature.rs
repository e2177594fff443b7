//! Riemann, sectional and scalar curvature.
//!
//! The Riemann tensor is assembled from centered differences of the closed-form
//! Christoffel symbols. For the `Theta3` normal form an orthonormal-frame closed form
//! serves as an independent oracle: the frame curvatures are
//! `K_xy = theta'^2 - cot(theta) theta''`, `K_xz = theta'^2 + tan(theta) theta''`
//! and `K_yz = theta'^2`, so the scalar curvature is `6 theta'^2 - 4 cot(2 theta) theta''`.

use serde::{Deserialize, Serialize};

use crate::chart::{fd_step, ChartKind, Christoffel, MetricChart};
use crate::error::{Error, Result};
use crate::function::FunctionSpec1D;

/// Curvature tensor components `R^l_ijk`, with `R(d_i, d_j) d_k = R^l_ijk d_l` and
/// `R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`.
#[derive(Debug, Clone)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.data[((l * d + i) * d + j) * d + k]
    }

    fn set(&mut self, l: usize, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim;
        self.data[((l * d + i) * d + j) * d + k] = v;
    }

    /// `Ric_jk = R^i_ijk`
    pub fn ricci(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).map(|k| (0..d).map(|i| self.get(i, i, j, k)).sum()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMethod {
    ClosedForm,
    FiniteDifference,
}

/// One curvature evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub plane: [Vec<f64>; 2],
    pub sectional: f64,
    pub scalar: f64,
    pub method: CurvatureMethod,
}

const MAX_CURVATURE_DIM: usize = 4;

/// Riemann tensor at `p` by centered differences of the connection.
pub fn riemann_at(chart: &MetricChart, p: &[f64]) -> Result<Riemann> {
    chart.check_point(p)?;
    let d = chart.dim();
    if d > MAX_CURVATURE_DIM {
        return Err(Error::InvalidSpec(format!(
            "curvature is limited to dimension {MAX_CURVATURE_DIM}"
        )));
    }
    let gamma = chart.christoffel_closed(p);
    let dgamma: Vec<Christoffel> = (0..d)
        .map(|m| {
            // five-point centered stencil
            let h = fd_step(p[m]);
            let at = |off: f64| {
                let mut q = p.to_vec();
                q[m] += off;
                chart.christoffel_closed(&q)
            };
            let (g1, gm1, g2, gm2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            let mut out = Christoffel::zeros(d);
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let v = 8.0 * (g1.get(k, i, j) - gm1.get(k, i, j)) - (g2.get(k, i, j) - gm2.get(k, i, j));
                        out.set(k, i, j, v / (12.0 * h));
                    }
                }
            }
            out
        })
        .collect();
    let mut r = Riemann {
        dim: d,
        data: vec![0.0; d * d * d * d],
    };
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..d {
                        v += gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    r.set(l, i, j, k, v);
                }
            }
        }
    }
    Ok(r)
}

/// Sectional curvature of `span(v1, v2)` at `p`.
pub fn sectional_curvature_at(chart: &MetricChart, p: &[f64], v1: &[f64], v2: &[f64]) -> Result<f64> {
    let d = chart.dim();
    if v1.len() != d || v2.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: v1.len().min(v2.len()),
        });
    }
    chart.check_point(p)?;
    let area2 = chart.inner(p, v1, v1) * chart.inner(p, v2, v2) - chart.inner(p, v1, v2).powi(2);
    let area = area2.max(0.0).sqrt();
    if area < 1e-12 {
        return Err(Error::DegeneratePlane(area));
    }
    let r = riemann_at(chart, p)?;
    let g = chart.metric_diag_unchecked(p);
    // <R(v1, v2) v2, v1>
    let mut num = 0.0;
    for l in 0..d {
        let mut comp = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    comp += r.get(l, i, j, k) * v1[i] * v2[j] * v2[k];
                }
            }
        }
        num += g[l] * comp * v1[l];
    }
    Ok(num / area2)
}

/// Scalar curvature `g^jk Ric_jk` at `p`.
pub fn scalar_curvature_at(chart: &MetricChart, p: &[f64]) -> Result<f64> {
    let r = riemann_at(chart, p)?;
    let ric = r.ricci();
    let g = chart.metric_diag_unchecked(p);
    Ok((0..chart.dim()).map(|j| ric[j][j] / g[j]).sum())
}

/// Sectional and scalar curvature of one plane, packaged as a sample.
pub fn curvature_sample(chart: &MetricChart, p: &[f64], v1: &[f64], v2: &[f64]) -> Result<CurvatureSample> {
    Ok(CurvatureSample {
        point: p.to_vec(),
        plane: [v1.to_vec(), v2.to_vec()],
        sectional: sectional_curvature_at(chart, p, v1, v2)?,
        scalar: scalar_curvature_at(chart, p)?,
        method: CurvatureMethod::FiniteDifference,
    })
}

/// Orthonormal-frame sectional curvatures `[K_xy, K_xz, K_yz]` of the normal form.
pub fn theta3_frame_curvatures(theta: &FunctionSpec1D, x: f64) -> Result<[f64; 3]> {
    let t = theta.eval(x, 0)?;
    let d1 = theta.eval(x, 1)?;
    let d2 = theta.eval(x, 2)?;
    let (cot, tan) = (1.0 / t.tan(), t.tan());
    Ok([d1 * d1 - cot * d2, d1 * d1 + tan * d2, d1 * d1])
}

/// Sectional curvature of an arbitrary plane from the frame curvatures. The curvature
/// operator of the normal form is diagonal on the coordinate bivectors.
pub fn theta3_sectional_oracle(theta: &FunctionSpec1D, p: &[f64], v1: &[f64], v2: &[f64]) -> Result<f64> {
    let t = theta.eval(p[0], 0)?;
    let scale = [1.0, t.sin(), t.cos()];
    let a: Vec<f64> = (0..3).map(|i| v1[i] * scale[i]).collect();
    let b: Vec<f64> = (0..3).map(|i| v2[i] * scale[i]).collect();
    let k = theta3_frame_curvatures(theta, p[0])?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut num = 0.0;
    let mut area2 = 0.0;
    for (kk, (i, j)) in k.iter().zip(pairs) {
        let w = a[i] * b[j] - a[j] * b[i];
        num += kk * w * w;
        area2 += w * w;
    }
    if area2.sqrt() < 1e-12 {
        return Err(Error::DegeneratePlane(area2.sqrt()));
    }
    Ok(num / area2)
}

/// `6 theta'^2 - 4 cot(2 theta) theta''`
pub fn theta3_scalar_oracle(theta: &FunctionSpec1D, x: f64) -> Result<f64> {
    let k = theta3_frame_curvatures(theta, x)?;
    let direct = 2.0 * (k[0] + k[1] + k[2]);
    let t = theta.eval(x, 0)?;
    let (d1, d2) = (theta.eval(x, 1)?, theta.eval(x, 2)?);
    let closed = 6.0 * d1 * d1 - 4.0 / (2.0 * t).tan() * d2;
    debug_assert!((direct - closed).abs() <= 1e-9 * (1.0 + closed.abs()));
    Ok(closed)
}

/// `theta'^2 - 4 cot(2 theta) theta''`: the variant of the scalar-curvature closed form
/// with unit coefficient on `theta'^2`. It disagrees with the frame computation
/// whenever `theta' != 0` and is reported only for comparison.
pub fn theta3_scalar_unit_coefficient(theta: &FunctionSpec1D, x: f64) -> Result<f64> {
    let t = theta.eval(x, 0)?;
    let (d1, d2) = (theta.eval(x, 1)?, theta.eval(x, 2)?);
    Ok(d1 * d1 - 4.0 / (2.0 * t).tan() * d2)
}

/// Numeric scalar curvature next to both closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCurvatureReport {
    pub point: Vec<f64>,
    pub finite_difference: f64,
    pub frame_oracle: f64,
    pub unit_coefficient_formula: f64,
    pub oracle_discrepancy: f64,
    pub unit_coefficient_discrepancy: f64,
    /// Set when the unit-coefficient formula misses the numeric value by more than
    /// the tolerance.
    pub unit_coefficient_flagged: bool,
    pub tolerance: f64,
}

pub fn scalar_curvature_report(chart: &MetricChart, p: &[f64], tol: f64) -> Result<ScalarCurvatureReport> {
    let theta = match chart.kind() {
        ChartKind::Theta3 { theta } => theta,
        _ => {
            return Err(Error::InvalidSpec(
                "scalar curvature report needs a theta3 chart".into(),
            ))
        }
    };
    let fd = scalar_curvature_at(chart, p)?;
    let oracle = theta3_scalar_oracle(theta, p[0])?;
    let unit = theta3_scalar_unit_coefficient(theta, p[0])?;
    Ok(ScalarCurvatureReport {
        point: p.to_vec(),
        finite_difference: fd,
        frame_oracle: oracle,
        unit_coefficient_formula: unit,
        oracle_discrepancy: (fd - oracle).abs(),
        unit_coefficient_discrepancy: (fd - unit).abs(),
        unit_coefficient_flagged: (fd - unit).abs() > tol,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const EX: [f64; 3] = [1.0, 0.0, 0.0];
    const EY: [f64; 3] = [0.0, 1.0, 0.0];
    const EZ: [f64; 3] = [0.0, 0.0, 1.0];

    fn hopf() -> MetricChart {
        MetricChart::theta3(FunctionSpec1D::affine(0.0, 1.0).on(0.05, FRAC_PI_2 - 0.05)).unwrap()
    }

    #[test]
    fn hopf_sectional_is_one() {
        let k = sectional_curvature_at(&hopf(), &[0.3, 0.0, 0.0], &EX, &EY).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn flat_theta_has_zero_curvature() {
        let c = MetricChart::theta3(FunctionSpec1D::constant(0.4)).unwrap();
        for (a, b) in [(EX, EY), (EX, EZ), (EY, EZ)] {
            let k = sectional_curvature_at(&c, &[0.2, 0.1, -0.3], &a, &b).unwrap();
            assert_abs_diff_eq!(k, 0.0, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(scalar_curvature_at(&c, &[0.2, 0.1, -0.3]).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn linear_theta_fiber_plane() {
        let theta = FunctionSpec1D::affine(FRAC_PI_4, 0.1).on(0.0, 1.0);
        let c = MetricChart::theta3(theta.clone()).unwrap();
        let k = sectional_curvature_at(&c, &[0.5, 0.0, 0.0], &EY, &EZ).unwrap();
        // oracle: K_yz = theta'^2
        assert_abs_diff_eq!(k, theta3_frame_curvatures(&theta, 0.5).unwrap()[2], epsilon = 1e-12);
        assert_abs_diff_eq!(k, 0.01, epsilon = 1e-5);
    }

    #[test]
    fn hopf_scalar_is_six() {
        let c = hopf();
        for x in [0.2, 0.8, 1.3] {
            assert_abs_diff_eq!(scalar_curvature_at(&c, &[x, 0.4, -1.0]).unwrap(), 6.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn wobble_scalar_matches_frame_oracle() {
        let theta = FunctionSpec1D::sine_affine(FRAC_PI_4, 0.2, 1.0, 0.0);
        let c = MetricChart::theta3(theta.clone()).unwrap();
        let fd = scalar_curvature_at(&c, &[0.3, 0.0, 0.0]).unwrap();
        let oracle = theta3_scalar_oracle(&theta, 0.3).unwrap();
        assert_abs_diff_eq!(fd, oracle, epsilon = 1e-4);
        let report = scalar_curvature_report(&c, &[0.3, 0.0, 0.0], 1e-4).unwrap();
        assert!(report.unit_coefficient_flagged);
    }

    #[test]
    fn degenerate_plane_rejected() {
        let err = sectional_curvature_at(&hopf(), &[0.3, 0.0, 0.0], &EX, &[2.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::DegeneratePlane(_))));
    }

    #[test]
    fn base2_gauss_curvature_of_hopf_base_is_four() {
        let c = MetricChart::base2(FunctionSpec1D::affine(0.0, 1.0).on(0.05, 1.5)).unwrap();
        let k = sectional_curvature_at(&c, &[0.7, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(k, 4.0, epsilon = 1e-5);
    }
}
