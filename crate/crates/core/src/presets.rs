//! Named profiles and charts used by the command line and the examples.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::chart::MetricChart;
use crate::function::FunctionSpec1D;

pub const THETA_PRESETS: [&str; 4] = ["hopf", "const", "wobble", "bump"];
pub const WARP_PRESETS: [&str; 3] = ["one", "cos", "exp"];

/// `hopf`: `theta = x` on `[0, pi/2]`; `const`: `pi/4`; `wobble`: `pi/4 + 0.2 sin x`;
/// `bump`: `pi/4 + 0.1 x^2`.
pub fn theta(name: &str) -> Option<FunctionSpec1D> {
    Some(match name {
        "hopf" => FunctionSpec1D::affine(0.0, 1.0).on(0.0, FRAC_PI_2),
        "const" => FunctionSpec1D::constant(FRAC_PI_4),
        "wobble" => FunctionSpec1D::sine_affine(FRAC_PI_4, 0.2, 1.0, 0.0),
        "bump" => FunctionSpec1D::polynomial(vec![FRAC_PI_4, 0.0, 0.1]),
        _ => return None,
    })
}

/// Normal-form charts over the presets, with `x` ranges that keep `theta` inside
/// `(0, pi/2)`.
pub fn chart(name: &str) -> Option<MetricChart> {
    let (t, lo, hi) = match name {
        "hopf" => (FunctionSpec1D::affine(0.0, 1.0), 0.05, FRAC_PI_2 - 0.05),
        "const" => (theta("const")?, -1.0, 1.0),
        "wobble" => (theta("wobble")?, -3.0, 3.0),
        "bump" => (theta("bump")?, -1.0, 1.0),
        _ => return None,
    };
    Some(MetricChart::theta3(t.on(lo, hi)).expect("preset charts are valid"))
}

/// `one`: `f = 1`; `cos`: `cos x` on `[-1.5, 1.5]`; `exp`: `e^x` on `[-5, 5]`.
pub fn warp(name: &str) -> Option<FunctionSpec1D> {
    Some(match name {
        "one" => FunctionSpec1D::constant(1.0),
        "cos" => FunctionSpec1D::cosine().on(-1.5, 1.5),
        "exp" => FunctionSpec1D::exponential(0.0, 1.0, 1.0).on(-5.0, 5.0),
        _ => return None,
    })
}

/// File name of the bundled JSON for a chart preset.
pub fn chart_file(name: &str) -> Option<&'static str> {
    Some(match name {
        "hopf" => "theta3_hopf.json",
        "const" => "theta_const.json",
        "wobble" => "theta_wobble.json",
        "bump" => "theta_bump.json",
        _ => return None,
    })
}
