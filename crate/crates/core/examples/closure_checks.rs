//! Global checks on `theta`: smooth closure to S^3 or S^2 x R, admissibility on R^3,
//! the submersion onto the base surface, and constant-curvature detection.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use umbilic::structure::{
    base_gauss_curvature_at, closure_smoothness_check, constant_curvature_detect, r3_admissibility, submersion_isometry_defect,
    ClosureTarget,
};
use umbilic::FunctionSpec1D;

fn main() -> umbilic::Result<()> {
    let hopf = FunctionSpec1D::affine(0.0, 1.0);
    let r = closure_smoothness_check(&hopf, FRAC_PI_2, ClosureTarget::S3, 2, 1e-8)?;
    println!("theta = x closes to S^3: {}", r.passed);
    let r = closure_smoothness_check(&hopf, FRAC_PI_2, ClosureTarget::S2xR, 2, 1e-8)?;
    println!(
        "theta = x closes to S^2 x R: {} (first failure: {})",
        r.passed,
        r.first_failure().map_or("-", |e| e.condition.as_str())
    );
    let steep = FunctionSpec1D::affine(0.0, FRAC_PI_2);
    let r = closure_smoothness_check(&steep, 1.0, ClosureTarget::S3, 2, 1e-8)?;
    println!("theta = (pi/2) x on [0, 1]: first failure {}", r.first_failure().map_or("-", |e| e.condition.as_str()));

    let tanh = FunctionSpec1D::tanh_bump(FRAC_PI_4, PI / 5.0, 1.0);
    let grid: Vec<f64> = (0..=2000).map(|i| -50.0 + 0.05 * i as f64).collect();
    let r = r3_admissibility(&tanh, &grid, 1e-6);
    println!("pi/4 + (pi/5) tanh x on R^3: {} with margin {:.6}", r.report.passed, r.min_margin);

    println!("base curvature of the Hopf map: {:.9}", base_gauss_curvature_at(&hopf, 0.6)?);
    let t: f64 = 0.6;
    let v = [0.0, t.cos() / t.sin(), -t.tan()];
    let norm = (v[1] * v[1] * t.sin().powi(2) + v[2] * v[2] * t.cos().powi(2)).sqrt();
    let v: Vec<f64> = v.iter().map(|c| c / norm).collect();
    println!("horizontal isometry defect: {:.2e}", submersion_isometry_defect(&hopf, &[t, 0.0, 0.0], &v)?);

    for (name, theta) in [
        ("x", hopf.clone()),
        ("pi/4", FunctionSpec1D::constant(FRAC_PI_4)),
        ("pi/4 + 0.1 sin x", FunctionSpec1D::sine_affine(FRAC_PI_4, 0.1, 1.0, 0.0)),
    ] {
        let c = constant_curvature_detect(&theta, [0.2, 1.2], 1e-10, 1)?;
        println!("theta = {name}: alpha^2 = {:?}, class {:?}", c.alpha_squared, c.class);
    }
    Ok(())
}
