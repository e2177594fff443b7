//! The round 3-sphere in normal form: `theta(x) = x`.
//!
//! Prints the metric and connection at one point, sectional curvatures of random
//! planes, and the scalar curvature next to both closed-form expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umbilic::curvature::{scalar_curvature_report, sectional_curvature_at};
use umbilic::{presets, ChristoffelMethod};

fn main() -> umbilic::Result<()> {
    let chart = presets::chart("hopf").expect("preset");
    let p = [std::f64::consts::FRAC_PI_4, 0.0, 0.0];
    println!("g at x = pi/4:\n{}", chart.metric_at(&p)?);
    let gamma = chart.christoffel_at(&p, ChristoffelMethod::ClosedForm)?;
    println!("Gamma^y_xy = {:.12}, Gamma^x_yy = {:.12}", gamma.get(1, 0, 1), gamma.get(0, 1, 1));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let q = [rng.gen_range(0.1..1.4), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let v1: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v2: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        println!("K at x = {:.3}: {:.9}", q[0], sectional_curvature_at(&chart, &q, &v1, &v2)?);
    }

    let r = scalar_curvature_report(&chart, &p, 1e-4)?;
    println!(
        "scalar: numeric {:.9}, 6 theta'^2 - 4 cot(2 theta) theta'' = {:.9}, unit-coefficient form = {:.9} (flagged: {})",
        r.finite_difference, r.frame_oracle, r.unit_coefficient_formula, r.unit_coefficient_flagged
    );
    Ok(())
}
