//! Killing and closed conformal fields, and the twist function of the unit
//! Killing field `xi = dy + dz`.

use umbilic::field::{closed_conformal_defect, killing_defect, lie_bracket_at, tau_at, VectorFieldSpec};
use umbilic::{presets, FunctionSpec1D, MetricChart};

fn main() -> umbilic::Result<()> {
    let chart = presets::chart("wobble").expect("preset");
    let grid = chart.sample_grid(4);
    for (name, field) in [
        ("dx", VectorFieldSpec::Coordinate(0)),
        ("dy", VectorFieldSpec::Coordinate(1)),
        ("dz", VectorFieldSpec::Coordinate(2)),
        ("xi", VectorFieldSpec::Xi),
    ] {
        let r = killing_defect(&chart, &field, &grid, 1e-10)?;
        println!("{name}: Killing defect {:.3e} -> {}", r.max_defect, r.is_killing);
    }

    let bracket = lie_bracket_at(&chart, &VectorFieldSpec::Coordinate(1), &VectorFieldSpec::Coordinate(2), &[0.4, 0.0, 0.0])?;
    println!("[dy, dz] = {bracket:?}");

    for x in [-1.0, 0.0, 0.5, 2.0] {
        let tau = tau_at(&chart, &VectorFieldSpec::Xi, &[x, 0.3, -0.1])?;
        println!("tau({x}) = {tau:.10}, -theta'({x}) = {:.10}", -0.2 * f64::cos(x));
    }

    // f(x) d/dx on dx^2 + f(x)^2 (dy^2 + dz^2) is closed conformal with factor f'
    let f = FunctionSpec1D::cosine().on(-1.2, 1.2);
    let warped = MetricChart::diagonal_axis(f.clone(), f.clone())?;
    let field = VectorFieldSpec::LinearCombination {
        axis: 0,
        coefficients: vec![f, FunctionSpec1D::constant(0.0), FunctionSpec1D::constant(0.0)],
    };
    let r = closed_conformal_defect(&warped, &field, &warped.sample_grid(3), 1e-8)?;
    for (p, phi) in r.points.iter().zip(&r.phi).step_by(9) {
        println!("cos(x) d/dx at x = {:5.2}: phi {:.9}, f' = {:.9}", p[0], phi, -p[0].sin());
    }
    println!("max residual {:.2e}, closed conformal {}", r.max_residual, r.is_closed_conformal);
    Ok(())
}
