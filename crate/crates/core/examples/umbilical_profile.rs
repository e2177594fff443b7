//! Totally umbilical hypersurfaces swept by a profile curve in `R x_f M`.
//!
//! For each warping function the profile ODE is integrated and the swept surface is
//! checked: its shape operator is `theta'(s)` times the identity.

use umbilic::chart::Fiber;
use umbilic::constructor::{build_umbilical_immersion, integrate_profile};
use umbilic::hypersurface::{decompose_xi_at, umbilicity_report};
use umbilic::{presets, MetricChart};

fn main() -> umbilic::Result<()> {
    for (name, x10, theta0) in [("one", 0.0, 0.7), ("cos", 0.0, std::f64::consts::FRAC_PI_6), ("exp", -1.0, 0.4)] {
        let f = presets::warp(name).expect("preset");
        let chart = MetricChart::warped_product(f.clone(), 1, Fiber::Flat)?;
        let profile = integrate_profile(&f, x10, 0.0, theta0, 2.0, 1e-3)?;
        let imm = build_umbilical_immersion(&chart, &profile)?;
        let grid = imm.param_grid(5);
        let report = umbilicity_report(&chart, &imm, &grid, 1e-6)?;
        let mid = [profile.arclen() / 2.0, 0.0];
        let split = decompose_xi_at(&chart, &imm, &mid)?;
        println!(
            "f = {name}: c = {:.6}, length {:.3}, drift {:.1e}, deviation {:.1e}, umbilical {}, nu(mid) = {:.9} vs cos(theta) = {:.9}",
            profile.c,
            profile.arclen(),
            profile.max_drift,
            report.deviation,
            report.totally_umbilical,
            split.nu,
            profile.state_at(mid[0])[2].cos()
        );
    }

    // a two-dimensional round fiber
    let f = presets::warp("cos").expect("preset");
    let chart = MetricChart::warped_product(f.clone(), 2, Fiber::RoundUnitSphere)?;
    let profile = integrate_profile(&f, 0.2, 0.0, 1.0, 1.0, 1e-3)?;
    let imm = build_umbilical_immersion(&chart, &profile)?;
    let r = umbilicity_report(&chart, &imm, &imm.param_grid(3), 1e-6)?;
    println!("round fiber, m = 2: deviation {:.1e}, umbilical {}", r.deviation, r.totally_umbilical);
    Ok(())
}
