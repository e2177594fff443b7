//! Totally geodesic surfaces in the normal form: level surfaces where `theta' = 0`,
//! coordinate planes, surfaces swept by `xi` along a geodesic, and the Killing
//! extension of `T`.

use umbilic::constructor::{build_level_surface, build_tg_flow_surface};
use umbilic::hypersurface::{extended_t_killing_defect, umbilicity_report, ImmersionSpec};
use umbilic::structure::level_surface_extrinsic_curvature;
use umbilic::{presets, Error};

fn main() -> umbilic::Result<()> {
    let bump = presets::chart("bump").expect("preset");
    let theta = bump.theta().expect("theta3").clone();
    for x0 in [0.0, 0.5] {
        let s = build_level_surface(&bump, x0)?;
        let r = umbilicity_report(&bump, &s, &s.param_grid(4), 1e-8)?;
        println!(
            "x = {x0}: totally geodesic {}, det S = {:.10}",
            r.totally_geodesic,
            level_surface_extrinsic_curvature(&theta, x0)?
        );
    }

    // geodesic through x = 0 perpendicular to xi, swept by the flow of xi
    let t = std::f64::consts::FRAC_PI_4;
    let dir = [0.0, 1.0 / t.sin(), -1.0 / t.cos()];
    let n = dir[1] * dir[1] * t.sin().powi(2) + dir[2] * dir[2] * t.cos().powi(2);
    let dir: Vec<f64> = dir.iter().map(|v| v / n.sqrt()).collect();
    let sweep = build_tg_flow_surface(&bump, &[0.0, 0.0, 0.0], &dir, 1.0)?;
    let r = umbilicity_report(&bump, &sweep, &sweep.param_grid(4), 1e-8)?;
    println!("flow sweep at x = 0: max |principal curvature| {:.2e}", r.max_abs_eigenvalue);

    let hopf = presets::chart("hopf").expect("preset");
    match build_tg_flow_surface(&hopf, &[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0], 1.0) {
        Err(Error::TauNonzeroOnGeodesic { s, tau }) => println!("hopf: tau = {tau} at s = {s}, no sweep"),
        other => println!("hopf: unexpected {other:?}"),
    }

    let wobble = presets::chart("wobble").expect("preset");
    let grid3d = wobble.sample_grid(4);
    for axis in [2, 1] {
        let plane = ImmersionSpec::slice(&wobble, axis, 0.0)?;
        let k = extended_t_killing_defect(&wobble, &plane, &grid3d, 1e-10)?;
        println!("plane {{{} = 0}}: extended T has Killing defect {:.2e}", ["x", "y", "z"][axis], k.max_defect);
    }
    Ok(())
}
