//! Geodesics of the normal-form metric. Lines in `x` are geodesics for every
//! `theta`; other directions bend, with speed conserved by the integrator.

use umbilic::geodesic::geodesic_integrate;
use umbilic::presets;

fn main() -> umbilic::Result<()> {
    let chart = presets::chart("hopf").expect("preset");
    let p = [std::f64::consts::FRAC_PI_4, 0.0, 0.0];
    let line = geodesic_integrate(&chart, &p, &[1.0, 0.0, 0.0], 0.5, 1e-3)?;
    println!("along dx: end {:?}", line.end().point);

    let v = [0.0, std::f64::consts::SQRT_2, 0.0];
    let path = geodesic_integrate(&chart, &p, &v, 0.5, 1e-3)?;
    println!("along dy: end {:?}, speed drift {:.2e}", path.end().point, path.max_speed_drift(&chart));

    let exit = geodesic_integrate(&chart, &[0.1, 0.0, 0.0], &[-1.0, 0.0, 0.0], 1.0, 1e-3)?;
    println!("towards x = 0: left the chart {} after {:.3}", exit.left_domain, exit.end().s);
    Ok(())
}
