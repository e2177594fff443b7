//! A warped product `dt^2 + e^{2t} g` is conformal to a product `h(s)^2 (ds^2 + g)`
//! with `s = 1 - e^{-t}`. An umbilical surface of the product stays umbilical in
//! both descriptions.

use umbilic::chart::Fiber;
use umbilic::constructor::{conformal_to_product, integrate_profile, profile_in_conformal_chart, profile_in_warped_chart};
use umbilic::hypersurface::umbilicity_report;
use umbilic::{FunctionSpec1D, MetricChart};

fn main() -> umbilic::Result<()> {
    let outer = FunctionSpec1D::exponential(0.0, 1.0, 1.0).on(-1.0, 1.0);
    let map = conformal_to_product(&outer, [-1.0, 1.0], 0.0)?;
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let s = map.s_of_t.value(t)?;
        println!("t = {t:5.2}: s = {s:.12} (1 - e^-t = {:.12}), h = {:.9}", 1.0 - f64::exp(-t), map.h.value(s)?);
    }
    println!("consistency |h(s(t)) - f(t)| = {:.2e}", map.consistency_defect(&outer)?);

    let warp = FunctionSpec1D::cosine().on(-1.2, 1.2);
    let profile = integrate_profile(&warp, 0.0, 0.0, 0.6, 1.0, 1e-3)?;
    let warped = MetricChart::warped_over_warped(outer.clone(), warp.clone(), 1, Fiber::Flat)?;
    let conformal = MetricChart::conformal_product(map.h.clone(), warp, 1, Fiber::Flat)?;
    let a = profile_in_warped_chart(&warped, &profile, &map)?;
    let b = profile_in_conformal_chart(&conformal, &profile)?;
    let ra = umbilicity_report(&warped, &a, &a.param_grid(4), 1e-6)?;
    let rb = umbilicity_report(&conformal, &b, &b.param_grid(4), 1e-6)?;
    println!("warped chart: deviation {:.2e}, umbilical {}", ra.deviation, ra.totally_umbilical);
    println!("conformal chart: deviation {:.2e}, umbilical {}", rb.deviation, rb.totally_umbilical);
    Ok(())
}
