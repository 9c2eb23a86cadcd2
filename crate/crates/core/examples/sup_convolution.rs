//! Right-invariant sup-convolution of an envelope and a quasiconvexity check on the result.
use hquasi::direct::{check_field_hquasiconvex, t_iterate, ScanParams};
use hquasi::field::{build_field, BoxDomain};
use hquasi::group::Point;
use hquasi::hj::{capped, capping_slope};
use hquasi::hull::sup_convolution;

fn main() -> hquasi::Result<()> {
    let k = 3.0;
    let raw = |p: Point| (1.0 - p.z * p.z).abs();
    let f = build_field(BoxDomain::cube(3.0)?, [25, 25, 25], capped(raw, k, 2.5, capping_slope(k, 0.0, 0.25)), k, true)?;
    let scan = ScanParams { n_theta: 16, interp_slack: 2.0, ..ScanParams::default() };
    let u = t_iterate(&f, &scan, 20, 1e-4)?.field;
    println!("envelope: {} witnesses", check_field_hquasiconvex(&u, &scan)?.len());
    for delta in [0.3, 0.6] {
        let s = sup_convolution(&u, delta)?;
        let w = check_field_hquasiconvex(&s.field, &scan)?;
        println!("δ = {delta}: min {:.3}, {} witnesses", s.field.min_value(), w.len());
    }
    Ok(())
}
