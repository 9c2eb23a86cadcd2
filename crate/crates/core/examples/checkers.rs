//! Falsification searches for h-convex sets and h-quasiconvex functions.
use hquasi::direct::{check_field_hquasiconvex, check_set_hconvex, ScanParams};
use hquasi::field::{build_field, BoxDomain};
use hquasi::group::Point;
use hquasi::region::RegionSpec;

fn main() -> hquasi::Result<()> {
    let scan = ScanParams { n_theta: 32, n_s: 32, ..ScanParams::default() };
    for (r, big_r, t) in [(1.0, 1.0, 1.0), (2.0, 2.0, 1.0)] {
        let stack = RegionSpec::disk_stack(r, big_r, t, 0.2)?;
        let w = check_set_hconvex(&stack, &scan, 500, 0)?;
        println!("disk stack ({r}, {big_r}, {t}): {} witnesses", w.len());
        if let Some(w) = w.first() {
            println!("  segment {} -> {} leaves the set at {}", w.p, w.q, w.w);
        }
    }
    let domain = BoxDomain::new(Point::new(-2.0, -2.0, -3.0), Point::new(2.0, 2.0, 3.0))?;
    let f = build_field(domain, [17, 17, 25], |p: Point| (1.0 - p.z * p.z).abs(), 8.0, false)?;
    let w = check_field_hquasiconvex(&f, &ScanParams { n_theta: 8, ..ScanParams::default() })?;
    println!("|1 - z²|: {} witnesses", w.len());
    Ok(())
}
