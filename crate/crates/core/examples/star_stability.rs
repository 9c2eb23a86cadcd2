//! Star-shapedness probe and hull stability under ε-neighborhoods.
use hquasi::direct::ScanParams;
use hquasi::field::BoxDomain;
use hquasi::group::Point;
use hquasi::hull::{star_stability_probe, HullMethod};
use hquasi::region::RegionSpec;

fn main() -> hquasi::Result<()> {
    let ball = RegionSpec::gauge_ball(Point::ORIGIN, 1.0)?;
    let domain = BoxDomain::new(Point::new(-1.7, -1.7, -0.8), Point::new(1.7, 1.7, 0.8))?;
    let method = HullMethod::Direct { scan: ScanParams { n_theta: 12, ..ScanParams::default() }, max_iter: 6, tol_fix: 1e-3 };
    let r = star_stability_probe(&ball, &[0.5, 0.9], &[0.3, 0.15], domain, [35, 35, 17], 0.4, &method)?;
    println!("star shaped: {}, clearances {:?}", r.star_shaped, r.clearances);
    let mut out = Vec::new();
    r.write_gaps_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
