//! Distance margins for nested sets and their hulls.
use hquasi::direct::ScanParams;
use hquasi::field::BoxDomain;
use hquasi::group::Point;
use hquasi::hull::{inclusion_margins, HullMethod};
use hquasi::region::RegionSpec;

fn main() -> hquasi::Result<()> {
    let d = RegionSpec::gauge_ball(Point::ORIGIN, 0.5)?;
    let e = RegionSpec::gauge_ball(Point::ORIGIN, 1.0)?;
    let domain = BoxDomain::new(Point::new(-1.6, -1.6, -0.8), Point::new(1.6, 1.6, 0.8))?;
    let method = HullMethod::Direct { scan: ScanParams { n_theta: 12, ..ScanParams::default() }, max_iter: 8, tol_fix: 1e-3 };
    let m = inclusion_margins(&d, &e, domain, [33, 33, 17], 0.5, &method)?;
    println!("hull margin {:.4} vs set margin {:.4} (grid step {:.3})", m.lhs, m.rhs, m.h);
    println!("left-metric margins {:.4} vs {:.4}", m.lhs_left, m.rhs_left);
    Ok(())
}
