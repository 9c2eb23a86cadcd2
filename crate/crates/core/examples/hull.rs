//! Level-set h-convex hull of a supercritical disk stack.
use hquasi::direct::ScanParams;
use hquasi::field::BoxDomain;
use hquasi::group::Point;
use hquasi::hull::{hull_compute, HullMethod};
use hquasi::region::RegionSpec;

fn main() -> hquasi::Result<()> {
    let stack = RegionSpec::disk_stack(2.0, 2.0, 1.0, 0.25)?;
    let domain = BoxDomain::new(Point::new(-2.6, -2.6, -1.2), Point::new(2.6, 2.6, 2.2))?;
    let method = HullMethod::Direct { scan: ScanParams { n_theta: 16, ..ScanParams::default() }, max_iter: 8, tol_fix: 1e-3 };
    let h = hull_compute(&stack, domain, [27, 27, 18], 0.5, &method)?;
    let added = h.points().into_iter().filter(|p| !stack.contains(*p)).count();
    println!("{} hull nodes, {added} outside the stack, converged {}", h.hull_nodes.len(), h.report.converged);
    Ok(())
}
