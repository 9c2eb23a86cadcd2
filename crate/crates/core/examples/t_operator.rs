//! The nonlocal operator T and its iteration on f = |1 - z²|.
use hquasi::direct::{t_iterate, t_step, ScanParams};
use hquasi::field::{build_field, BoxDomain};
use hquasi::group::Point;

fn main() -> hquasi::Result<()> {
    let domain = BoxDomain::new(Point::new(-2.0, -2.0, -3.0), Point::new(2.0, 2.0, 3.0))?;
    let f = build_field(domain, [33, 33, 49], |p: Point| (1.0 - p.z * p.z).abs(), 8.0, false)?;
    let scan = ScanParams { n_theta: 16, ..ScanParams::default() };
    let t1 = t_step(&f, &scan);
    for p in [Point::new(1.0, 0.0, 0.0), Point::new(0.0, 0.0, 0.5), Point::new(0.0, 0.0, 2.0)] {
        println!("f{p} = {:.3}, T[f] = {:.3}", f.eval(p), t1.eval(p));
    }
    let it = t_iterate(&f, &scan, 10, 1e-3)?;
    println!("{} iterations, converged {}", it.iterations, it.report.converged);
    for s in &it.report.steps {
        println!("  step {} change {:.2e}", s.outer, s.linf_change);
    }
    Ok(())
}
