//! Gauge distances from points to regions, and Hausdorff distance between clouds.
use hquasi::group::{Metric, Point};
use hquasi::hull::hausdorff;
use hquasi::region::RegionSpec;

fn main() -> hquasi::Result<()> {
    let stack = RegionSpec::disk_stack(1.0, 2.0, 1.0, 0.2)?;
    for p in [Point::new(3.0, 0.0, 0.0), Point::new(0.0, 0.0, 0.5), Point::new(0.5, 0.5, 0.1)] {
        println!(
            "{p}: left {:.4}, right {:.4}, inside {}",
            stack.distance(p, Metric::Left),
            stack.distance(p, Metric::Right),
            stack.contains(p)
        );
    }
    let a = [Point::ORIGIN, Point::new(1.0, 0.0, 0.0)];
    let b = [Point::new(0.0, 0.0, 0.25)];
    println!("hausdorff {:.4}", hausdorff(&a, &b, Metric::Left)?);
    Ok(())
}
