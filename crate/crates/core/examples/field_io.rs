//! Building a grid field, interpolating, differentiating and saving it.
use hquasi::field::{build_field, Axis, BoxDomain, GridField, SliceSpec};
use hquasi::group::{gauge, Point};

fn main() -> hquasi::Result<()> {
    let domain = BoxDomain::cube(1.0)?;
    let u = build_field(domain, [21, 21, 21], |p: Point| gauge(p).powi(2), 4.0, false)?;
    let p = Point::new(0.33, -0.2, 0.41);
    let g = u.horiz_grad(p);
    println!("u({p}) ≈ {:.5} (exact {:.5}), X1 u ≈ {:.4}, X2 u ≈ {:.4}", u.eval(p), gauge(p).powi(2), g.x1, g.x2);

    let dir = std::env::temp_dir().join("hquasi_field_io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("gauge2.hhf");
    u.save(&path)?;
    let back = GridField::load(&path)?;
    println!("round trip identical: {}", back.values() == u.values());
    let mut csv = Vec::new();
    let rows = back.write_slice_csv(SliceSpec { axis: Axis::Z, value: 0.0 }, &mut csv)?;
    println!("z = 0 slice: {rows} rows, written to {}", path.display());
    Ok(())
}
