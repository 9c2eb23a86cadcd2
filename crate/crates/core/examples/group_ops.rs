//! Group law, gauge, both metrics and horizontal lines.
use hquasi::group::{dilate, dist_left, dist_right, gauge, horiz_line, in_horiz_plane, inv, mul, Point};

fn main() {
    let p = Point::new(1.0, 0.0, 0.0);
    let q = Point::new(0.0, 1.0, 0.0);
    println!("p·q = {}, q·p = {}", mul(p, q), mul(q, p));
    println!("p⁻¹ = {}, |p·q| = {:.6}", inv(p), gauge(mul(p, q)));
    println!("left distance {:.6}, right distance {:.6}", dist_left(p, q), dist_right(p, q));
    println!("δ_2(p·q) = {}", dilate(2.0, mul(p, q)));
    let r = horiz_line(p, std::f64::consts::FRAC_PI_2, 0.7);
    println!("{r} lies in the horizontal plane of {p}: {}", in_horiz_plane(p, r, 1e-12));
}
