//! Arithmetic in the first Heisenberg group.
//!
//! Points are triples `(x, y, z)` with the product
//! `(x, y, z)·(x', y', z') = (x + x', y + y', z + z' + (x y' − x' y)/2)`.
//! The identity is the origin and the inverse of `(x, y, z)` is `(−x, −y, −z)`.
//!
//! Distances come from the Korányi gauge `|p|_G = ((x² + y²)² + 16 z²)^{1/4}`:
//! the left-invariant metric is `|p⁻¹·q|_G`, the right-invariant one `|p·q⁻¹|_G`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

/// A point of the Heisenberg group.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point { x, y, z }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Horizontal coordinates `(x, y)`.
    #[inline]
    pub fn horizontal(&self) -> HorizontalVec {
        HorizontalVec::new(self.x, self.y)
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        Point::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Mul for Point {
    type Output = Point;

    #[inline]
    fn mul(self, rhs: Point) -> Point {
        mul(self, rhs)
    }
}

/// A horizontal vector `(a, b, 0)` of the plane through the identity.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct HorizontalVec {
    pub a: f64,
    pub b: f64,
}

impl HorizontalVec {
    #[inline]
    pub const fn new(a: f64, b: f64) -> Self {
        HorizontalVec { a, b }
    }

    /// Unit vector at angle `theta`, scaled by `s`.
    #[inline]
    pub fn polar(theta: f64, s: f64) -> Self {
        let (sn, cs) = theta.sin_cos();
        HorizontalVec::new(s * cs, s * sn)
    }

    #[inline]
    pub fn dot(&self, other: &HorizontalVec) -> f64 {
        self.a * other.a + self.b * other.b
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    #[inline]
    pub fn as_point(&self) -> Point {
        Point::new(self.a, self.b, 0.0)
    }
}

/// Group product `p·q`.
#[inline]
pub fn mul(p: Point, q: Point) -> Point {
    Point {
        x: p.x + q.x,
        y: p.y + q.y,
        z: p.z + q.z + 0.5 * (p.x * q.y - q.x * p.y),
    }
}

/// Group inverse.
#[inline]
pub fn inv(p: Point) -> Point {
    Point::new(-p.x, -p.y, -p.z)
}

/// Korányi gauge.
#[inline]
pub fn gauge(p: Point) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + 16.0 * p.z * p.z).sqrt().sqrt()
}

/// Fourth power of the gauge; avoids the two square roots when only comparisons are needed.
#[inline]
pub fn gauge4(p: Point) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    r2 * r2 + 16.0 * p.z * p.z
}

/// Left-invariant gauge distance `|p⁻¹·q|_G`.
#[inline]
pub fn dist_left(p: Point, q: Point) -> f64 {
    gauge(mul(inv(p), q))
}

/// Right-invariant gauge distance `|p·q⁻¹|_G`.
#[inline]
pub fn dist_right(p: Point, q: Point) -> f64 {
    gauge(mul(p, inv(q)))
}

/// Which of the two gauge metrics to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Left,
    Right,
}

impl Metric {
    #[inline]
    pub fn dist(self, p: Point, q: Point) -> f64 {
        match self {
            Metric::Left => dist_left(p, q),
            Metric::Right => dist_right(p, q),
        }
    }

    /// Squared-squared distance, monotone in `dist`.
    #[inline]
    pub fn dist4(self, p: Point, q: Point) -> f64 {
        match self {
            Metric::Left => gauge4(mul(inv(p), q)),
            Metric::Right => gauge4(mul(p, inv(q))),
        }
    }
}

/// Anisotropic dilation `(λx, λy, λ²z)`. Panics in debug builds on negative `lambda`.
#[inline]
pub fn dilate(lambda: f64, p: Point) -> Point {
    debug_assert!(lambda >= 0.0, "dilation factor must be nonnegative");
    Point::new(lambda * p.x, lambda * p.y, lambda * lambda * p.z)
}

/// The point `p·(a, b, 0)` of the horizontal plane through `p`.
#[inline]
pub fn horiz_point(p: Point, w: HorizontalVec) -> Point {
    Point {
        x: p.x + w.a,
        y: p.y + w.b,
        z: p.z + 0.5 * (p.x * w.b - w.a * p.y),
    }
}

/// Vertical offset of `q` from the horizontal plane through `p`.
#[inline]
pub fn horiz_plane_offset(p: Point, q: Point) -> f64 {
    q.z - p.z - 0.5 * (p.x * (q.y - p.y) - (q.x - p.x) * p.y)
}

/// Whether `q` lies in the horizontal plane through `p`, up to `tol` in z.
#[inline]
pub fn in_horiz_plane(p: Point, q: Point, tol: f64) -> bool {
    horiz_plane_offset(p, q).abs() <= tol
}

/// Point at signed horizontal distance `s` from `p` along direction `theta`.
///
/// For fixed `theta` this is a Euclidean straight line, and any two of its points
/// lie in each other's horizontal planes.
#[inline]
pub fn horiz_line(p: Point, theta: f64, s: f64) -> Point {
    horiz_point(p, HorizontalVec::polar(theta, s))
}

/// Euclidean velocity of `s ↦ horiz_line(p, theta, s)`.
#[inline]
pub fn horiz_line_velocity(p: Point, theta: f64) -> [f64; 3] {
    let (sn, cs) = theta.sin_cos();
    [cs, sn, 0.5 * (p.x * sn - cs * p.y)]
}

/// `n` evenly spaced angles covering `[0, π)`.
pub fn half_turn_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

/// `n` evenly spaced angles covering `[0, 2π)`.
pub fn full_turn_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}
