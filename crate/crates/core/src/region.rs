//! Analytic subsets of ℍ and gauge distances to them.
//!
//! Every primitive meets each vertical line `{(x, y)} × ℝ` in at most one
//! interval (its *column*). Distances are computed from columns: for a target
//! point `p` and a horizontal position `(x, y)`, the candidates `q` on that line
//! satisfy `|Δ|⁴ = ((x − x_p)² + (y − y_p)²)² + 16 (z_q − z*)²`, where `z*` is the
//! height of the horizontal plane of `p` over `(x, y)` (sign flipped for the
//! right-invariant metric). The distance is then a two-dimensional minimization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{BoxDomain, GridField};
use crate::group::{gauge4, inv, mul, Metric, Point};

/// A basic shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    /// Left-invariant gauge ball `{p : d_H(center, p) < radius}`.
    GaugeBall { center: Point, radius: f64 },
    /// Vertical cylinder on the z-axis: `x² + y² < radius²`, `z_lo < z < z_hi`.
    Cylinder { radius: f64, z_lo: f64, z_hi: f64 },
    Box { lo: Point, hi: Point },
}

impl Primitive {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Primitive::GaugeBall { center, radius } => center.is_finite() && radius > 0.0 && radius.is_finite(),
            Primitive::Cylinder { radius, z_lo, z_hi } => radius > 0.0 && radius.is_finite() && z_lo < z_hi && z_lo.is_finite() && z_hi.is_finite(),
            Primitive::Box { lo, hi } => BoxDomain::new(lo, hi).is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate primitive {self:?}")))
        }
    }

    /// Membership; `strict` selects the open set.
    #[inline]
    pub fn contains(&self, p: Point, strict: bool) -> bool {
        let lt = |a: f64, b: f64| if strict { a < b } else { a <= b };
        match *self {
            Primitive::GaugeBall { center, radius } => lt(gauge4(mul(inv(center), p)), radius.powi(4)),
            Primitive::Cylinder { radius, z_lo, z_hi } => {
                lt(p.x * p.x + p.y * p.y, radius * radius) && lt(z_lo, p.z) && lt(p.z, z_hi)
            }
            Primitive::Box { lo, hi } => {
                lt(lo.x, p.x) && lt(p.x, hi.x) && lt(lo.y, p.y) && lt(p.y, hi.y) && lt(lo.z, p.z) && lt(p.z, hi.z)
            }
        }
    }

    /// Closed column over `(x, y)`, if nonempty.
    #[inline]
    pub fn column(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        match *self {
            Primitive::GaugeBall { center: c, radius } => {
                let (a, b) = (x - c.x, y - c.y);
                let rho2 = a * a + b * b;
                let r2 = radius * radius;
                if rho2 > r2 {
                    return None;
                }
                let half = (r2 * r2 - rho2 * rho2).max(0.0).sqrt() / 4.0;
                let mid = c.z + 0.5 * (c.x * b - a * c.y);
                Some((mid - half, mid + half))
            }
            Primitive::Cylinder { radius, z_lo, z_hi } => (x * x + y * y <= radius * radius).then_some((z_lo, z_hi)),
            Primitive::Box { lo, hi } => (x >= lo.x && x <= hi.x && y >= lo.y && y <= hi.y).then_some((lo.z, hi.z)),
        }
    }

    pub fn bounding_box(&self) -> BoxDomain {
        let (lo, hi) = match *self {
            Primitive::GaugeBall { center: c, radius: r } => {
                let ch = (c.x * c.x + c.y * c.y).sqrt();
                let dz = r * r / 4.0 + ch * r / 2.0;
                (Point::new(c.x - r, c.y - r, c.z - dz), Point::new(c.x + r, c.y + r, c.z + dz))
            }
            Primitive::Cylinder { radius, z_lo, z_hi } => (Point::new(-radius, -radius, z_lo), Point::new(radius, radius, z_hi)),
            Primitive::Box { lo, hi } => (lo, hi),
        };
        BoxDomain { lo, hi }
    }

    /// A horizontal position with a nonempty column.
    fn anchor(&self) -> (f64, f64) {
        match *self {
            Primitive::GaugeBall { center, .. } => (center.x, center.y),
            Primitive::Cylinder { .. } => (0.0, 0.0),
            Primitive::Box { lo, hi } => (0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)),
        }
    }

    /// Largest gauge over the closure.
    fn max_gauge(&self) -> f64 {
        match *self {
            Primitive::GaugeBall { center, radius } => {
                // sampled over the sphere; the ball is compact and the gauge continuous
                let mut m: f64 = 0.0;
                for i in 0..=64 {
                    let rho = radius * i as f64 / 64.0;
                    let half = (radius.powi(4) - rho.powi(4)).max(0.0).sqrt() / 4.0;
                    for k in 0..64 {
                        let th = std::f64::consts::TAU * k as f64 / 64.0;
                        for s in [-1.0, 1.0] {
                            let q = Point::new(rho * th.cos(), rho * th.sin(), s * half);
                            m = m.max(gauge4(mul(center, q)));
                        }
                    }
                }
                m.powf(0.25) * (1.0 + 1e-3)
            }
            Primitive::Cylinder { radius, z_lo, z_hi } => {
                (radius.powi(4) + 16.0 * z_lo.abs().max(z_hi.abs()).powi(2)).powf(0.25)
            }
            Primitive::Box { lo, hi } => box_max_gauge(&BoxDomain { lo, hi }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Part {
    Plain(Primitive),
    /// `{p : d_H(p, inner) < eps}` for a union of primitives.
    Neighborhood { inner: Vec<Primitive>, eps: f64 },
}

impl Part {
    fn bounding_box(&self) -> BoxDomain {
        match self {
            Part::Plain(q) => q.bounding_box(),
            Part::Neighborhood { inner, eps } => {
                let mut b = inner[0].bounding_box();
                for q in &inner[1..] {
                    let c = q.bounding_box();
                    b = BoxDomain {
                        lo: Point::new(b.lo.x.min(c.lo.x), b.lo.y.min(c.lo.y), b.lo.z.min(c.lo.z)),
                        hi: Point::new(b.hi.x.max(c.hi.x), b.hi.y.max(c.hi.y), b.hi.z.max(c.hi.z)),
                    };
                }
                let mh = b.lo.x.abs().max(b.hi.x.abs()).hypot(b.lo.y.abs().max(b.hi.y.abs())) + eps;
                let dz = eps * eps / 4.0 + eps * mh / 2.0;
                BoxDomain {
                    lo: Point::new(b.lo.x - eps, b.lo.y - eps, b.lo.z - dz),
                    hi: Point::new(b.hi.x + eps, b.hi.y + eps, b.hi.z + dz),
                }
            }
        }
    }
}

fn box_max_gauge(b: &BoxDomain) -> f64 {
    let mut m: f64 = 0.0;
    for x in [b.lo.x, b.hi.x] {
        for y in [b.lo.y, b.hi.y] {
            for z in [b.lo.z, b.hi.z] {
                m = m.max(gauge4(Point::new(x, y, z)));
            }
        }
    }
    m.powf(0.25)
}

/// A bounded union of primitives and left-metric neighborhoods, open or closed.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    parts: Vec<Part>,
    open: bool,
}

impl RegionSpec {
    pub fn primitive(p: Primitive) -> Result<Self> {
        p.validate()?;
        Ok(RegionSpec { parts: vec![Part::Plain(p)], open: true })
    }

    pub fn gauge_ball(center: Point, radius: f64) -> Result<Self> {
        Self::primitive(Primitive::GaugeBall { center, radius })
    }

    pub fn cylinder(radius: f64, z_lo: f64, z_hi: f64) -> Result<Self> {
        Self::primitive(Primitive::Cylinder { radius, z_lo, z_hi })
    }

    pub fn boxed(lo: Point, hi: Point) -> Result<Self> {
        Self::primitive(Primitive::Box { lo, hi })
    }

    /// Two coaxial cylinders: radius `r` over `(−δ, 0)` and radius `big_r` over `(t, t + δ)`.
    pub fn disk_stack(r: f64, big_r: f64, t: f64, delta: f64) -> Result<Self> {
        if !(t > 0.0 && delta > 0.0) {
            return Err(Error::InvalidInput(format!("disk stack needs t > 0 and δ > 0, got t={t}, δ={delta}")));
        }
        Self::cylinder(r, -delta, 0.0)?.union(Self::cylinder(big_r, t, t + delta)?)
    }

    /// Left-metric `eps`-neighborhood of a region made of primitives.
    pub fn left_neighborhood(inner: &RegionSpec, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("neighborhood radius must be positive, got {eps}")));
        }
        let prims = inner
            .parts
            .iter()
            .map(|p| match p {
                Part::Plain(q) => Ok(*q),
                Part::Neighborhood { .. } => Err(Error::Unsupported("nested neighborhoods".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionSpec { parts: vec![Part::Neighborhood { inner: prims, eps }], open: true })
    }

    pub fn union(mut self, other: RegionSpec) -> Result<Self> {
        if self.open != other.open {
            return Err(Error::InvalidInput("cannot unite an open and a closed region".into()));
        }
        self.parts.extend(other.parts);
        Ok(self)
    }

    pub fn closed(mut self) -> Self {
        self.open = false;
        self
    }

    pub fn opened(mut self) -> Self {
        self.open = true;
        self
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    /// Primitive parts, if the region has no neighborhoods.
    pub fn primitives(&self) -> Option<Vec<Primitive>> {
        self.parts
            .iter()
            .map(|p| match p {
                Part::Plain(q) => Some(*q),
                Part::Neighborhood { .. } => None,
            })
            .collect()
    }

    /// Image under a map applied to every primitive (the map must keep primitives of
    /// the same kind; used for dilations and translations).
    pub fn map_primitives(&self, f: impl Fn(Primitive) -> Primitive) -> Result<Self> {
        let parts = self
            .parts
            .iter()
            .map(|p| match p {
                Part::Plain(q) => {
                    let m = f(*q);
                    m.validate().map(|_| Part::Plain(m))
                }
                Part::Neighborhood { .. } => Err(Error::Unsupported("mapping a neighborhood".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionSpec { parts, open: self.open })
    }

    pub fn contains(&self, p: Point) -> bool {
        let strict = self.open;
        self.parts.iter().any(|part| match part {
            Part::Plain(q) => q.contains(p, strict),
            Part::Neighborhood { inner, eps } => {
                let d = distance_to_union(inner, p, Metric::Left, eps.powi(4));
                if strict {
                    d < *eps
                } else {
                    d <= *eps
                }
            }
        })
    }

    pub fn bounding_box(&self) -> BoxDomain {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for b in self.parts.iter().map(Part::bounding_box) {
            for (a, (l, h)) in b.lo.to_array().into_iter().zip(b.hi.to_array()).enumerate() {
                lo[a] = lo[a].min(l);
                hi[a] = hi[a].max(h);
            }
        }
        BoxDomain { lo: Point::from_array(lo), hi: Point::from_array(hi) }
    }

    /// Upper bound on the gauge of points of the closure.
    pub fn max_gauge(&self) -> f64 {
        self.parts
            .iter()
            .map(|part| match part {
                Part::Plain(q) => q.max_gauge(),
                Part::Neighborhood { .. } => box_max_gauge(&part.bounding_box()),
            })
            .fold(0.0, f64::max)
    }

    /// Distance from `p` to the closure of the region.
    pub fn distance(&self, p: Point, metric: Metric) -> f64 {
        let prims: Vec<Primitive> = self
            .parts
            .iter()
            .filter_map(|q| if let Part::Plain(q) = q { Some(*q) } else { None })
            .collect();
        let mut best = if prims.is_empty() { f64::INFINITY } else { distance_to_union(&prims, p, metric, 0.0) };
        for part in &self.parts {
            if let Part::Neighborhood { inner, eps } = part {
                // exact for the left metric; an upper bound on the right-metric distance otherwise
                best = best.min((distance_to_union(inner, p, Metric::Left, 0.0) - eps).max(0.0));
            }
        }
        best
    }

    /// Distance from `p` to the complement. Requires a region of primitives only.
    pub fn distance_to_complement(&self, p: Point, metric: Metric) -> Result<f64> {
        let prims = self.primitives().ok_or_else(|| Error::Unsupported("complement distance of a neighborhood".into()))?;
        Ok(distance_to_complement(&prims, p, metric))
    }

    /// Continuous function negative exactly on the region.
    ///
    /// For primitive unions this is the signed right-invariant distance. A
    /// neighborhood part contributes `d_H(p, inner) − eps`; parts are combined by
    /// taking the minimum.
    pub fn defining_value(&self, p: Point) -> f64 {
        let prims: Vec<Primitive> = self
            .parts
            .iter()
            .filter_map(|q| if let Part::Plain(q) = q { Some(*q) } else { None })
            .collect();
        let mut best = f64::INFINITY;
        if !prims.is_empty() {
            best = if prims.iter().any(|q| q.contains(p, self.open)) {
                -distance_to_complement(&prims, p, Metric::Right)
            } else {
                distance_to_union(&prims, p, Metric::Right, 0.0)
            };
        }
        for part in &self.parts {
            if let Part::Neighborhood { inner, eps } = part {
                let v = distance_to_union(inner, p, Metric::Left, 0.0) - eps;
                best = best.min(v);
            }
        }
        if self.open {
            // boundary points of an open set are outside
            if best < 0.0 && !self.contains(p) {
                best = 0.0;
            }
        } else if best >= 0.0 && self.contains(p) {
            best = best.min(0.0);
        }
        best
    }

    /// Points where membership changes along grid edges, located by bisection.
    pub fn boundary_samples(&self, domain: &BoxDomain, dims: [usize; 3]) -> Result<Vec<Point>> {
        let grid = GridField::constant(*domain, dims, 0.0, 0.0)?;
        let inside: Vec<bool> = (0..grid.len()).into_par_iter().map(|i| self.contains(grid.node_point(i))).collect();
        let [nx, ny, nz] = dims;
        let strides = [1, nx, nx * ny];
        let pts: Vec<Point> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let ijk = grid.ijk(i);
                let mut out = Vec::new();
                for a in 0..3 {
                    if ijk[a] + 1 >= [nx, ny, nz][a] {
                        continue;
                    }
                    let j = i + strides[a];
                    if inside[i] != inside[j] {
                        let (mut pin, mut pout) = if inside[i] {
                            (grid.node_point(i), grid.node_point(j))
                        } else {
                            (grid.node_point(j), grid.node_point(i))
                        };
                        for _ in 0..40 {
                            let m = Point::new(0.5 * (pin.x + pout.x), 0.5 * (pin.y + pout.y), 0.5 * (pin.z + pout.z));
                            if self.contains(m) {
                                pin = m;
                            } else {
                                pout = m;
                            }
                        }
                        out.push(pin);
                    }
                }
                out
            })
            .collect();
        if pts.is_empty() {
            return Err(Error::Empty("no boundary crossing found on the sampling grid".into()));
        }
        Ok(pts)
    }
}

/// Height of the plane of `p` over `(x, y)` in the coordinates relevant to `metric`.
#[inline]
fn plane_height(p: Point, x: f64, y: f64, metric: Metric) -> f64 {
    let twist = 0.5 * (p.x * y - x * p.y);
    match metric {
        Metric::Left => p.z + twist,
        Metric::Right => p.z - twist,
    }
}

#[inline]
fn rho4(p: Point, x: f64, y: f64) -> f64 {
    let r2 = (x - p.x).powi(2) + (y - p.y).powi(2);
    r2 * r2
}

/// `d(p, ∪ prims)`. Stops refining once the fourth power is known to be `≤ accept4`.
fn distance_to_union(prims: &[Primitive], p: Point, metric: Metric, accept4: f64) -> f64 {
    let objective = |x: f64, y: f64| -> f64 {
        let zs = plane_height(p, x, y, metric);
        let mut c = f64::INFINITY;
        for q in prims {
            if let Some((lo, hi)) = q.column(x, y) {
                let d = if zs < lo {
                    lo - zs
                } else if zs > hi {
                    zs - hi
                } else {
                    0.0
                };
                c = c.min(d);
            }
        }
        if c.is_finite() {
            rho4(p, x, y) + 16.0 * c * c
        } else {
            f64::INFINITY
        }
    };
    let start = objective(p.x, p.y);
    if start == 0.0 {
        return 0.0;
    }
    let mut bound = start;
    for q in prims {
        let (ax, ay) = q.anchor();
        bound = bound.min(objective(ax, ay));
    }
    minimize_planar(p.x, p.y, bound, accept4, objective).powf(0.25)
}

/// `d(p, ℍ ∖ ∪ prims)` for `p` in the union.
fn distance_to_complement(prims: &[Primitive], p: Point, metric: Metric) -> f64 {
    let objective = |x: f64, y: f64| -> f64 {
        let zs = plane_height(p, x, y, metric);
        let mut iv: [(f64, f64); 16] = [(0.0, 0.0); 16];
        let mut spill = Vec::new();
        let mut n = 0;
        for q in prims {
            if let Some(c) = q.column(x, y) {
                if n < 16 {
                    iv[n] = c;
                    n += 1;
                } else {
                    spill.push(c);
                }
            }
        }
        let all: &mut [(f64, f64)] = if spill.is_empty() {
            &mut iv[..n]
        } else {
            spill.extend_from_slice(&iv[..n]);
            &mut spill
        };
        let gap = gap_distance(all, zs);
        rho4(p, x, y) + 16.0 * gap * gap
    };
    let start = objective(p.x, p.y);
    if start == 0.0 {
        return 0.0;
    }
    minimize_planar(p.x, p.y, start, 0.0, objective).powf(0.25)
}

/// Distance from `z` to the complement of a union of closed intervals.
fn gap_distance(iv: &mut [(f64, f64)], z: f64) -> f64 {
    if !iv.iter().any(|&(lo, hi)| lo <= z && z <= hi) {
        return 0.0;
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    for &(a, b) in iv.iter() {
        if lo.is_nan() || a > hi {
            if !lo.is_nan() && lo <= z && z <= hi {
                break;
            }
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    (z - lo).min(hi - z).max(0.0)
}

/// Minimizes `f` over the plane given `f(cx, cy) ≤ bound` attained somewhere and
/// `f(x, y) ≥ |(x, y) − (cx, cy)|⁴`. Polar grid over the admissible disk followed by
/// compass refinement of the best candidates. Returns the minimum found.
fn minimize_planar(cx: f64, cy: f64, bound: f64, accept: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    const RINGS: usize = 16;
    const SPOKES: usize = 36;
    let mut best = f(cx, cy).min(bound);
    if best <= accept {
        return best;
    }
    let radius = bound.powf(0.25);
    if !radius.is_finite() || radius == 0.0 {
        return best;
    }
    let mut cands: Vec<(f64, f64, f64)> = vec![(f(cx, cy), cx, cy)];
    for k in 1..=RINGS {
        let r = radius * k as f64 / RINGS as f64;
        let phase = if k % 2 == 0 { 0.5 } else { 0.0 };
        for j in 0..SPOKES {
            let th = std::f64::consts::TAU * (j as f64 + phase) / SPOKES as f64;
            let (x, y) = (cx + r * th.cos(), cy + r * th.sin());
            let v = f(x, y);
            if v.is_finite() {
                cands.push((v, x, y));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands.truncate(3);
    let step0 = radius / RINGS as f64;
    for &(v0, x0, y0) in &cands {
        let (mut v, mut x, mut y) = (v0, x0, y0);
        let mut step = step0;
        let mut rounds = 0;
        while step > 1e-6 * radius.max(1e-6) && rounds < 80 {
            rounds += 1;
            // best move among sixteen directions at two radii
            let mut next = (v, x, y);
            for k in 0..16 {
                let th = std::f64::consts::PI * k as f64 / 8.0;
                for s in [step, 0.5 * step] {
                    let (xn, yn) = (x + s * th.cos(), y + s * th.sin());
                    let vn = f(xn, yn);
                    if vn < next.0 {
                        next = (vn, xn, yn);
                    }
                }
            }
            if next.0 < v {
                (v, x, y) = next;
            } else {
                step *= 0.25;
            }
        }
        best = best.min(v);
        if best <= accept {
            break;
        }
    }
    best
}
