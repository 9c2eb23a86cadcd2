//! Scalar fields sampled on a uniform Cartesian grid over a box.
//!
//! Values are stored x-fastest, then y, then z. Inside the box the field is
//! evaluated by trilinear interpolation; outside it evaluates to the exterior
//! plateau value `K`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::group::Point;

/// Header tag of the binary field format.
pub const FIELD_MAGIC: &str = "HHFIELD1";

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain {
    pub lo: Point,
    pub hi: Point,
}

impl BoxDomain {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInput("box corners must be finite".into()));
        }
        if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(Error::InvalidInput(format!("box corners not ordered: lo={lo}, hi={hi}")));
        }
        Ok(BoxDomain { lo, hi })
    }

    /// The cube `[-a, a]³`.
    pub fn cube(a: f64) -> Result<Self> {
        BoxDomain::new(Point::new(-a, -a, -a), Point::new(a, a, a))
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.lo.x
            && p.x <= self.hi.x
            && p.y >= self.lo.y
            && p.y <= self.hi.y
            && p.z >= self.lo.z
            && p.z <= self.hi.z
    }

    pub fn extent(&self) -> [f64; 3] {
        [self.hi.x - self.lo.x, self.hi.y - self.lo.y, self.hi.z - self.lo.z]
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.lo.x + self.hi.x),
            0.5 * (self.lo.y + self.hi.y),
            0.5 * (self.lo.z + self.hi.z),
        )
    }

    /// Largest `t ≥ 0` with `origin + t·dir` inside the box, for `origin` inside.
    /// Returns 0 when the origin is outside.
    pub fn ray_exit(&self, origin: Point, dir: [f64; 3]) -> f64 {
        if !self.contains(origin) {
            return 0.0;
        }
        let o = origin.to_array();
        let lo = self.lo.to_array();
        let hi = self.hi.to_array();
        let mut t = f64::INFINITY;
        let scale = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for a in 0..3 {
            let d = dir[a];
            if d.abs() <= 1e-14 * scale {
                continue;
            }
            if d > 0.0 {
                t = t.min((hi[a] - o[a]) / d);
            } else if d < 0.0 {
                t = t.min((lo[a] - o[a]) / d);
            }
        }
        t.max(0.0)
    }

    /// Same box shrunk by `margin` on every side (margins given per axis).
    pub fn shrink(&self, margin: [f64; 3]) -> Result<Self> {
        BoxDomain::new(
            Point::new(self.lo.x + margin[0], self.lo.y + margin[1], self.lo.z + margin[2]),
            Point::new(self.hi.x - margin[0], self.hi.y - margin[1], self.hi.z - margin[2]),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A planar slice of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceSpec {
    pub axis: Axis,
    pub value: f64,
}

/// Horizontal gradient `(X₁u, X₂u)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizGrad {
    pub x1: f64,
    pub x2: f64,
    /// Set when at least one axis fell back to a one-sided difference.
    pub one_sided: bool,
}

/// Scalar field on a uniform grid with a constant exterior extension.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    domain: BoxDomain,
    dims: [usize; 3],
    spacing: [f64; 3],
    inv_spacing: [f64; 3],
    values: Vec<f64>,
    exterior: f64,
}

impl GridField {
    /// Field with all node values equal to `value`.
    pub fn constant(domain: BoxDomain, dims: [usize; 3], value: f64, exterior: f64) -> Result<Self> {
        Self::check_dims(dims)?;
        let n = dims[0] * dims[1] * dims[2];
        Self::from_values(domain, dims, vec![value; n], exterior)
    }

    pub fn from_values(domain: BoxDomain, dims: [usize; 3], values: Vec<f64>, exterior: f64) -> Result<Self> {
        Self::check_dims(dims)?;
        if values.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::GridMismatch(format!(
                "{} values for dims {:?}",
                values.len(),
                dims
            )));
        }
        if !exterior.is_finite() {
            return Err(Error::InvalidInput("exterior value must be finite".into()));
        }
        let ext = domain.extent();
        let spacing = [
            ext[0] / (dims[0] - 1) as f64,
            ext[1] / (dims[1] - 1) as f64,
            ext[2] / (dims[2] - 1) as f64,
        ];
        let field = GridField {
            domain,
            dims,
            spacing,
            inv_spacing: [1.0 / spacing[0], 1.0 / spacing[1], 1.0 / spacing[2]],
            values,
            exterior,
        };
        if let Some(i) = field.values.iter().position(|v| !v.is_finite()) {
            let p = field.node_point(i);
            return Err(Error::NonFinite { x: p.x, y: p.y, z: p.z, value: field.values[i] });
        }
        Ok(field)
    }

    fn check_dims(dims: [usize; 3]) -> Result<()> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidInput(format!("grid needs at least 2 nodes per axis, got {dims:?}")));
        }
        Ok(())
    }

    /// Same grid and exterior value, new node values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::from_values(self.domain, self.dims, values, self.exterior)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Smallest horizontal grid spacing.
    pub fn horizontal_step(&self) -> f64 {
        self.spacing[0].min(self.spacing[1])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn exterior(&self) -> f64 {
        self.exterior
    }

    pub fn set_exterior(&mut self, k: f64) {
        self.exterior = k;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.dims == other.dims && self.domain == other.domain
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn node_point_ijk(&self, i: usize, j: usize, k: usize) -> Point {
        Point::new(
            self.domain.lo.x + i as f64 * self.spacing[0],
            self.domain.lo.y + j as f64 * self.spacing[1],
            self.domain.lo.z + k as f64 * self.spacing[2],
        )
    }

    #[inline]
    pub fn node_point(&self, idx: usize) -> Point {
        let [i, j, k] = self.ijk(idx);
        self.node_point_ijk(i, j, k)
    }

    /// Whether the node sits on a face of the box.
    #[inline]
    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let [i, j, k] = self.ijk(idx);
        i == 0 || j == 0 || k == 0 || i + 1 == self.dims[0] || j + 1 == self.dims[1] || k + 1 == self.dims[2]
    }

    /// Node nearest to `p` (clamped into the grid).
    pub fn nearest_node(&self, p: Point) -> usize {
        let c = p.to_array();
        let lo = self.domain.lo.to_array();
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let f = ((c[a] - lo[a]) * self.inv_spacing[a]).round();
            ijk[a] = f.clamp(0.0, (self.dims[a] - 1) as f64) as usize;
        }
        self.index(ijk[0], ijk[1], ijk[2])
    }

    /// Trilinear interpolation inside the box, the exterior value outside.
    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        if !self.domain.contains(p) {
            return self.exterior;
        }
        self.interp(p)
    }

    /// Trilinear interpolation; `p` must lie inside the box.
    #[inline]
    pub(crate) fn interp(&self, p: Point) -> f64 {
        let (base, t) = self.cell(p);
        let [nx, ny, _] = self.dims;
        let v = &self.values;
        let sxy = nx * ny;
        let c000 = v[base];
        let c100 = v[base + 1];
        let c010 = v[base + nx];
        let c110 = v[base + nx + 1];
        let c001 = v[base + sxy];
        let c101 = v[base + sxy + 1];
        let c011 = v[base + sxy + nx];
        let c111 = v[base + sxy + nx + 1];
        let [tx, ty, tz] = t;
        // convex combinations keep the result monotone in every node value under rounding
        let (sx, sy, sz) = (1.0 - tx, 1.0 - ty, 1.0 - tz);
        let c00 = sx * c000 + tx * c100;
        let c10 = sx * c010 + tx * c110;
        let c01 = sx * c001 + tx * c101;
        let c11 = sx * c011 + tx * c111;
        let c0 = sy * c00 + ty * c10;
        let c1 = sy * c01 + ty * c11;
        sz * c0 + tz * c1
    }

    /// Base node index of the cell containing `p` and the local coordinates in it.
    #[inline]
    pub(crate) fn cell(&self, p: Point) -> (usize, [f64; 3]) {
        let lo = self.domain.lo;
        let fx = (p.x - lo.x) * self.inv_spacing[0];
        let fy = (p.y - lo.y) * self.inv_spacing[1];
        let fz = (p.z - lo.z) * self.inv_spacing[2];
        let i = (fx.max(0.0) as usize).min(self.dims[0] - 2);
        let j = (fy.max(0.0) as usize).min(self.dims[1] - 2);
        let k = (fz.max(0.0) as usize).min(self.dims[2] - 2);
        let t = [
            (fx - i as f64).clamp(0.0, 1.0),
            (fy - j as f64).clamp(0.0, 1.0),
            (fz - k as f64).clamp(0.0, 1.0),
        ];
        (self.index(i, j, k), t)
    }

    /// Maximum of a per-node quantity over the corners of the cell containing `p`.
    pub fn cell_max(&self, per_node: &[f64], p: Point) -> f64 {
        if !self.domain.contains(p) {
            return 0.0;
        }
        let (base, _) = self.cell(p);
        let [nx, ny, _] = self.dims;
        let sxy = nx * ny;
        [0, 1, nx, nx + 1, sxy, sxy + 1, sxy + nx, sxy + nx + 1]
            .iter()
            .map(|&o| per_node[base + o])
            .fold(0.0, f64::max)
    }

    /// Per-node estimate of the trilinear interpolation error, `Σ_axes |Δ²u| / 8`
    /// from centered second differences (one-sided at the faces).
    pub fn interp_error_estimate(&self) -> Vec<f64> {
        let [nx, ny, nz] = self.dims;
        let strides = [1, nx, nx * ny];
        let mut est = vec![0.0; self.values.len()];
        for (idx, e) in est.iter_mut().enumerate() {
            let ijk = self.ijk(idx);
            let mut acc = 0.0;
            for a in 0..3 {
                let n = [nx, ny, nz][a];
                if n < 3 {
                    continue;
                }
                let c = ijk[a].clamp(1, n - 2);
                let center = idx + c * strides[a] - ijk[a] * strides[a];
                let d2 = self.values[center + strides[a]] - 2.0 * self.values[center]
                    + self.values[center - strides[a]];
                acc += d2.abs();
            }
            *e = acc / 8.0;
        }
        est
    }

    /// Horizontal gradient from central differences of `∂x, ∂y, ∂z`, combined as
    /// `X₁u = u_x − (y/2) u_z`, `X₂u = u_y + (x/2) u_z`.
    pub fn horiz_grad(&self, p: Point) -> HorizGrad {
        let mut d = [0.0; 3];
        let mut one_sided = false;
        let lo = self.domain.lo.to_array();
        let hi = self.domain.hi.to_array();
        let c = p.to_array();
        for a in 0..3 {
            let h = self.spacing[a];
            let mut plus = c;
            let mut minus = c;
            plus[a] += h;
            minus[a] -= h;
            let can_plus = plus[a] <= hi[a];
            let can_minus = minus[a] >= lo[a];
            d[a] = match (can_minus, can_plus) {
                (true, true) => (self.eval(Point::from_array(plus)) - self.eval(Point::from_array(minus))) / (2.0 * h),
                (false, true) => {
                    one_sided = true;
                    (self.eval(Point::from_array(plus)) - self.eval(p)) / h
                }
                (true, false) => {
                    one_sided = true;
                    (self.eval(p) - self.eval(Point::from_array(minus))) / h
                }
                (false, false) => {
                    one_sided = true;
                    0.0
                }
            };
        }
        HorizGrad {
            x1: d[0] - 0.5 * p.y * d[2],
            x2: d[1] + 0.5 * p.x * d[2],
            one_sided,
        }
    }

    /// Nodes with value `< lambda` (strict) or `≤ lambda`, in index order.
    pub fn sublevel_extract(&self, lambda: f64, strict: bool) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| if strict { v < lambda } else { v <= lambda })
            .map(|(i, _)| i)
            .collect()
    }

    /// Node-wise composition with `g`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| g(v)).collect())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the binary field format.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let [nx, ny, nz] = self.dims;
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        writeln!(
            w,
            "{FIELD_MAGIC} {nx} {ny} {nz} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
            lo.x, lo.y, lo.z, hi.x, hi.y, hi.z, self.exterior
        )?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r).map_err(|e| match e {
            Error::MalformedFile { reason, .. } => Error::MalformedFile { path: path.to_path_buf(), reason },
            other => other,
        })
    }

    pub fn read_from(r: &mut impl BufRead) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedFile { path: Default::default(), reason };
        let mut header = Vec::new();
        r.read_until(b'\n', &mut header)?;
        if header.last() != Some(&b'\n') {
            return Err(malformed("missing header line".into()));
        }
        let header = std::str::from_utf8(&header[..header.len() - 1]).map_err(|_| malformed("header is not UTF-8".into()))?;
        let toks: Vec<&str> = header.split(' ').collect();
        if toks.len() != 11 || toks[0] != FIELD_MAGIC {
            return Err(malformed(format!("bad header `{header}`")));
        }
        let mut dims = [0usize; 3];
        for a in 0..3 {
            dims[a] = toks[1 + a].parse().map_err(|_| malformed(format!("bad dimension `{}`", toks[1 + a])))?;
        }
        let mut nums = [0f64; 7];
        for (a, n) in nums.iter_mut().enumerate() {
            *n = toks[4 + a].parse().map_err(|_| malformed(format!("bad number `{}`", toks[4 + a])))?;
        }
        let domain = BoxDomain::new(Point::new(nums[0], nums[1], nums[2]), Point::new(nums[3], nums[4], nums[5]))
            .map_err(|e| malformed(e.to_string()))?;
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| malformed("dimension overflow".into()))?;
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes).map_err(|_| malformed(format!("expected {n} values")))?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(malformed("trailing bytes after values".into()));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        GridField::from_values(domain, dims, values, nums[6]).map_err(|e| malformed(e.to_string()))
    }

    /// CSV `x,y,z,value` with one row per in-plane node position of the slice.
    pub fn write_slice_csv(&self, slice: SliceSpec, w: &mut impl Write) -> Result<usize> {
        let (lo, hi) = (self.domain.lo.to_array(), self.domain.hi.to_array());
        let axis = match slice.axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        if !(slice.value >= lo[axis] && slice.value <= hi[axis]) {
            return Err(Error::InvalidInput(format!(
                "slice coordinate {} outside [{}, {}]",
                slice.value, lo[axis], hi[axis]
            )));
        }
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        writeln!(w, "x,y,z,value")?;
        let mut rows = 0;
        for jb in 0..self.dims[b] {
            for ia in 0..self.dims[a] {
                let mut c = [0.0; 3];
                c[axis] = slice.value;
                c[a] = lo[a] + ia as f64 * self.spacing[a];
                c[b] = lo[b] + jb as f64 * self.spacing[b];
                let p = Point::from_array(c);
                writeln!(w, "{},{},{},{}", p.x, p.y, p.z, self.eval(p))?;
                rows += 1;
            }
        }
        Ok(rows)
    }
}

/// Builds a field from a generator; with `coercive` set, node values are clipped to `≤ k`.
pub fn build_field(
    domain: BoxDomain,
    dims: [usize; 3],
    generator: impl Fn(Point) -> f64,
    k: f64,
    coercive: bool,
) -> Result<GridField> {
    let proto = GridField::constant(domain, dims, 0.0, k)?;
    let mut values = Vec::with_capacity(proto.len());
    for idx in 0..proto.len() {
        let p = proto.node_point(idx);
        let v = generator(p);
        if !v.is_finite() {
            return Err(Error::NonFinite { x: p.x, y: p.y, z: p.z, value: v });
        }
        values.push(if coercive { v.min(k) } else { v });
    }
    proto.with_values(values)
}

/// Exact maximum absolute node difference.
pub fn linf_diff(a: &GridField, b: &GridField) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!("dims {:?} vs {:?}", a.dims, b.dims)));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Maximum absolute difference restricted to nodes inside `region`.
pub fn linf_diff_in(a: &GridField, b: &GridField, region: &BoxDomain) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!("dims {:?} vs {:?}", a.dims, b.dims)));
    }
    Ok((0..a.len())
        .filter(|&i| region.contains(a.node_point(i)))
        .map(|i| (a.values[i] - b.values[i]).abs())
        .fold(0.0, f64::max))
}
