//! Direct convexification by horizontal-line scans, its fixed-point iteration,
//! and sampling falsifiers for h-quasiconvexity of fields and h-convexity of sets.
//!
//! Every admissible pair `(p, q)` with `w` on the segment `[p, q]` lies on one
//! horizontal line through `w`, with `p` and `q` on opposite sides of `w`. A scan
//! over a half-turn of angles therefore covers all pairs.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{linf_diff, GridField};
use crate::group::{half_turn_angles, horiz_line_velocity, in_horiz_plane, Point};
use crate::region::RegionSpec;
use crate::report::{SchemeReport, StepRecord};

/// Sampling controls for ray scans.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    /// Angles in `[0, π)`.
    pub n_theta: usize,
    /// Samples per ray half, used by the checkers.
    pub n_s: usize,
    pub tol_violation: f64,
    pub tol_plane: f64,
    /// Multiple of the local interpolation error estimate added to `tol_violation`
    /// by the field checker.
    pub interp_slack: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { n_theta: 32, n_s: 32, tol_violation: 1e-6, tol_plane: 1e-9, interp_slack: 2.0 }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 4 {
            return Err(Error::InvalidInput(format!("n_theta must be at least 4, got {}", self.n_theta)));
        }
        if self.n_s < 2 {
            return Err(Error::InvalidInput(format!("n_s must be at least 2, got {}", self.n_s)));
        }
        if !(self.tol_violation >= 0.0 && self.tol_plane >= 0.0 && self.interp_slack >= 0.0) {
            return Err(Error::InvalidInput("scan tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A sampled triple violating `u(w) ≤ max(u(p), u(q))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationWitness {
    pub p: Point,
    pub q: Point,
    pub w: Point,
    pub u_p: f64,
    pub u_q: f64,
    pub u_w: f64,
    pub margin: f64,
}

pub fn write_witness_csv(witnesses: &[ViolationWitness], w: &mut impl Write) -> Result<()> {
    writeln!(w, "px,py,pz,qx,qy,qz,wx,wy,wz,up,uq,uw,margin")?;
    for v in witnesses {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            v.p.x, v.p.y, v.p.z, v.q.x, v.q.y, v.q.z, v.w.x, v.w.y, v.w.z, v.u_p, v.u_q, v.u_w, v.margin
        )?;
    }
    Ok(())
}

#[inline]
fn along(w: Point, d: [f64; 3], s: f64) -> Point {
    Point::new(w.x + s * d[0], w.y + s * d[1], w.z + s * d[2])
}

/// Range-minimum tables over the cell slabs of each axis. A slab is the set of
/// cells between two consecutive node layers; its minimum bounds every
/// interpolated value inside it from below.
struct SlabBounds {
    lo: [f64; 3],
    inv: [f64; 3],
    cells: [usize; 3],
    tables: [Vec<Vec<f64>>; 3],
}

impl SlabBounds {
    fn new(field: &GridField) -> Self {
        let dims = field.dims();
        let mut layer = [vec![f64::INFINITY; dims[0]], vec![f64::INFINITY; dims[1]], vec![f64::INFINITY; dims[2]]];
        for (idx, &v) in field.values().iter().enumerate() {
            let ijk = field.ijk(idx);
            for a in 0..3 {
                if v < layer[a][ijk[a]] {
                    layer[a][ijk[a]] = v;
                }
            }
        }
        let tables = layer.map(|l| {
            let base: Vec<f64> = l.windows(2).map(|w| w[0].min(w[1])).collect();
            let mut t = vec![base];
            let mut span = 1;
            while 2 * span <= t[0].len() {
                let prev = t.last().expect("nonempty");
                let next: Vec<f64> = (0..prev.len() - span).map(|i| prev[i].min(prev[i + span])).collect();
                t.push(next);
                span *= 2;
            }
            t
        });
        let sp = field.spacing();
        SlabBounds {
            lo: field.domain().lo.to_array(),
            inv: [1.0 / sp[0], 1.0 / sp[1], 1.0 / sp[2]],
            cells: [dims[0] - 1, dims[1] - 1, dims[2] - 1],
            tables,
        }
    }

    #[inline]
    fn range_min(&self, a: usize, c0: f64, c1: f64) -> f64 {
        let (u, v) = if c0 <= c1 { (c0, c1) } else { (c1, c0) };
        let last = (self.cells[a] - 1) as f64;
        let i = ((u - self.lo[a]) * self.inv[a]).floor().clamp(0.0, last) as usize;
        let j = ((v - self.lo[a]) * self.inv[a]).floor().clamp(0.0, last) as usize;
        let len = j - i + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let t = &self.tables[a][k];
        t[i].min(t[j + 1 - (1 << k)])
    }

    /// Lower bound of the field on the segment `[p, e]`.
    #[inline]
    fn segment_min(&self, p: Point, e: Point) -> f64 {
        self.range_min(0, p.x, e.x).max(self.range_min(1, p.y, e.y)).max(self.range_min(2, p.z, e.z))
    }
}

const BOUND_EVERY: usize = 8;

/// Minimum of the field along one ray half, sampled every `h` up to `len`
/// (exit point included), or any value `≥ cutoff` when the true minimum is
/// known to be at least `cutoff`. Stops early once a value `≤ stop_at` is seen.
#[inline]
#[allow(clippy::too_many_arguments)]
fn ray_min(
    field: &GridField,
    bounds: &SlabBounds,
    w: Point,
    d: [f64; 3],
    h: f64,
    len: f64,
    stop_at: f64,
    cutoff: f64,
) -> f64 {
    let mut best = f64::INFINITY;
    if len <= 0.0 {
        return best;
    }
    let end = along(w, d, len);
    let n = (len / h).floor() as usize;
    for j in 1..=n {
        let s = j as f64 * h;
        let p = along(w, d, s);
        let v = field.interp(p);
        if v < best {
            best = v;
            if v <= stop_at {
                return best;
            }
        }
        if j % BOUND_EVERY == 0 && bounds.segment_min(p, end) >= best.min(cutoff) {
            return best;
        }
    }
    if len - n as f64 * h > 1e-12 * h {
        best = best.min(field.interp(end));
    }
    best
}

/// Minimum along a ray half and its parameter, without pruning.
fn ray_argmin(field: &GridField, w: Point, d: [f64; 3], h: f64, len: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    if len <= 0.0 {
        return best;
    }
    let n = (len / h).floor() as usize;
    for j in 1..=n {
        let s = j as f64 * h;
        let v = field.interp(along(w, d, s));
        if v < best.0 {
            best = (v, s);
        }
    }
    if len - n as f64 * h > 1e-12 * h {
        let v = field.interp(along(w, d, len));
        if v < best.0 {
            best = (v, len);
        }
    }
    best
}

fn scan_node(field: &GridField, bounds: &SlabBounds, w: Point, uw: f64, dirs: &[(f64, f64)], h: f64, floor: f64) -> f64 {
    let dom = field.domain();
    let mut best = uw;
    if uw <= floor {
        return uw;
    }
    for &(sn, cs) in dirs {
        let d = [cs, sn, 0.5 * (w.x * sn - cs * w.y)];
        let back = [-d[0], -d[1], -d[2]];
        // no sample can go below the global minimum
        let ma = ray_min(field, bounds, w, d, h, dom.ray_exit(w, d), floor, best);
        if ma >= best {
            continue;
        }
        let mb = ray_min(field, bounds, w, back, h, dom.ray_exit(w, back), ma, best);
        let m = ma.max(mb);
        if m < best {
            best = m;
            if best <= floor {
                break;
            }
        }
    }
    best
}

fn directions(n_theta: usize) -> Vec<(f64, f64)> {
    half_turn_angles(n_theta).into_iter().map(f64::sin_cos).collect()
}

/// One application of the convexification operator at every node.
///
/// Rays advance by the smaller horizontal grid spacing and stop at the box.
/// The result is nodewise `≤` the input.
pub fn t_step(field: &GridField, scan: &ScanParams) -> GridField {
    let dirs = directions(scan.n_theta.max(1));
    let h = field.horizontal_step();
    let floor = field.min_value();
    let bounds = SlabBounds::new(field);
    let values: Vec<f64> = (0..field.len())
        .into_par_iter()
        .map(|idx| scan_node(field, &bounds, field.node_point(idx), field.values()[idx], &dirs, h, floor))
        .collect();
    field.with_values(values).expect("t_step preserves finiteness")
}

/// Outcome of [`t_iterate`].
#[derive(Clone, Debug)]
pub struct Iterated {
    pub field: GridField,
    pub iterations: usize,
    pub report: SchemeReport,
}

/// Applies [`t_step`] until successive iterates differ by at most `tol_fix`.
/// Hitting `max_iter` is reported through `report.converged`.
pub fn t_iterate(field: &GridField, scan: &ScanParams, max_iter: usize, tol_fix: f64) -> Result<Iterated> {
    scan.validate()?;
    let mut current = field.clone();
    let mut report = SchemeReport::default();
    for it in 1..=max_iter {
        let start = Instant::now();
        let next = t_step(&current, scan);
        let change = linf_diff(&current, &next)?;
        let mono = next
            .values()
            .iter()
            .zip(current.values())
            .map(|(a, b)| a - b)
            .fold(0.0, f64::max);
        report.steps.push(StepRecord {
            outer: it,
            inner_iters: 1,
            inner_residual: 0.0,
            linf_change: change,
            mono_violation: mono,
            seconds: start.elapsed().as_secs_f64(),
        });
        current = next;
        if change <= tol_fix {
            report.converged = true;
            break;
        }
    }
    Ok(Iterated { iterations: report.steps.len(), field: current, report })
}

/// Best violation at node `w`, if any; ties between angles go to the smaller index.
fn field_violation_at(
    field: &GridField,
    err: &[f64],
    w: Point,
    uw: f64,
    dirs: &[(f64, f64)],
    scan: &ScanParams,
) -> Option<ViolationWitness> {
    let dom = field.domain();
    let slack = scan.interp_slack;
    let floor = scan.tol_violation + slack * field.cell_max(err, w);
    let mut found: Option<ViolationWitness> = None;
    for &(sn, cs) in dirs {
        let d = [cs, sn, 0.5 * (w.x * sn - cs * w.y)];
        let back = [-d[0], -d[1], -d[2]];
        let la = dom.ray_exit(w, d);
        let lb = dom.ray_exit(w, back);
        let sample = |dir: [f64; 3], len: f64| -> (f64, Point) {
            let mut best = (f64::INFINITY, w);
            for j in 1..=scan.n_s {
                let p = along(w, dir, len * j as f64 / scan.n_s as f64);
                let v = field.eval(p);
                if v < best.0 {
                    best = (v, p);
                }
            }
            best
        };
        if la <= 0.0 || lb <= 0.0 {
            continue;
        }
        let (ua, pa) = sample(d, la);
        if uw - ua <= floor {
            continue;
        }
        let (ub, pb) = sample(back, lb);
        let margin = uw - ua.max(ub);
        let tol = scan.tol_violation + slack * field.cell_max(err, w).max(field.cell_max(err, pa)).max(field.cell_max(err, pb));
        if margin > tol && found.is_none_or(|f| margin > f.margin) && in_horiz_plane(pa, pb, scan.tol_plane.max(1e-12 * (1.0 + pa.z.abs())))
        {
            found = Some(ViolationWitness { p: pb, q: pa, w, u_p: ub, u_q: ua, u_w: uw, margin });
        }
    }
    found
}

/// Sampling falsifier for h-quasiconvexity: one witness per violating node.
///
/// An empty result only means no violation was seen at this resolution.
pub fn check_field_hquasiconvex(field: &GridField, scan: &ScanParams) -> Result<Vec<ViolationWitness>> {
    scan.validate()?;
    let dirs = directions(scan.n_theta);
    let err = field.interp_error_estimate();
    Ok((0..field.len())
        .into_par_iter()
        .filter_map(|idx| field_violation_at(field, &err, field.node_point(idx), field.values()[idx], &dirs, scan))
        .collect())
}

/// Sampling falsifier for h-convexity of a region.
///
/// Draws `sample_count` points of `E` (seeded), scans the horizontal lines through
/// each one across the bounding box and reports a sample outside `E` lying between
/// two samples inside `E`. Witness values are indicators: 0 inside, 1 outside.
pub fn check_set_hconvex(
    region: &RegionSpec,
    scan: &ScanParams,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<ViolationWitness>> {
    scan.validate()?;
    let bbox = region.bounding_box();
    let points = sample_points_in(region, sample_count, seed)?;
    let dirs = directions(scan.n_theta);
    let n = scan.n_s as i64;
    Ok(points
        .par_iter()
        .filter_map(|&p| {
            for &(sn, cs) in &dirs {
                let d = horiz_line_velocity(p, sn.atan2(cs));
                let back = [-d[0], -d[1], -d[2]];
                let lf = bbox.ray_exit(p, d);
                let lb = bbox.ray_exit(p, back);
                let at = |j: i64| {
                    if j >= 0 {
                        along(p, d, lf * j as f64 / n as f64)
                    } else {
                        along(p, back, lb * (-j) as f64 / n as f64)
                    }
                };
                let inside: Vec<bool> = (-n..=n).map(|j| region.contains(at(j))).collect();
                let first = inside.iter().position(|&b| b);
                let last = inside.iter().rposition(|&b| b);
                if let (Some(a), Some(b)) = (first, last) {
                    if let Some(g) = (a..b).find(|&k| !inside[k]) {
                        let idx = |k: usize| k as i64 - n;
                        return Some(ViolationWitness {
                            p: at(idx(a)),
                            q: at(idx(b)),
                            w: at(idx(g)),
                            u_p: 0.0,
                            u_q: 0.0,
                            u_w: 1.0,
                            margin: 1.0,
                        });
                    }
                }
            }
            None
        })
        .collect())
}

/// Uniform samples of a region by rejection in its bounding box.
pub fn sample_points_in(region: &RegionSpec, count: usize, seed: u64) -> Result<Vec<Point>> {
    let bbox = region.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_tries = 2000 * count.max(1);
    let mut tries = 0;
    while out.len() < count {
        if tries >= max_tries {
            return Err(Error::Empty("rejection sampling found too few points in the region".into()));
        }
        tries += 1;
        let p = Point::new(
            rng.gen_range(bbox.lo.x..=bbox.hi.x),
            rng.gen_range(bbox.lo.y..=bbox.hi.y),
            rng.gen_range(bbox.lo.z..=bbox.hi.z),
        );
        if region.contains(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Node-wise `g ∘ u` for nondecreasing `g`; sublevel sets of the result are sublevel
/// sets of `u`, so h-quasiconvexity is preserved.
pub fn monotone_compose(field: &GridField, g: impl Fn(f64) -> f64) -> Result<GridField> {
    field.map(g)
}

/// Per-angle detail of the ray scan at one node, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayChoice {
    pub theta_index: usize,
    pub s_minus: f64,
    pub s_plus: f64,
    pub value: f64,
}

/// Full (unpruned) scan at a node over the given angles; returns the angle and ray
/// positions realizing the minimum of `max(m⁻, m⁺)`, smallest index on ties.
pub fn ray_choice(field: &GridField, w: Point, angles: &[f64]) -> Option<RayChoice> {
    let dom = field.domain();
    let h = field.horizontal_step();
    let mut best: Option<RayChoice> = None;
    for (k, &theta) in angles.iter().enumerate() {
        let d = horiz_line_velocity(w, theta);
        let back = [-d[0], -d[1], -d[2]];
        let (mp, sp) = ray_argmin(field, w, d, h, dom.ray_exit(w, d));
        let (mm, sm) = ray_argmin(field, w, back, h, dom.ray_exit(w, back));
        if !(mp.is_finite() && mm.is_finite()) {
            continue;
        }
        let value = mp.max(mm);
        if best.is_none_or(|b| value < b.value) {
            best = Some(RayChoice { theta_index: k, s_minus: -sm, s_plus: sp, value });
        }
    }
    best
}
