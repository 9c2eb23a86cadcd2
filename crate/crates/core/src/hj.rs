//! The nonlocal Hamilton–Jacobi route to the h-quasiconvex envelope.
//!
//! The Hamiltonian at `p` is the supremum of `⟨∇_H u(p), (p⁻¹ξ)_h⟩` over points `ξ`
//! of the horizontal plane of `p` where `u` is lower than at `p`. On a horizontal
//! line through `p` with direction `e_θ`, the candidate at distance `ρ` contributes
//! `ρ · ∂_θ u(p)`, so only the farthest lower sample on each ray matters.
//!
//! The solver discretizes `∂_θ u(p)` by the backward difference
//! `(u(p) − u(p − h e_θ)) / h`. With that choice the discrete equation
//! `v + max(0, max_θ R_θ(v) (v − b_θ) / h) = g(p)` is nondecreasing in `v` and
//! nonincreasing in every other value, and each nodal update solves it exactly.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{BoxDomain, GridField};
use crate::group::{full_turn_angles, gauge, horiz_point, HorizontalVec, Point};
use crate::report::{SchemeReport, StepRecord};

/// Sampling of the horizontal plane used by the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianParams {
    /// Angles over the full turn.
    pub n_theta: usize,
    /// Radial samples per ray, equally spaced up to the exit from the box.
    pub n_rho: usize,
    /// Absolute tolerance on the comparisons defining the sublevel set.
    pub eps_strict: f64,
    /// Use `u(ξ) ≤ level` instead of `u(ξ) < level`.
    pub use_nonstrict: bool,
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        HamiltonianParams { n_theta: 32, n_rho: 24, eps_strict: 1e-9, use_nonstrict: false }
    }
}

impl HamiltonianParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_rho < 2 || self.eps_strict.is_nan() || self.eps_strict < 0.0 {
            return Err(Error::InvalidInput(format!(
                "need n_theta ≥ 8, n_rho ≥ 2, eps_strict ≥ 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Order in which nodes are updated within an inner sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// In place, cycling through the eight lexicographic orientations.
    GaussSeidel,
    /// Double-buffered and parallel over nodes.
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveParams {
    pub omega_relax: f64,
    pub tol_inner: f64,
    pub max_inner: usize,
    pub tol_outer: f64,
    pub max_outer: usize,
    pub k: f64,
    pub schedule: Schedule,
}

impl SolveParams {
    pub fn new(k: f64) -> Self {
        SolveParams {
            omega_relax: 1.0,
            tol_inner: 1e-6,
            max_inner: 500,
            tol_outer: 1e-4,
            max_outer: 60,
            k,
            schedule: Schedule::GaussSeidel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_relax > 0.0 && self.omega_relax <= 1.0) {
            return Err(Error::InvalidInput(format!("omega_relax must lie in (0, 1], got {}", self.omega_relax)));
        }
        if !(self.tol_inner > 0.0 && self.tol_outer > 0.0) || self.max_inner == 0 || self.max_outer == 0 {
            return Err(Error::InvalidInput("tolerances and iteration caps must be positive".into()));
        }
        if !self.k.is_finite() {
            return Err(Error::InvalidInput("K must be finite".into()));
        }
        Ok(())
    }
}

/// Outcome of one inner solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerReport {
    pub sweeps: usize,
    /// Largest nodal change in the last sweep.
    pub residual: f64,
    /// Set when `max_inner` stopped the sweeps.
    pub capped: bool,
}

#[inline]
fn direction(p: Point, sn: f64, cs: f64) -> [f64; 3] {
    [cs, sn, 0.5 * (p.x * sn - cs * p.y)]
}

#[inline]
fn along(p: Point, d: [f64; 3], s: f64) -> Point {
    Point::new(p.x + s * d[0], p.y + s * d[1], p.z + s * d[2])
}

/// Sampled points of the horizontal plane of `p` below (or at) `level`, with
/// their horizontal coordinates relative to `p`.
pub fn sublevel_dirs(field: &GridField, p: Point, level: f64, params: &HamiltonianParams) -> Vec<(Point, HorizontalVec)> {
    let dom = field.domain();
    let mut out = Vec::new();
    if !dom.contains(p) {
        return out;
    }
    for theta in full_turn_angles(params.n_theta) {
        let (sn, cs) = theta.sin_cos();
        let len = dom.ray_exit(p, direction(p, sn, cs));
        for j in 1..=params.n_rho {
            let rho = len * j as f64 / params.n_rho as f64;
            let h = HorizontalVec::new(rho * cs, rho * sn);
            let xi = horiz_point(p, h);
            let v = field.eval(xi);
            let keep = if params.use_nonstrict { v <= level + params.eps_strict } else { v < level - params.eps_strict };
            if keep {
                out.push((xi, h));
            }
        }
    }
    out
}

/// Hamiltonian at `p` with the central-difference horizontal gradient.
pub fn hamiltonian_at(field: &GridField, p: Point, params: &HamiltonianParams) -> f64 {
    let g = field.horiz_grad(p);
    if g.x1 == 0.0 && g.x2 == 0.0 {
        return 0.0;
    }
    sublevel_dirs(field, p, field.eval(p), params)
        .iter()
        .map(|(_, h)| g.x1 * h.a + g.x2 * h.b)
        .fold(0.0, f64::max)
}

/// Per-node ray data shared by the solver and the diagnostics.
struct Rays {
    dirs: Vec<(f64, f64)>,
    n_rho: usize,
    eps: f64,
    nonstrict: bool,
}

impl Rays {
    fn new(params: &HamiltonianParams) -> Self {
        Rays {
            dirs: full_turn_angles(params.n_theta).into_iter().map(f64::sin_cos).collect(),
            n_rho: params.n_rho,
            eps: params.eps_strict,
            nonstrict: params.use_nonstrict,
        }
    }

    /// Threshold offset: a sample `a` belongs to the set at level `v` iff `v > a + off`
    /// (strict) or `v ≥ a + off` (non-strict).
    #[inline]
    fn offset(&self) -> f64 {
        if self.nonstrict {
            -self.eps
        } else {
            self.eps
        }
    }

    /// Largest `v ≤ g` solving the discrete equation at `p`, given the field `u`.
    ///
    /// The ray term at level `v` exceeds `g − v` exactly when some sample `a_j` at
    /// radius `ρ_j` is admissible (`v > a_j + ε`) and `v > c_j`, where
    /// `c_j = (g + ρ_j b / h) / (1 + ρ_j / h)`. Hence the solution is
    /// `min(g, min_{θ,j} max(a_j + ε, c_j))`. Since `c_j` decreases in `ρ_j`, rays are
    /// read from the far end and abandoned once `c_j` reaches the current value.
    fn local_solve(&self, u: &GridField, p: Point, g: f64, h: f64) -> f64 {
        let dom = u.domain();
        let off = self.offset();
        let mut best = g;
        for &(sn, cs) in &self.dirs {
            let d = direction(p, sn, cs);
            let b = u.eval(along(p, d, -h));
            if b >= best {
                continue;
            }
            let len = dom.ray_exit(p, d);
            if len <= 0.0 {
                continue;
            }
            let c = |rho: f64| (g + rho * b / h) / (1.0 + rho / h);
            for j in (1..=self.n_rho).rev() {
                let rho = len * j as f64 / self.n_rho as f64;
                let cj = c(rho);
                if cj >= best {
                    break;
                }
                let a = u.interp(along(p, d, rho)) + off;
                let cand = a.max(cj);
                if cand < best {
                    best = cand;
                }
            }
        }
        best
    }

    /// Upwind Hamiltonian at level `v = u(p)`.
    fn upwind_h(&self, u: &GridField, p: Point, h: f64) -> f64 {
        let dom = u.domain();
        let v = u.eval(p);
        let off = self.offset();
        let mut hmax: f64 = 0.0;
        for &(sn, cs) in &self.dirs {
            let d = direction(p, sn, cs);
            let b = u.eval(along(p, d, -h));
            if b >= v {
                continue;
            }
            let len = dom.ray_exit(p, d);
            let mut reach: f64 = 0.0;
            for j in 1..=self.n_rho {
                let rho = len * j as f64 / self.n_rho as f64;
                let a = u.interp(along(p, d, rho));
                let inside = if self.nonstrict { v >= a + off } else { v > a + off };
                if inside {
                    reach = rho;
                }
            }
            hmax = hmax.max(reach * (v - b) / h);
        }
        hmax
    }
}

fn check_boundary_data(g: &GridField, k: f64) -> Result<()> {
    let tol = 1e-12 * k.abs().max(1.0);
    if (g.exterior() - k).abs() > tol {
        return Err(Error::BoundaryData(format!("exterior value {} differs from K = {k}", g.exterior())));
    }
    for (idx, &v) in g.values().iter().enumerate() {
        if v > k + tol {
            let p = g.node_point(idx);
            return Err(Error::BoundaryData(format!("value {v} exceeds K = {k} at {p}")));
        }
        if g.is_boundary_node(idx) && v < k - tol {
            let p = g.node_point(idx);
            return Err(Error::BoundaryData(format!("boundary value {v} differs from K = {k} at {p}")));
        }
    }
    Ok(())
}

/// Visits every node once in the lexicographic orientation selected by the bits of `sweep`.
fn sweep_order(dims: [usize; 3], sweep: usize, mut visit: impl FnMut(usize, usize, usize)) {
    let flip = |n: usize, rev: bool, t: usize| if rev { n - 1 - t } else { t };
    let (rx, ry, rz) = (sweep & 1 != 0, sweep & 2 != 0, sweep & 4 != 0);
    for tk in 0..dims[2] {
        let k = flip(dims[2], rz, tk);
        for tj in 0..dims[1] {
            let j = flip(dims[1], ry, tj);
            for ti in 0..dims[0] {
                visit(flip(dims[0], rx, ti), j, k);
            }
        }
    }
}

/// Solves `u + Ĥ[u] = g` with `u = K` on the boundary layer.
///
/// Starts from `u = g`; every nodal update lowers the value, so the iterates are
/// nonincreasing and stay `≤ g`.
pub fn solve_step(g: &GridField, params: &HamiltonianParams, sp: &SolveParams) -> Result<(GridField, InnerReport)> {
    params.validate()?;
    sp.validate()?;
    check_boundary_data(g, sp.k)?;
    let rays = Rays::new(params);
    let h = g.horizontal_step();
    let omega = sp.omega_relax;
    let gv = g.values().to_vec();
    let mut u = g.clone();
    let mut report = InnerReport { sweeps: 0, residual: f64::INFINITY, capped: false };
    let update = |old: f64, v: f64, gp: f64| -> f64 { ((1.0 - omega) * old + omega * v.min(gp)).min(sp.k).min(old) };
    for sweep in 0..sp.max_inner {
        let mut change: f64 = 0.0;
        match sp.schedule {
            Schedule::GaussSeidel => {
                let dims = u.dims();
                sweep_order(dims, sweep % 8, |i, j, k| {
                    let idx = u.index(i, j, k);
                    if u.is_boundary_node(idx) {
                        return;
                    }
                    let p = u.node_point(idx);
                    let old = u.values()[idx];
                    let v = rays.local_solve(&u, p, gv[idx], h);
                    let new = update(old, v, gv[idx]);
                    change = change.max(old - new);
                    u.values_mut()[idx] = new;
                });
            }
            Schedule::Jacobi => {
                let cur = &u;
                let next: Vec<f64> = (0..cur.len())
                    .into_par_iter()
                    .map(|idx| {
                        let old = cur.values()[idx];
                        if cur.is_boundary_node(idx) {
                            return old;
                        }
                        let v = rays.local_solve(cur, cur.node_point(idx), gv[idx], h);
                        update(old, v, gv[idx])
                    })
                    .collect();
                change = next.iter().zip(cur.values()).map(|(a, b)| b - a).fold(0.0, f64::max);
                u = u.with_values(next)?;
            }
        }
        report.sweeps = sweep + 1;
        report.residual = change;
        if change <= sp.tol_inner {
            return Ok((u, report));
        }
    }
    report.capped = true;
    Ok((u, report))
}

/// Outer iteration `u_n + Ĥ[u_n] = u_{n−1}` from `u_0 = f`.
pub fn pde_envelope(f: &GridField, params: &HamiltonianParams, sp: &SolveParams) -> Result<(GridField, SchemeReport)> {
    let mut current = f.clone();
    let mut report = SchemeReport::default();
    for outer in 1..=sp.max_outer {
        let start = Instant::now();
        let (next, inner) = solve_step(&current, params, sp)?;
        let mut mono: f64 = 0.0;
        let mut change: f64 = 0.0;
        for (a, b) in next.values().iter().zip(current.values()) {
            mono = mono.max(a - b);
            change = change.max((a - b).abs());
        }
        report.steps.push(StepRecord {
            outer,
            inner_iters: inner.sweeps,
            inner_residual: inner.residual,
            linf_change: change,
            mono_violation: mono,
            seconds: start.elapsed().as_secs_f64(),
        });
        if inner.capped {
            report.inner_capped += 1;
        }
        if mono > 1e-9 {
            return Err(Error::Monotonicity { outer, violation: mono });
        }
        current = next;
        if change <= sp.tol_outer {
            report.converged = report.inner_capped == 0;
            return Ok((current, report));
        }
    }
    report.converged = false;
    Ok((current, report))
}

/// Largest nodal amount by which `g − u − Ĥ[u]` is positive, with `Ĥ` built on
/// the non-strict sublevel set.
pub fn supersolution_residual(u: &GridField, g: &GridField, params: &HamiltonianParams) -> Result<f64> {
    if !u.same_grid(g) {
        return Err(Error::GridMismatch("supersolution_residual needs fields on one grid".into()));
    }
    let rays = Rays::new(&HamiltonianParams { use_nonstrict: true, ..*params });
    let h = u.horizontal_step();
    Ok((0..u.len())
        .into_par_iter()
        .filter(|&idx| !u.is_boundary_node(idx))
        .map(|idx| {
            let hh = rays.upwind_h(u, u.node_point(idx), h);
            (g.values()[idx] - u.values()[idx] - hh).max(0.0)
        })
        .reduce(|| 0.0, f64::max))
}

/// Upwind discrete Hamiltonian of `u` at every node (zero on the boundary layer).
pub fn upwind_hamiltonian(u: &GridField, params: &HamiltonianParams) -> Vec<f64> {
    let rays = Rays::new(params);
    let h = u.horizontal_step();
    (0..u.len())
        .into_par_iter()
        .map(|idx| if u.is_boundary_node(idx) { 0.0 } else { rays.upwind_h(u, u.node_point(idx), h) })
        .collect()
}

/// Boundary-compatible capping of a raw generator:
/// `min(K, max(f_raw, K + L (|p|_G − R)))`, equal to `K` outside the gauge ball `B_R(0)`.
pub fn capped(f_raw: impl Fn(Point) -> f64, k: f64, radius: f64, slope: f64) -> impl Fn(Point) -> f64 {
    move |p| k.min(f_raw(p).max(k + slope * (gauge(p) - radius)))
}

/// Slope of the capping ramp reaching `K` from `f_min` over a collar of the given width.
pub fn capping_slope(k: f64, f_min: f64, collar: f64) -> f64 {
    (k - f_min).max(0.0) / collar
}

/// Checks that the gauge ball `B_R(0)` fits strictly inside the box.
pub fn ball_fits(domain: &BoxDomain, radius: f64) -> bool {
    let zr = radius * radius / 4.0;
    domain.lo.x < -radius && domain.hi.x > radius && domain.lo.y < -radius && domain.hi.y > radius && domain.lo.z < -zr && domain.hi.z > zr
}
