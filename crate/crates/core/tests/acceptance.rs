//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero only if a computation errors out.

use std::time::Instant;

use hquasi::direct::{check_field_hquasiconvex, check_set_hconvex, t_iterate, t_step, ScanParams};
use hquasi::field::{build_field, linf_diff, linf_diff_in, BoxDomain, GridField};
use hquasi::group::{dist_left, dist_right, gauge, mul, Metric, Point};
use hquasi::hj::{capped, capping_slope, pde_envelope, HamiltonianParams, SolveParams};
use hquasi::hull::{hausdorff, hull_compute, inclusion_margins, region_nodes, sup_convolution, HullMethod, HullResult};
use hquasi::region::{Primitive, RegionSpec};
use hquasi::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn fixture(p: Point) -> f64 {
    (1.0 - p.z * p.z).abs()
}

fn dims_for(lo: Point, hi: Point, h: f64, hz: f64) -> [usize; 3] {
    [
        ((hi.x - lo.x) / h).round() as usize + 1,
        ((hi.y - lo.y) / h).round() as usize + 1,
        ((hi.z - lo.z) / hz).round() as usize + 1,
    ]
}

fn scan16() -> ScanParams {
    ScanParams { n_theta: 16, ..ScanParams::default() }
}

/// Largest error against `exact` over nodes of `sub` at horizontal distance `> tube` from the axis.
fn max_error(field: &GridField, sub: &BoxDomain, tube: f64, exact: impl Fn(Point) -> f64) -> (f64, Point) {
    let mut worst = (0.0, Point::new(0.0, 0.0, 0.0));
    for i in 0..field.len() {
        let p = field.node_point(i);
        if !sub.contains(p) || p.x.hypot(p.y) <= tube {
            continue;
        }
        let e = (field.values()[i] - exact(p)).abs();
        if e > worst.0 {
            worst = (e, p);
        }
    }
    worst
}

fn criterion_1() -> Result<(bool, String)> {
    let domain = BoxDomain::new(Point::new(-2.0, -2.0, -3.0), Point::new(2.0, 2.0, 3.0))?;
    let f = build_field(domain, [81, 81, 121], fixture, 8.0, false)?;
    let h = f.spacing()[0];
    let sub = BoxDomain::new(Point::new(-1.0, -1.0, -2.0), Point::new(1.0, 1.0, 2.0))?;
    let t1 = t_step(&f, &scan16());
    let t2 = t_step(&t1, &scan16());
    let t3 = t_step(&t2, &scan16());
    let tube = h * (1.0 + 1e-9);
    let (e1, w1) = max_error(&t1, &sub, tube, |p| {
        if p.z.abs() >= 1.0 {
            p.z * p.z - 1.0
        } else if p.x == 0.0 && p.y == 0.0 {
            1.0 - p.z * p.z
        } else {
            0.0
        }
    });
    let t2_exact = |p: Point| if p.z.abs() < 1.0 { 0.0 } else { p.z * p.z - 1.0 };
    let (e2, w2) = max_error(&t2, &sub, tube, t2_exact);
    let (far, _) = max_error(&t1, &sub, 1.0, t2_exact);
    let e3 = linf_diff_in(&t2, &t3, &sub)?;
    let pass = e1 <= 0.1 && e2 <= 0.1 && e3 <= 1e-3;
    Ok((
        pass,
        format!(
            "T error {e1:.4} at {w1}, T² error {e2:.4} at {w2}, third-iterate change {e3:.2e} (limits 0.1, 0.1, 1e-3); T error beyond horizontal radius 1: {far:.4}"
        ),
    ))
}

fn capped_fixture(domain: BoxDomain, dims: [usize; 3], k: f64) -> Result<GridField> {
    let slope = capping_slope(k, 0.0, 0.25);
    build_field(domain, dims, capped(fixture, k, 2.5, slope), k, true)
}

fn pde_params(k: f64) -> (HamiltonianParams, SolveParams) {
    let ham = HamiltonianParams { n_theta: 16, n_rho: 12, ..HamiltonianParams::default() };
    let solve = SolveParams { tol_inner: 1e-5, tol_outer: 2e-3, ..SolveParams::new(k) };
    (ham, solve)
}

fn criterion_2() -> Result<(bool, String, GridField)> {
    let k = 3.0;
    let f = capped_fixture(BoxDomain::cube(3.0)?, [61, 61, 61], k)?;
    let (ham, solve) = pde_params(k);
    let (pde, report) = pde_envelope(&f, &ham, &solve)?;
    let direct = t_iterate(&f, &scan16(), 10, 1e-3)?;
    let central = BoxDomain::cube(1.5)?;
    let gap = linf_diff_in(&pde, &direct.field, &central)?;
    let tol = (2.0 * solve.tol_outer).max(4.0 * f.horizontal_step());
    let mono = report.max_mono_violation();
    let pass = gap <= tol && mono <= 1e-9;
    Ok((
        pass,
        format!(
            "central L∞ {gap:.4} (limit {tol}), max monotonicity violation {mono:.1e}, pde {} outer steps converged={}, direct last change {:.1e}",
            report.iterations(),
            report.converged,
            direct.report.last_change().unwrap_or(0.0)
        ),
        direct.field,
    ))
}

fn criterion_3() -> Result<(bool, String)> {
    let k = 3.0;
    let f = capped_fixture(BoxDomain::cube(3.0)?, [41, 41, 41], k)?;
    let (ham, solve) = pde_params(k);
    let (qf, _) = pde_envelope(&f, &ham, &solve)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [0.05, 0.1] {
        let g = f.map(|v| (v + c).min(k))?;
        let (qg, _) = pde_envelope(&g, &ham, &solve)?;
        let d = linf_diff(&qf, &qg)?;
        let limit = c + 2.0 * solve.tol_outer;
        pass &= d <= limit;
        parts.push(format!("c={c}: {d:.4} (limit {limit})"));
    }
    Ok((pass, parts.join(", ")))
}

fn criterion_4() -> Result<(bool, String)> {
    let scan = ScanParams { n_theta: 64, n_s: 64, ..ScanParams::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, big_r, t, expect_empty) in [(1.0, 1.0, 1.0, true), (1.0, 2.0, 1.0, true), (2.0, 2.0, 1.0, false), (2.0, 3.0, 2.0, false)] {
        let region = RegionSpec::disk_stack(r, big_r, t, 0.2)?;
        let w = check_set_hconvex(&region, &scan, 2000, 11)?;
        pass &= w.is_empty() == expect_empty;
        parts.push(format!("({r},{big_r},{t}): {} witnesses", w.len()));
    }
    Ok((pass, parts.join(", ")))
}

struct HullCase {
    region: RegionSpec,
    domain: BoxDomain,
    dims: [usize; 3],
    k: f64,
}

impl HullCase {
    fn ball() -> Result<Self> {
        let (lo, hi) = (Point::new(-1.7, -1.7, -0.6), Point::new(1.7, 1.7, 0.6));
        Ok(HullCase {
            region: RegionSpec::gauge_ball(Point::new(0.0, 0.0, 0.0), 1.0)?,
            domain: BoxDomain::new(lo, hi)?,
            dims: dims_for(lo, hi, 0.05, 0.025),
            k: 0.3,
        })
    }

    fn critical() -> Result<Self> {
        let (lo, hi) = (Point::new(-1.7, -1.7, -0.75), Point::new(1.7, 1.7, 1.25));
        Ok(HullCase {
            region: RegionSpec::disk_stack(1.0, 1.0, 0.5, 0.25)?,
            domain: BoxDomain::new(lo, hi)?,
            dims: dims_for(lo, hi, 0.05, 0.05),
            k: 0.3,
        })
    }

    fn hull(&self, region: &RegionSpec, max_iter: usize) -> Result<HullResult> {
        let method = HullMethod::Direct { scan: scan16(), max_iter, tol_fix: 1e-3 };
        hull_compute(region, self.domain, self.dims, self.k, &method)
    }
}

/// Symmetric-difference nodes between the hull and the region, and how many of
/// them have no 26-neighbour of opposite region membership.
fn shell_check(region: &RegionSpec, hull: &HullResult) -> (usize, usize) {
    let g = &hull.envelope;
    let inside: Vec<bool> = (0..g.len()).map(|i| region.contains(g.node_point(i))).collect();
    let mut in_hull = vec![false; g.len()];
    for &i in &hull.hull_nodes {
        in_hull[i] = true;
    }
    let [nx, ny, nz] = g.dims();
    let (mut sym, mut outside_shell) = (0, 0);
    for i in 0..g.len() {
        if inside[i] == in_hull[i] {
            continue;
        }
        sym += 1;
        let [a, b, c] = g.ijk(i);
        let mut near_boundary = false;
        for da in -1i64..=1 {
            for db in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (x, y, z) = (a as i64 + da, b as i64 + db, c as i64 + dc);
                    if x < 0 || y < 0 || z < 0 || x >= nx as i64 || y >= ny as i64 || z >= nz as i64 {
                        continue;
                    }
                    near_boundary |= inside[g.index(x as usize, y as usize, z as usize)] != inside[i];
                }
            }
        }
        if !near_boundary {
            outside_shell += 1;
        }
    }
    (sym, outside_shell)
}

fn criterion_5(ball: &HullResult, crit: &HullResult, bc: &HullCase, cc: &HullCase) -> Result<(bool, String)> {
    let (sb, ob) = shell_check(&bc.region, ball);
    let (sc, oc) = shell_check(&cc.region, crit);
    let (lo, hi) = (Point::new(-2.6, -2.6, -1.2), Point::new(2.6, 2.6, 2.2));
    let sup = HullCase {
        region: RegionSpec::disk_stack(2.0, 2.0, 1.0, 0.25)?,
        domain: BoxDomain::new(lo, hi)?,
        dims: dims_for(lo, hi, 0.1, 0.1),
        k: 0.5,
    };
    let hs = sup.hull(&sup.region, 8)?;
    let w = hs.envelope.nearest_node(Point::new(0.75, 2.0 / 3.0, 0.5));
    let has_witness = hs.hull_nodes.binary_search(&w).is_ok();
    let pass = ob == 0 && oc == 0 && has_witness;
    Ok((
        pass,
        format!(
            "ball: {sb} differing nodes, {ob} beyond one cell; critical cylinders: {sc} differing, {oc} beyond one cell; supercritical hull contains {}: {has_witness}",
            hs.envelope.node_point(w)
        ),
    ))
}

fn criterion_6(envelopes: &[(&str, &GridField)]) -> Result<(bool, String)> {
    let scan = ScanParams { n_theta: 16, n_s: 32, interp_slack: 2.0, ..ScanParams::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, u) in envelopes {
        for delta in [0.2, 0.4] {
            let s = sup_convolution(u, delta)?;
            let w = check_field_hquasiconvex(&s.field, &scan)?;
            pass &= w.is_empty();
            let worst = w.iter().map(|v| v.margin).fold(0.0, f64::max);
            parts.push(format!("{name} δ={delta}: {} witnesses (worst margin {worst:.2e})", w.len()));
        }
    }
    Ok((pass, parts.join(", ")))
}

fn criterion_7() -> Result<(bool, String)> {
    let method = HullMethod::Direct { scan: scan16(), max_iter: 8, tol_fix: 1e-3 };
    let (blo, bhi) = (Point::new(-1.7, -1.7, -0.7), Point::new(1.7, 1.7, 0.7));
    let (slo, shi) = (Point::new(-2.6, -2.6, -1.2), Point::new(2.6, 2.6, 2.2));
    let unit = RegionSpec::gauge_ball(Point::new(0.0, 0.0, 0.0), 1.0)?;
    let stack = RegionSpec::disk_stack(2.0, 2.0, 1.0, 0.25)?;
    // each cylinder dilated by 0.8 about the centre of its own axis segment
    let shrunk = stack.map_primitives(|p| match p {
        Primitive::Cylinder { radius, z_lo, z_hi } => {
            let c = 0.5 * (z_lo + z_hi);
            Primitive::Cylinder { radius: 0.8 * radius, z_lo: c + 0.64 * (z_lo - c), z_hi: c + 0.64 * (z_hi - c) }
        }
        other => other,
    })?;
    let pairs = [
        ("nested balls", RegionSpec::gauge_ball(Point::new(0.0, 0.0, 0.0), 0.5)?, unit.clone(), blo, bhi),
        ("dilated stack", shrunk, stack, slo, shi),
        ("box in ball", RegionSpec::boxed(Point::new(-0.4, -0.4, -0.1), Point::new(0.4, 0.4, 0.1))?, unit, blo, bhi),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, d, e, lo, hi) in pairs {
        let m = inclusion_margins(&d, &e, BoxDomain::new(lo, hi)?, dims_for(lo, hi, 0.1, 0.05), 0.5, &method)?;
        pass &= m.lhs >= m.rhs - 2.0 * m.h;
        parts.push(format!("{name}: lhs {:.4} rhs {:.4} (left metric {:.4}/{:.4})", m.lhs, m.rhs, m.lhs_left, m.rhs_left));
    }
    Ok((pass, parts.join(", ")))
}

fn criterion_8(ball: &HullResult, crit: &HullResult, bc: &HullCase, cc: &HullCase) -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, case, base, unstable) in [("critical cylinders", cc, crit, true), ("unit ball", bc, ball, false)] {
        let base_pts = base.points();
        for eps in [0.2, 0.1, 0.05] {
            let nb = RegionSpec::left_neighborhood(&case.region, eps)?;
            let hull = case.hull(&nb, 6)?;
            let gap = hausdorff(&base_pts, &hull.points(), Metric::Left)?;
            let ok = if unstable { gap >= 0.2 } else { gap <= 3.0 * eps };
            pass &= ok;
            parts.push(format!("{name} ε={eps}: gap {gap:.4}{}", if ok { "" } else { " (out of bounds)" }));
        }
    }
    Ok((pass, parts.join(", ")))
}

fn criterion_9() -> Result<(bool, String)> {
    // order of the horizontal gradient on a smooth generator
    let u = |p: Point| p.x.sin() * p.y.cos() + 0.5 * (2.0 * p.z).sin() + p.x * p.z;
    let grad = |p: Point| {
        let ux = p.x.cos() * p.y.cos() + p.z;
        let uy = -p.x.sin() * p.y.sin();
        let uz = (2.0 * p.z).cos() + p.x;
        (ux - 0.5 * p.y * uz, uy + 0.5 * p.x * uz)
    };
    let probes = [Point::new(0.2, -0.4, 0.6), Point::new(-0.6, 0.2, -0.2), Point::new(0.4, 0.4, 0.0)];
    let mut logs = Vec::new();
    for n in [11, 21, 41, 81] {
        let f = build_field(BoxDomain::cube(1.0)?, [n, n, n], u, 10.0, false)?;
        let err = probes
            .iter()
            .map(|&p| {
                let g = f.horiz_grad(p);
                let (a, b) = grad(p);
                (g.x1 - a).abs().max((g.x2 - b).abs())
            })
            .fold(0.0, f64::max);
        logs.push((f.spacing()[0].ln(), err.ln()));
    }
    let n = logs.len() as f64;
    let (mx, my) = (logs.iter().map(|l| l.0).sum::<f64>() / n, logs.iter().map(|l| l.1).sum::<f64>() / n);
    let slope = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum::<f64>() / logs.iter().map(|l| (l.0 - mx).powi(2)).sum::<f64>();

    // metric axioms and invariance
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pt = || Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let (p, q, r, g) = (pt(), pt(), pt(), pt());
        for d in [dist_left, dist_right] {
            worst = worst.max(d(p, p)).max((d(p, q) - d(q, p)).abs()).max(d(p, r) - d(p, q) - d(q, r));
        }
        worst = worst.max((dist_left(mul(g, p), mul(g, q)) - dist_left(p, q)).abs());
        worst = worst.max((dist_right(mul(p, g), mul(q, g)) - dist_right(p, q)).abs());
        worst = worst.max((gauge(p) - dist_left(Point::new(0.0, 0.0, 0.0), p)).abs());
    }

    // field file round trip
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let values: Vec<f64> = (0..7 * 9 * 11).map(|_| rng.gen_range(-1e3..1e3)).collect();
    let field = GridField::from_values(BoxDomain::new(Point::new(-1.1, 0.3, -2.7), Point::new(0.9, 1.7, 3.3))?, [7, 9, 11], values, 0.1 + 0.2)?;
    let mut bytes = Vec::new();
    field.write_to(&mut bytes)?;
    let back = GridField::read_from(&mut bytes.as_slice())?;
    let exact = back.values().iter().zip(field.values()).all(|(a, b)| a.to_bits() == b.to_bits())
        && back.domain() == field.domain()
        && back.dims() == field.dims()
        && back.exterior().to_bits() == field.exterior().to_bits();

    let pass = (slope - 2.0).abs() <= 0.3 && worst <= 1e-12 && exact;
    Ok((pass, format!("gradient order {slope:.3}, worst metric defect {worst:.1e}, round trip bit-exact: {exact}")))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn main() -> Result<()> {
    let mut verdicts = Vec::new();
    let mut record = |id: usize, r: (bool, String), seconds: f64| {
        let line = format!("criterion {id}: {} ({seconds:.0} s) {}", if r.0 { "PASS" } else { "FAIL" }, r.1);
        println!("{line}");
        verdicts.push(Verdict { id, pass: r.0, detail: r.1, seconds });
    };

    let (r, s) = timed(criterion_1);
    record(1, r?, s);
    let (r, s) = timed(criterion_2);
    let (p2, d2, direct_envelope) = r?;
    record(2, (p2, d2), s);
    let (r, s) = timed(criterion_3);
    record(3, r?, s);
    let (r, s) = timed(criterion_4);
    record(4, r?, s);

    let (bc, cc) = (HullCase::ball()?, HullCase::critical()?);
    let (bases, s_base) = timed(|| -> Result<_> { Ok((bc.hull(&bc.region, 8)?, cc.hull(&cc.region, 8)?)) });
    let (ball, crit) = bases?;
    let (r, s) = timed(|| criterion_5(&ball, &crit, &bc, &cc));
    record(5, r?, s + s_base);
    let (r, s) = timed(|| criterion_6(&[("fixture envelope", &direct_envelope), ("ball hull envelope", &ball.envelope), ("cylinder hull envelope", &crit.envelope)]));
    record(6, r?, s);
    let (r, s) = timed(criterion_7);
    record(7, r?, s);
    let (r, s) = timed(|| criterion_8(&ball, &crit, &bc, &cc));
    record(8, r?, s);
    let (r, s) = timed(criterion_9);
    record(9, r?, s);

    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance summary: {passed}/{} criteria passed", verdicts.len());
    for v in verdicts.iter().filter(|v| !v.pass) {
        println!("  failed criterion {} after {:.0} s: {}", v.id, v.seconds, v.detail);
    }
    let node_count = region_nodes(&bc.region, &ball.envelope).len();
    println!("  ball fixture nodes: {node_count}, hull nodes: {}", ball.hull_nodes.len());
    Ok(())
}
