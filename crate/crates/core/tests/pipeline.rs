use hquasi::direct::{check_field_hquasiconvex, t_iterate, t_step, ScanParams};
use hquasi::field::{build_field, linf_diff, BoxDomain, GridField};
use hquasi::group::Point;
use hquasi::hj::{capped, capping_slope, pde_envelope, HamiltonianParams, SolveParams};
use hquasi::hull::{defining_function, hull_compute, sup_convolution, HullMethod};
use hquasi::region::RegionSpec;

fn scan() -> ScanParams {
    ScanParams { n_theta: 12, n_s: 24, ..ScanParams::default() }
}

fn coarse_fixture() -> GridField {
    let k = 3.0;
    let raw = |p: Point| (1.0 - p.z * p.z).abs();
    build_field(BoxDomain::cube(3.0).unwrap(), [17, 17, 17], capped(raw, k, 2.5, capping_slope(k, 0.0, 0.25)), k, true).unwrap()
}

fn hull_domain() -> (BoxDomain, [usize; 3]) {
    (BoxDomain::new(Point::new(-1.6, -1.6, -0.8), Point::new(1.6, 1.6, 0.8)).unwrap(), [21, 21, 21])
}

fn direct() -> HullMethod {
    HullMethod::Direct { scan: scan(), max_iter: 10, tol_fix: 1e-3 }
}

#[test]
fn direct_envelope_lies_below_and_is_stationary() {
    let f = coarse_fixture();
    let it = t_iterate(&f, &scan(), 60, 1e-6).unwrap();
    assert!(it.report.converged, "{:?}", it.report.last_change());
    assert!(it.report.steps.windows(2).all(|w| w[1].linf_change <= w[0].linf_change + 1e-12));
    assert!(it.field.values().iter().zip(f.values()).all(|(q, v)| q <= v));
    let again = t_step(&it.field, &scan());
    assert!(linf_diff(&again, &it.field).unwrap() <= 1e-6);
}

#[test]
fn envelopes_pass_the_checker() {
    let f = coarse_fixture();
    let checker = ScanParams { interp_slack: 2.0, ..scan() };
    assert!(!check_field_hquasiconvex(&f, &checker).unwrap().is_empty());
    let it = t_iterate(&f, &scan(), 20, 1e-6).unwrap();
    assert!(check_field_hquasiconvex(&it.field, &checker).unwrap().is_empty());
}

#[test]
fn pde_envelope_decreases_and_agrees_with_direct() {
    let f = coarse_fixture();
    let ham = HamiltonianParams { n_theta: 8, n_rho: 6, ..HamiltonianParams::default() };
    let solve = SolveParams { tol_outer: 5e-3, ..SolveParams::new(3.0) };
    let (u, report) = pde_envelope(&f, &ham, &solve).unwrap();
    assert!(report.converged);
    assert!(report.max_mono_violation() <= 1e-9);
    assert!(u.values().iter().zip(f.values()).all(|(q, v)| *q <= v + 1e-12));
    let d = t_iterate(&f, &scan(), 20, 1e-4).unwrap().field;
    let central = BoxDomain::cube(1.5).unwrap();
    let gap = hquasi::field::linf_diff_in(&u, &d, &central).unwrap();
    assert!(gap <= 4.0 * f.horizontal_step(), "gap {gap}");
}

#[test]
fn hull_is_monotone_in_the_set() {
    let (domain, dims) = hull_domain();
    let small = RegionSpec::gauge_ball(Point::ORIGIN, 0.7).unwrap();
    let big = RegionSpec::gauge_ball(Point::ORIGIN, 1.0).unwrap();
    let a = hull_compute(&small, domain, dims, 0.4, &direct()).unwrap();
    let b = hull_compute(&big, domain, dims, 0.4, &direct()).unwrap();
    assert!(a.hull_nodes.iter().all(|i| b.hull_nodes.binary_search(i).is_ok()));
    assert!(a.hull_nodes.len() < b.hull_nodes.len());
}

#[test]
fn hull_contains_the_set_and_fixes_convex_sets() {
    let (domain, dims) = hull_domain();
    let ball = RegionSpec::gauge_ball(Point::ORIGIN, 1.0).unwrap();
    let h = hull_compute(&ball, domain, dims, 0.4, &direct()).unwrap();
    let defining = defining_function(&ball, domain, dims, 0.4).unwrap();
    let inside = defining.sublevel_extract(0.0, true);
    assert!(inside.iter().all(|i| h.hull_nodes.binary_search(i).is_ok()));
    assert_eq!(h.hull_nodes, inside);
}

#[test]
fn supercritical_stack_hull_fills_in() {
    let domain = BoxDomain::new(Point::new(-2.6, -2.6, -1.2), Point::new(2.6, 2.6, 2.2)).unwrap();
    let dims = [27, 27, 18];
    let stack = RegionSpec::disk_stack(2.0, 2.0, 1.0, 0.25).unwrap();
    let h = hull_compute(&stack, domain, dims, 0.5, &direct()).unwrap();
    let grid = &h.envelope;
    let outside_but_hull = h.hull_nodes.iter().filter(|&&i| !stack.contains(grid.node_point(i))).count();
    assert!(outside_but_hull > 0);
}

#[test]
fn sup_convolution_keeps_quasiconvexity() {
    let f = coarse_fixture();
    let u = t_iterate(&f, &scan(), 20, 1e-6).unwrap().field;
    let s = sup_convolution(&u, 0.6).unwrap();
    assert!(!s.under_resolved);
    let checker = ScanParams { interp_slack: 2.0, ..scan() };
    assert!(check_field_hquasiconvex(&s.field, &checker).unwrap().is_empty());
}
