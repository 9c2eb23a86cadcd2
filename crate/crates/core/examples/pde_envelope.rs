//! Envelope through the nonlocal Hamilton-Jacobi iteration, compared with the direct method.
use hquasi::direct::{t_iterate, ScanParams};
use hquasi::field::{build_field, linf_diff_in, BoxDomain};
use hquasi::group::Point;
use hquasi::hj::{capped, capping_slope, pde_envelope, HamiltonianParams, SolveParams};

fn main() -> hquasi::Result<()> {
    let k = 3.0;
    let raw = |p: Point| (1.0 - p.z * p.z).abs();
    let f = build_field(BoxDomain::cube(3.0)?, [25, 25, 25], capped(raw, k, 2.5, capping_slope(k, 0.0, 0.25)), k, true)?;
    let ham = HamiltonianParams { n_theta: 16, n_rho: 12, ..HamiltonianParams::default() };
    let solve = SolveParams { tol_outer: 2e-3, ..SolveParams::new(k) };
    let (u, report) = pde_envelope(&f, &ham, &solve)?;
    for s in &report.steps {
        println!("outer {} inner {} change {:.2e} mono {:.1e}", s.outer, s.inner_iters, s.linf_change, s.mono_violation);
    }
    let direct = t_iterate(&f, &ScanParams { n_theta: 16, ..ScanParams::default() }, 10, 1e-3)?;
    println!("central gap to the direct envelope: {:.4}", linf_diff_in(&u, &direct.field, &BoxDomain::cube(1.5)?)?);
    Ok(())
}
