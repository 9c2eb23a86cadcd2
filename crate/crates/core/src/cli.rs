//! Command-line front end.
//!
//! Exit codes: 0 success, 1 error, 2 finished with a flag raised (iteration
//! cap reached, or a checker found witnesses).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::direct::{check_field_hquasiconvex, check_set_hconvex, t_iterate, write_witness_csv, ViolationWitness};
use crate::error::{Error, Result};
use crate::field::{build_field, Axis, GridField, SliceSpec};
use crate::group::{gauge, Point};
use crate::hj::{capped, capping_slope, pde_envelope};
use crate::hull::{hull_compute, sup_convolution, write_points_csv, HullMethod};
use crate::report::SchemeReport;

#[derive(Parser, Debug)]
#[command(name = "hquasi", about = "H-quasiconvex envelopes and h-convex hulls in the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (flat key = value).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 picks automatically. Overrides the `threads` key.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Envelope of a generated field.
    Envelope,
    /// H-convex hull of a region.
    Hull,
    /// Falsification search for h-convexity of a region.
    CheckHconvex,
    /// Falsification search for h-quasiconvexity of a stored field.
    CheckHquasiconvex,
    /// Right-invariant sup-convolution of a stored field.
    Supconv,
    /// Gauge distances from points to a region.
    Distance,
    /// Planar CSV slices of a stored field.
    Slice,
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Flagged,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Flagged) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => return Err(Error::Config { key: "--config".into(), reason: "a configuration file is required".into() }),
    };
    let threads = match cli.threads {
        Some(n) => n,
        None => cfg.threads()?,
    };
    if threads > 0 {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let job = prepare(cli.command, &cfg)?;
    job.run(&cli.out)
}

/// A fully validated command, ready to compute.
enum Job {
    Envelope { field: GridField, method: HullMethod, slices: Vec<SliceSpec> },
    Hull { cfg: Box<RunConfig>, method: HullMethod },
    CheckHconvex { cfg: Box<RunConfig> },
    CheckHquasiconvex { field: GridField, cfg: Box<RunConfig> },
    Supconv { field: GridField, delta: f64 },
    Distance { cfg: Box<RunConfig> },
    Slice { field: GridField, slices: Vec<SliceSpec> },
}

fn named_generator(name: &str) -> Result<fn(Point) -> f64> {
    match name {
        "abs_one_minus_z2" => Ok(|p: Point| (1.0 - p.z * p.z).abs()),
        "gauge" => Ok(gauge),
        "gauge_squared" => Ok(|p: Point| gauge(p).powi(2)),
        "horizontal_norm" => Ok(|p: Point| p.x.hypot(p.y)),
        other => Err(Error::Config {
            key: "generator".into(),
            reason: format!("unknown generator {other:?}; expected abs_one_minus_z2, gauge, gauge_squared or horizontal_norm"),
        }),
    }
}

/// Field of the configured generator, capped to `K` outside `cap_radius` when given.
pub fn generated_field(cfg: &RunConfig) -> Result<GridField> {
    let (domain, dims, k) = (cfg.domain()?, cfg.dims()?, cfg.k()?);
    let raw = named_generator(cfg.require("generator")?)?;
    match cfg.get::<f64>("cap_radius")? {
        None => build_field(domain, dims, raw, k, true),
        Some(radius) => {
            let collar: f64 = cfg.get_required("cap_collar")?;
            let plain = build_field(domain, dims, raw, k, false)?;
            let slope = capping_slope(k, plain.min_value(), collar);
            build_field(domain, dims, capped(raw, k, radius, slope), k, true)
        }
    }
}

fn stored_field(cfg: &RunConfig) -> Result<GridField> {
    GridField::load(cfg.path("field")?)
}

fn prepare(command: Command, cfg: &RunConfig) -> Result<Job> {
    Ok(match command {
        Command::Envelope => {
            let field = generated_field(cfg)?;
            let method = cfg.method(cfg.k()?)?;
            Job::Envelope { field, method, slices: cfg.slices()? }
        }
        Command::Hull => {
            cfg.region()?;
            cfg.domain()?;
            cfg.dims()?;
            let method = cfg.method(cfg.k()?)?;
            Job::Hull { cfg: Box::new(cfg.clone()), method }
        }
        Command::CheckHconvex => {
            cfg.region()?;
            cfg.scan()?;
            cfg.get::<usize>("samples")?;
            cfg.get::<u64>("seed")?;
            Job::CheckHconvex { cfg: Box::new(cfg.clone()) }
        }
        Command::CheckHquasiconvex => {
            let field = if cfg.raw("field").is_some() { stored_field(cfg)? } else { generated_field(cfg)? };
            cfg.scan()?;
            Job::CheckHquasiconvex { field, cfg: Box::new(cfg.clone()) }
        }
        Command::Supconv => {
            let delta: f64 = cfg.get_required("delta")?;
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::Config { key: "delta".into(), reason: "must be positive".into() });
            }
            Job::Supconv { field: stored_field(cfg)?, delta }
        }
        Command::Distance => {
            cfg.region()?;
            cfg.points()?;
            cfg.metric()?;
            Job::Distance { cfg: Box::new(cfg.clone()) }
        }
        Command::Slice => {
            let slices = cfg.slices()?;
            if slices.is_empty() {
                return Err(Error::Config { key: "slices".into(), reason: "required key missing".into() });
            }
            let field = stored_field(cfg)?;
            let (lo, hi) = (field.domain().lo.to_array(), field.domain().hi.to_array());
            for s in &slices {
                let a = axis_index(s.axis);
                if !(s.value >= lo[a] && s.value <= hi[a]) {
                    return Err(Error::Config { key: "slices".into(), reason: format!("{} outside the field domain", s.value) });
                }
            }
            Job::Slice { field, slices }
        }
    })
}

fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

fn slice_name(s: &SliceSpec) -> String {
    let axis = ["x", "y", "z"][axis_index(s.axis)];
    format!("slice_{axis}_{}.csv", s.value)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_report(dir: &Path, report: &SchemeReport) -> Result<()> {
    let mut w = create(dir, "report.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_witnesses(dir: &Path, w: &[ViolationWitness]) -> Result<Outcome> {
    let mut f = create(dir, "witnesses.csv")?;
    write_witness_csv(w, &mut f)?;
    f.flush()?;
    println!("{} witnesses", w.len());
    Ok(if w.is_empty() { Outcome::Done } else { Outcome::Flagged })
}

fn run_envelope(field: &GridField, method: &HullMethod) -> Result<(GridField, SchemeReport)> {
    match method {
        HullMethod::Direct { scan, max_iter, tol_fix } => {
            let it = t_iterate(field, scan, *max_iter, *tol_fix)?;
            Ok((it.field, it.report))
        }
        HullMethod::Pde { ham, solve } => pde_envelope(field, ham, solve),
    }
}

fn converged(report: &SchemeReport) -> Outcome {
    if report.converged {
        Outcome::Done
    } else {
        eprintln!("warning: iteration cap reached before the stopping tolerance");
        Outcome::Flagged
    }
}

impl Job {
    fn run(self, out: &Path) -> Result<Outcome> {
        match self {
            Job::Envelope { field, method, slices } => {
                let (env, report) = run_envelope(&field, &method)?;
                std::fs::create_dir_all(out)?;
                env.save(out.join("envelope.hhf"))?;
                write_report(out, &report)?;
                for s in &slices {
                    let mut w = create(out, &slice_name(s))?;
                    env.write_slice_csv(*s, &mut w)?;
                    w.flush()?;
                }
                println!("{} iterations, last change {:e}", report.iterations(), report.last_change().unwrap_or(0.0));
                Ok(converged(&report))
            }
            Job::Hull { cfg, method } => {
                let result = hull_compute(&cfg.region()?, cfg.domain()?, cfg.dims()?, cfg.k()?, &method)?;
                std::fs::create_dir_all(out)?;
                result.envelope.save(out.join("envelope.hhf"))?;
                result.defining.save(out.join("defining.hhf"))?;
                let mut w = create(out, "hull_points.csv")?;
                write_points_csv(&result.points(), &mut w)?;
                w.flush()?;
                write_report(out, &result.report)?;
                println!("{} hull nodes ({} method)", result.hull_nodes.len(), result.method);
                Ok(converged(&result.report))
            }
            Job::CheckHconvex { cfg } => {
                let w = check_set_hconvex(&cfg.region()?, &cfg.scan()?, cfg.get_or("samples", 2000)?, cfg.get_or("seed", 0)?)?;
                std::fs::create_dir_all(out)?;
                write_witnesses(out, &w)
            }
            Job::CheckHquasiconvex { field, cfg } => {
                let w = check_field_hquasiconvex(&field, &cfg.scan()?)?;
                std::fs::create_dir_all(out)?;
                write_witnesses(out, &w)
            }
            Job::Supconv { field, delta } => {
                let s = sup_convolution(&field, delta)?;
                if s.under_resolved {
                    eprintln!("warning: delta {delta} is below the grid spacing; balls may hold a single node");
                }
                std::fs::create_dir_all(out)?;
                s.field.save(out.join("supconv.hhf"))?;
                Ok(Outcome::Done)
            }
            Job::Distance { cfg } => {
                let region = cfg.region()?;
                let metric = cfg.metric()?;
                std::fs::create_dir_all(out)?;
                let mut w = create(out, "distance.csv")?;
                writeln!(w, "x,y,z,distance,inside")?;
                for p in cfg.points()? {
                    let d = region.distance(p, metric);
                    let inside = region.contains(p);
                    writeln!(w, "{:?},{:?},{:?},{:?},{}", p.x, p.y, p.z, d, inside)?;
                    println!("{p}: {d} (inside: {inside})");
                }
                w.flush()?;
                Ok(Outcome::Done)
            }
            Job::Slice { field, slices } => {
                std::fs::create_dir_all(out)?;
                for s in &slices {
                    let mut w = create(out, &slice_name(s))?;
                    let rows = field.write_slice_csv(*s, &mut w)?;
                    w.flush()?;
                    println!("{}: {rows} rows", slice_name(s));
                }
                Ok(Outcome::Done)
            }
        }
    }
}
