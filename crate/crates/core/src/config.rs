//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Unknown and repeated keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::direct::ScanParams;
use crate::error::{Error, Result};
use crate::field::{Axis, BoxDomain, SliceSpec};
use crate::group::{Metric, Point};
use crate::hj::{HamiltonianParams, Schedule, SolveParams};
use crate::hull::HullMethod;
use crate::region::RegionSpec;

/// Every key a configuration may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "domain_lo",
    "domain_hi",
    "dims",
    "K",
    "generator",
    "cap_radius",
    "cap_collar",
    "region",
    "region_open",
    "neighborhood",
    "method",
    "threads",
    "n_theta",
    "n_s",
    "tol_violation",
    "tol_plane",
    "interp_slack",
    "max_iter",
    "tol_fix",
    "n_rho",
    "eps_strict",
    "use_nonstrict",
    "omega_relax",
    "tol_inner",
    "max_inner",
    "tol_outer",
    "max_outer",
    "schedule",
    "field",
    "delta",
    "slices",
    "samples",
    "seed",
    "points",
    "metric",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
    /// Directory relative paths in the file are resolved against.
    base: PathBuf,
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), reason: reason.into() }
}

fn parse_scalar<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| bad(key, format!("cannot parse {raw:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(line, format!("line {} is not key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(bad(k, "unknown key"));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(bad(k, "key given twice"));
            }
        }
        Ok(RunConfig { entries, base: PathBuf::new() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| bad(key, "required key missing"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|v| parse_scalar(key, v)).transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_required<T: FromStr>(&self, key: &str) -> Result<T> {
        parse_scalar(key, self.require(key)?)
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key).map(|v| v.split(',').map(|s| parse_scalar(key, s)).collect()).transpose()
    }

    fn point(&self, key: &str) -> Result<Point> {
        let v: Vec<f64> = self.list(key)?.ok_or_else(|| bad(key, "required key missing"))?;
        match v[..] {
            [x, y, z] => Ok(Point::new(x, y, z)),
            _ => Err(bad(key, "expected three comma-separated numbers")),
        }
    }

    /// Resolves a path value against the configuration file's directory.
    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let p = PathBuf::from(self.require(key)?);
        Ok(if p.is_absolute() { p } else { self.base.join(p) })
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        let (lo, hi) = (self.point("domain_lo")?, self.point("domain_hi")?);
        BoxDomain::new(lo, hi).map_err(|e| bad("domain_hi", e.to_string()))
    }

    pub fn dims(&self) -> Result<[usize; 3]> {
        let v: Vec<usize> = self.list("dims")?.ok_or_else(|| bad("dims", "required key missing"))?;
        match v[..] {
            [a, b, c] if a >= 2 && b >= 2 && c >= 2 => Ok([a, b, c]),
            _ => Err(bad("dims", "expected three counts of at least 2")),
        }
    }

    pub fn k(&self) -> Result<f64> {
        let k: f64 = self.get_required("K")?;
        if !(k.is_finite() && k > 0.0) {
            return Err(bad("K", "must be positive"));
        }
        Ok(k)
    }

    pub fn threads(&self) -> Result<usize> {
        self.get_or("threads", 0)
    }

    pub fn scan(&self) -> Result<ScanParams> {
        let d = ScanParams::default();
        let s = ScanParams {
            n_theta: self.get_or("n_theta", d.n_theta)?,
            n_s: self.get_or("n_s", d.n_s)?,
            tol_violation: self.get_or("tol_violation", d.tol_violation)?,
            tol_plane: self.get_or("tol_plane", d.tol_plane)?,
            interp_slack: self.get_or("interp_slack", d.interp_slack)?,
        };
        s.validate().map_err(|e| bad("n_theta", e.to_string()))?;
        Ok(s)
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianParams> {
        let d = HamiltonianParams::default();
        let h = HamiltonianParams {
            n_theta: self.get_or("n_theta", d.n_theta)?,
            n_rho: self.get_or("n_rho", d.n_rho)?,
            eps_strict: self.get_or("eps_strict", d.eps_strict)?,
            use_nonstrict: self.get_or("use_nonstrict", d.use_nonstrict)?,
        };
        h.validate().map_err(|e| bad("n_rho", e.to_string()))?;
        Ok(h)
    }

    pub fn solve(&self, k: f64) -> Result<SolveParams> {
        let d = SolveParams::new(k);
        let schedule = match self.raw("schedule") {
            None | Some("gauss_seidel") => Schedule::GaussSeidel,
            Some("jacobi") => Schedule::Jacobi,
            Some(other) => return Err(bad("schedule", format!("expected gauss_seidel or jacobi, got {other:?}"))),
        };
        let s = SolveParams {
            omega_relax: self.get_or("omega_relax", d.omega_relax)?,
            tol_inner: self.get_or("tol_inner", d.tol_inner)?,
            max_inner: self.get_or("max_inner", d.max_inner)?,
            tol_outer: self.get_or("tol_outer", d.tol_outer)?,
            max_outer: self.get_or("max_outer", d.max_outer)?,
            k,
            schedule,
        };
        s.validate().map_err(|e| bad("omega_relax", e.to_string()))?;
        Ok(s)
    }

    pub fn method(&self, k: f64) -> Result<HullMethod> {
        match self.require("method")? {
            "direct" => Ok(HullMethod::Direct {
                scan: self.scan()?,
                max_iter: self.get_or("max_iter", 20)?,
                tol_fix: self.get_or("tol_fix", 1e-3)?,
            }),
            "pde" => Ok(HullMethod::Pde { ham: self.hamiltonian()?, solve: self.solve(k)? }),
            other => Err(bad("method", format!("expected direct or pde, got {other:?}"))),
        }
    }

    pub fn region(&self) -> Result<RegionSpec> {
        let raw = self.require("region")?;
        let mut region = parse_region(raw).map_err(|e| bad("region", e.to_string()))?;
        if !self.get_or("region_open", true)? {
            region = region.closed();
        }
        if let Some(eps) = self.get::<f64>("neighborhood")? {
            region = RegionSpec::left_neighborhood(&region, eps).map_err(|e| bad("neighborhood", e.to_string()))?;
        }
        Ok(region)
    }

    pub fn metric(&self) -> Result<Metric> {
        match self.raw("metric").unwrap_or("right") {
            "left" => Ok(Metric::Left),
            "right" => Ok(Metric::Right),
            other => Err(bad("metric", format!("expected left or right, got {other:?}"))),
        }
    }

    /// `slices = z:0.5, x:0` style list; empty when absent.
    pub fn slices(&self) -> Result<Vec<SliceSpec>> {
        let Some(raw) = self.raw("slices") else { return Ok(Vec::new()) };
        raw.split(',').map(|s| parse_slice(s).map_err(|r| bad("slices", r))).collect()
    }

    /// `points = x,y,z; x,y,z`.
    pub fn points(&self) -> Result<Vec<Point>> {
        self.require("points")?
            .split(';')
            .map(|chunk| {
                let v: Vec<f64> = chunk.split(',').map(|s| parse_scalar("points", s)).collect::<Result<_>>()?;
                match v[..] {
                    [x, y, z] => Ok(Point::new(x, y, z)),
                    _ => Err(bad("points", format!("expected x,y,z in {chunk:?}"))),
                }
            })
            .collect()
    }
}

fn parse_slice(s: &str) -> std::result::Result<SliceSpec, String> {
    let (axis, value) = s.trim().split_once(':').ok_or_else(|| format!("expected axis:value, got {s:?}"))?;
    let axis = match axis.trim() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        other => return Err(format!("unknown axis {other:?}")),
    };
    let value = value.trim().parse().map_err(|_| format!("cannot parse {value:?}"))?;
    Ok(SliceSpec { axis, value })
}

/// Parses `shape:args` terms joined by `+`, for example
/// `ball:0,0,0,1 + cylinder:1,0.5,0.75`. Shapes: `ball:cx,cy,cz,r`,
/// `cylinder:r,z_lo,z_hi`, `box:x0,y0,z0,x1,y1,z1`, `disk_stack:r,R,t,delta`.
pub fn parse_region(text: &str) -> Result<RegionSpec> {
    let mut out: Option<RegionSpec> = None;
    for term in text.split('+') {
        let (shape, args) = term
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("expected shape:args, got {term:?}")))?;
        let a: Vec<f64> = args
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::InvalidInput(format!("cannot parse {s:?} in {term:?}"))))
            .collect::<Result<_>>()?;
        let arity = |n: usize| {
            if a.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{shape} takes {n} numbers, got {}", a.len())))
            }
        };
        let r = match shape.trim() {
            "ball" => {
                arity(4)?;
                RegionSpec::gauge_ball(Point::new(a[0], a[1], a[2]), a[3])?
            }
            "cylinder" => {
                arity(3)?;
                RegionSpec::cylinder(a[0], a[1], a[2])?
            }
            "box" => {
                arity(6)?;
                RegionSpec::boxed(Point::new(a[0], a[1], a[2]), Point::new(a[3], a[4], a[5]))?
            }
            "disk_stack" => {
                arity(4)?;
                RegionSpec::disk_stack(a[0], a[1], a[2], a[3])?
            }
            other => return Err(Error::InvalidInput(format!("unknown shape {other:?}"))),
        };
        out = Some(match out {
            None => r,
            Some(acc) => acc.union(r)?,
        });
    }
    out.ok_or_else(|| Error::InvalidInput("empty region".into()))
}
