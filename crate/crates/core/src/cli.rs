//! Command-line harness: experiment configs, seeded runs, CSV output and the
//! verification suites.
//!
//! Settings come from flags and from an optional flat `key = value` config
//! file; flags win. Exit codes: 0 success, 1 failed verification, 2 bad
//! configuration or input.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::bodies::{parse_hpolytope, ConvexBody};
use crate::convolution::covariogram_profile;
use crate::estimator::convergence_table;
use crate::sampling::StreamKey;
use crate::specialfn::{
    affine_surface_area, c_d, cap_bound_values, cap_volume_exact, cap_volume_quadrature, theorem1_consistency,
    unit_ball_volume, wieacker_limit, CapGeometry,
};
use crate::verify::{fmt_f64, run_suite, SuiteParams, SuiteReport, Table, SUITES};
use crate::{Error, Result};

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "STOCHGEO_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "stochgeo", version, about = "Random polytopes in convex bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Estimate the scaled volume deficit for each n.
    Deficit,
    /// Table of c(d), the ball limit and the consistency residual.
    Constants,
    /// Volume, affine surface area and predicted limit of a body.
    Asa,
    /// Exact cap volumes and the sandwich bounds.
    Cap,
    /// Covariogram profile along a ray from the symmetry point.
    Convolution,
    /// Run verification suites.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Deficit => "deficit",
            Command::Constants => "constants",
            Command::Asa => "asa",
            Command::Cap => "cap",
            Command::Convolution => "convolution",
            Command::Verify => "verify",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Flat `key = value` config file (flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// ball:d=<int>,r=<real> | ellipsoid:axes=<real,...> | box:d=<int> | simplex:d=<int> | hpoly:file=<path>
    #[arg(long, global = true)]
    pub body: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub suite: Option<String>,
    #[arg(long, global = true)]
    pub dmax: Option<usize>,
    /// Cap height for `cap` (default: a grid of heights).
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Reuse one stream for every n (common random numbers).
    #[arg(long, global = true)]
    pub crn: bool,
}

/// Experiment settings; unset fields fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub body: Option<String>,
    pub ns: Vec<usize>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub probes: Option<usize>,
    pub seed: Option<u64>,
    pub suite: Option<String>,
    pub dmax: Option<usize>,
    pub delta: Option<f64>,
    pub crn: bool,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

const KEYS: [&str; 12] = [
    "body", "ns", "n", "trials", "probes", "seed", "suite", "dmax", "delta", "crn", "workers", "out",
];

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn positive(line: usize, key: &str, v: &str) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(x) if x > 0 => Ok(x),
        _ => Err(config_err(line, format!("{key} must be a positive integer, got {v:?}"))),
    }
}

impl ExperimentConfig {
    /// Parses the flat `key = value` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_err(line, format!("unknown key {key:?}")));
            }
            if !seen.insert(key.to_string()) {
                return Err(config_err(line, format!("duplicate key {key:?}")));
            }
            match key {
                "body" => c.body = Some(value.to_string()),
                "ns" => {
                    c.ns = value
                        .split(',')
                        .map(|v| positive(line, "ns", v.trim()))
                        .collect::<Result<_>>()?
                }
                "n" => c.n = Some(positive(line, key, value)?),
                "trials" => c.trials = Some(positive(line, key, value)?),
                "probes" => c.probes = Some(positive(line, key, value)?),
                "seed" => {
                    c.seed = Some(
                        value
                            .parse()
                            .map_err(|_| config_err(line, format!("seed must be a 64-bit integer, got {value:?}")))?,
                    )
                }
                "suite" => c.suite = Some(value.to_string()),
                "dmax" => c.dmax = Some(positive(line, key, value)?),
                "delta" => {
                    c.delta = Some(
                        value
                            .parse()
                            .ok()
                            .filter(|v: &f64| v.is_finite())
                            .ok_or_else(|| config_err(line, format!("delta must be a real, got {value:?}")))?,
                    )
                }
                "crn" => {
                    c.crn = value
                        .parse()
                        .map_err(|_| config_err(line, format!("crn must be true or false, got {value:?}")))?
                }
                "workers" => c.workers = Some(positive(line, key, value)?),
                "out" => c.out = Some(value.to_string()),
                _ => unreachable!(),
            }
        }
        Ok(c)
    }

    /// Canonical text: set keys in a fixed order. `parse(format(c)) == c`.
    pub fn format(&self) -> String {
        let mut s = String::new();
        if let Some(v) = &self.body {
            let _ = writeln!(s, "body = {v}");
        }
        if !self.ns.is_empty() {
            let list: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(s, "ns = {}", list.join(","));
        }
        let ints = [("n", self.n), ("trials", self.trials), ("probes", self.probes)];
        for (k, v) in ints {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        if let Some(v) = self.seed {
            let _ = writeln!(s, "seed = {v}");
        }
        if let Some(v) = &self.suite {
            let _ = writeln!(s, "suite = {v}");
        }
        if let Some(v) = self.dmax {
            let _ = writeln!(s, "dmax = {v}");
        }
        if let Some(v) = self.delta {
            let _ = writeln!(s, "delta = {v:?}");
        }
        if self.crn {
            let _ = writeln!(s, "crn = true");
        }
        if let Some(v) = self.workers {
            let _ = writeln!(s, "workers = {v}");
        }
        if let Some(v) = &self.out {
            let _ = writeln!(s, "out = {v}");
        }
        s
    }

    /// Overlays flags on top of this config.
    pub fn apply_flags(&mut self, f: &Flags) -> Result<()> {
        let check = |name: &str, v: Option<usize>| -> Result<Option<usize>> {
            match v {
                Some(0) => Err(Error::Config(format!("--{name} must be positive"))),
                other => Ok(other),
            }
        };
        if let Some(b) = &f.body {
            self.body = Some(b.clone());
        }
        if let Some(ns) = &f.ns {
            if ns.contains(&0) {
                return Err(Error::Config("--ns entries must be positive".into()));
            }
            self.ns = ns.clone();
        }
        self.n = check("n", f.n)?.or(self.n);
        self.trials = check("trials", f.trials)?.or(self.trials);
        self.probes = check("probes", f.probes)?.or(self.probes);
        self.seed = f.seed.or(self.seed);
        if let Some(s) = &f.suite {
            self.suite = Some(s.clone());
        }
        self.dmax = check("dmax", f.dmax)?.or(self.dmax);
        self.delta = f.delta.or(self.delta);
        self.crn |= f.crn;
        self.workers = check("workers", f.workers)?.or(self.workers);
        if let Some(o) = &f.out {
            self.out = Some(o.to_string_lossy().into_owned());
        }
        Ok(())
    }

    /// Seed from the config, then the environment, then the built-in default.
    pub fn resolved_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be a 64-bit integer, got {v:?}"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    /// Hash of the canonical config for `command`, ignoring `out` and `workers`.
    pub fn fingerprint(&self, command: Command) -> String {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        let text = format!("command = {}\n{}", command.name(), c.format());
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

/// Splits `k=v,k=v` parameters, tracking byte offsets into the full spec.
fn params(s: &str, start: usize) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    let mut pos = start;
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(pos, format!("expected key=value, got {part:?}")))?;
        out.push((k.to_string(), v.to_string(), pos + k.len() + 1));
        pos += part.len() + 1;
    }
    Ok(out)
}

fn expect_keys(ps: &[(String, String, usize)], keys: &[&str], start: usize) -> Result<()> {
    for (k, _, at) in ps {
        if !keys.contains(&k.as_str()) {
            return Err(parse_err(at - k.len() - 1, format!("unexpected parameter {k:?}")));
        }
    }
    for key in keys {
        let count = ps.iter().filter(|(k, _, _)| k == key).count();
        if count != 1 {
            return Err(parse_err(start, format!("parameter {key:?} must appear exactly once")));
        }
    }
    Ok(())
}

fn get<'a>(ps: &'a [(String, String, usize)], key: &str) -> (&'a str, usize) {
    let (_, v, at) = ps.iter().find(|(k, _, _)| k == key).expect("checked");
    (v.as_str(), *at)
}

fn int_param(ps: &[(String, String, usize)], key: &str) -> Result<usize> {
    let (v, at) = get(ps, key);
    v.parse::<usize>()
        .map_err(|_| parse_err(at, format!("{key} must be an integer, got {v:?}")))
}

fn real(v: &str, at: usize, key: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(at, format!("{key} must be a finite real, got {v:?}")))
}

fn dim_param(ps: &[(String, String, usize)]) -> Result<usize> {
    let d = int_param(ps, "d")?;
    if d < 2 {
        return Err(parse_err(get(ps, "d").1, format!("d must be >= 2, got {d}")));
    }
    Ok(d)
}

/// Parses a body spec such as `ball:d=2,r=1` (positions in errors are byte offsets).
pub fn parse_body_spec(s: &str) -> Result<ConvexBody> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| parse_err(0, "expected <kind>:<parameters>"))?;
    let start = kind.len() + 1;
    match kind {
        "ball" => {
            let ps = params(rest, start)?;
            expect_keys(&ps, &["d", "r"], start)?;
            let d = dim_param(&ps)?;
            let (rv, at) = get(&ps, "r");
            let r = real(rv, at, "r")?;
            if !(r > 0.0) {
                return Err(parse_err(at, format!("r must be positive, got {r}")));
            }
            ConvexBody::ball(vec![0.0; d], r)
        }
        "ellipsoid" => {
            let list = rest
                .strip_prefix("axes=")
                .ok_or_else(|| parse_err(start, "expected axes=<real,...>"))?;
            let mut at = start + "axes=".len();
            let mut axes = Vec::new();
            for tok in list.split(',') {
                let a = real(tok, at, "axis")?;
                if !(a > 0.0) {
                    return Err(parse_err(at, format!("axes must be positive, got {a}")));
                }
                axes.push(a);
                at += tok.len() + 1;
            }
            if axes.len() < 2 {
                return Err(parse_err(start, "an ellipsoid needs at least 2 axes"));
            }
            ConvexBody::ellipsoid_axes(vec![0.0; axes.len()], &axes)
        }
        "box" => {
            let ps = params(rest, start)?;
            expect_keys(&ps, &["d"], start)?;
            ConvexBody::unit_cube(dim_param(&ps)?)
        }
        "simplex" => {
            let ps = params(rest, start)?;
            expect_keys(&ps, &["d"], start)?;
            ConvexBody::standard_simplex(dim_param(&ps)?)
        }
        "hpoly" => {
            let path = rest
                .strip_prefix("file=")
                .ok_or_else(|| parse_err(start, "expected file=<path>"))?;
            if path.is_empty() {
                return Err(parse_err(start + 5, "empty path"));
            }
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            parse_hpolytope(&text)
        }
        other => Err(parse_err(0, format!("unknown body kind {other:?}"))),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<i32> {
    let mut config = match &cli.flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.apply_flags(&cli.flags)?;
    run(cli.command, &config)
}

/// Runs `command` on a worker pool of the configured size.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<i32> {
    let mut resolved = config.clone();
    resolved.seed = Some(config.resolved_seed()?);
    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| dispatch(command, &resolved))
}

fn dispatch(command: Command, c: &ExperimentConfig) -> Result<i32> {
    let seed = c.seed.expect("resolved");
    let fp = c.fingerprint(command);
    let tag = |mut row: Vec<String>| {
        row.push(seed.to_string());
        row.push(fp.clone());
        row
    };
    match command {
        Command::Deficit => {
            let spec = c.body.as_deref().ok_or_else(|| Error::Config("deficit needs --body".into()))?;
            let body = parse_body_spec(spec)?;
            let ns = if !c.ns.is_empty() {
                c.ns.clone()
            } else if let Some(n) = c.n {
                vec![n]
            } else {
                return Err(Error::Config("deficit needs --ns or --n".into()));
            };
            let trials = c.trials.unwrap_or(100);
            let probes = c.probes.unwrap_or(10_000);
            let rows = convergence_table(&body, &ns, trials, probes, &StreamKey::root(seed), c.crn)?;
            let mut t = Table {
                header: str_vec(&[
                    "body_id", "d", "n", "trials", "probes", "seed", "deficit_mean", "deficit_stderr", "scaled",
                    "scaled_stderr", "predicted_limit", "fingerprint",
                ]),
                rows: Vec::new(),
            };
            for r in rows {
                let e = r.estimate;
                t.rows.push(vec![
                    spec.to_string(),
                    body.dim().to_string(),
                    e.n.to_string(),
                    e.trials.to_string(),
                    e.probes.to_string(),
                    seed.to_string(),
                    fmt_f64(e.deficit_mean),
                    fmt_f64(e.deficit_stderr),
                    fmt_f64(e.scaled),
                    fmt_f64(e.scaled_stderr),
                    fmt_f64(r.predicted_limit),
                    fp.clone(),
                ]);
            }
            emit(&t, c.out.as_deref())?;
            Ok(0)
        }
        Command::Constants => {
            let dmax = c.dmax.unwrap_or(10);
            if dmax < 2 {
                return Err(Error::Config("--dmax must be >= 2".into()));
            }
            let mut t = Table {
                header: str_vec(&["d", "c_d", "w_d_1", "asa_unit_ball", "consistency_residual", "seed", "fingerprint"]),
                rows: Vec::new(),
            };
            for d in 2..=dmax {
                let asa = d as f64 * unit_ball_volume(d);
                t.rows.push(tag(vec![
                    d.to_string(),
                    fmt_f64(c_d(d)),
                    fmt_f64(wieacker_limit(d, 1.0)),
                    fmt_f64(asa),
                    fmt_f64(theorem1_consistency(d, 1.0)),
                ]));
            }
            emit(&t, c.out.as_deref())?;
            Ok(0)
        }
        Command::Asa => {
            let spec = c.body.as_deref().ok_or_else(|| Error::Config("asa needs --body".into()))?;
            let body = parse_body_spec(spec)?;
            let d = body.dim();
            let (vol, vol_se) = body.volume_estimate();
            let asa = affine_surface_area(&body)?;
            let t = Table {
                header: str_vec(&[
                    "body_id", "d", "volume", "volume_stderr", "affine_surface_area", "c_d", "predicted_limit", "seed",
                    "fingerprint",
                ]),
                rows: vec![tag(vec![
                    spec.to_string(),
                    d.to_string(),
                    fmt_f64(vol),
                    fmt_f64(vol_se),
                    fmt_f64(asa),
                    fmt_f64(c_d(d)),
                    fmt_f64(asa / c_d(d)),
                ])],
            };
            emit(&t, c.out.as_deref())?;
            Ok(0)
        }
        Command::Cap => {
            let spec = c.body.as_deref().unwrap_or("ball:d=3,r=1");
            let body = parse_body_spec(spec)?;
            let r = match body.shape() {
                crate::Shape::Ball { radius, .. } => *radius,
                _ => return Err(Error::Config("cap needs a ball body".into())),
            };
            let d = body.dim();
            let heights: Vec<f64> = match c.delta {
                Some(h) => vec![h],
                None => (1..=40).map(|k| 0.05 * k as f64 * r).collect(),
            };
            let mut t = Table {
                header: str_vec(&[
                    "d", "r", "delta", "exact", "quadrature", "lower", "upper", "asserted", "holds", "seed", "fingerprint",
                ]),
                rows: Vec::new(),
            };
            for h in heights {
                let cap = CapGeometry::new(d, r, h)?;
                let exact = cap_volume_exact(&cap)?;
                let quad = cap_volume_quadrature(&cap)?;
                let (lo, hi) = cap_bound_values(d, r, h);
                t.rows.push(tag(vec![
                    d.to_string(),
                    fmt_f64(r),
                    fmt_f64(h),
                    fmt_f64(exact),
                    fmt_f64(quad),
                    fmt_f64(lo),
                    fmt_f64(hi),
                    (h > 0.0 && h <= r).to_string(),
                    (lo <= exact && exact <= hi).to_string(),
                ]));
            }
            emit(&t, c.out.as_deref())?;
            Ok(0)
        }
        Command::Convolution => {
            let spec = c.body.as_deref().ok_or_else(|| Error::Config("convolution needs --body".into()))?;
            let body = parse_body_spec(spec)?;
            let mut u = vec![0.0; body.dim()];
            u[0] = 1.0;
            let points = c.n.unwrap_or(21);
            let probes = c.probes.unwrap_or(100_000);
            let prof = covariogram_profile(&body, &u, points, probes, &StreamKey::root(seed))?;
            let mut t = Table {
                header: str_vec(&["body_id", "rho", "g", "g_stderr", "t_max", "seed", "fingerprint"]),
                rows: Vec::new(),
            };
            for (rho, g, se) in prof.samples {
                t.rows.push(tag(vec![spec.to_string(), fmt_f64(rho), fmt_f64(g), fmt_f64(se), fmt_f64(prof.t_max)]));
            }
            emit(&t, c.out.as_deref())?;
            Ok(0)
        }
        Command::Verify => {
            let which = c.suite.as_deref().unwrap_or("all");
            let suites: Vec<&str> = if which == "all" {
                SUITES.to_vec()
            } else {
                if !SUITES.contains(&which) {
                    return Err(Error::Config(format!("unknown suite {which:?}; expected one of {SUITES:?} or all")));
                }
                vec![which]
            };
            let params = SuiteParams {
                seed,
                ns: if c.ns.is_empty() { None } else { Some(c.ns.clone()) },
                n: c.n,
                trials: c.trials,
                probes: c.probes,
                dmax: c.dmax.unwrap_or(10),
            };
            let mut all_pass = true;
            let mut summary = Table {
                header: str_vec(&["suite", "check", "value", "bound", "pass", "seed", "fingerprint"]),
                rows: Vec::new(),
            };
            if let Some(dir) = c.out.as_deref() {
                fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{dir}: {e}")))?;
            }
            for s in suites {
                let report = run_suite(s, &params)?;
                for ch in &report.checks {
                    eprintln!("[{}] {s}: {} = {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name, fmt_f64(ch.value));
                }
                all_pass &= report.passed();
                let rows = check_rows(&report, seed, &fp);
                if let Some(dir) = c.out.as_deref() {
                    let t = Table {
                        header: summary.header.clone(),
                        rows,
                    };
                    write_table(&t, &Path::new(dir).join(format!("{s}.csv")))?;
                    if let Some(data) = &report.data {
                        let mut data = data.clone();
                        data.header.extend(str_vec(&["seed", "fingerprint"]));
                        for row in &mut data.rows {
                            row.push(seed.to_string());
                            row.push(fp.clone());
                        }
                        write_table(&data, &Path::new(dir).join(format!("{s}-data.csv")))?;
                    }
                } else {
                    summary.rows.extend(rows);
                }
            }
            if c.out.is_none() {
                emit(&summary, None)?;
            }
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn check_rows(report: &SuiteReport, seed: u64, fp: &str) -> Vec<Vec<String>> {
    report
        .checks
        .iter()
        .map(|ch| {
            vec![
                report.suite.clone(),
                ch.name.clone(),
                fmt_f64(ch.value),
                ch.bound.map(fmt_f64).unwrap_or_default(),
                ch.passed.to_string(),
                seed.to_string(),
                fp.to_string(),
            ]
        })
        .collect()
}

fn str_vec(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn write_csv<W: Write>(t: &Table, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(&t.header).map_err(io_err)?;
    for row in &t.rows {
        wr.write_record(row).map_err(io_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn write_table(t: &Table, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(t, io::BufWriter::new(f))
}

fn emit(t: &Table, out: Option<&str>) -> Result<()> {
    match out {
        Some(p) => write_table(t, Path::new(p)),
        None => write_csv(t, io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn body_spec_examples() {
        let k = parse_body_spec("ball:d=2,r=1").unwrap();
        assert_eq!(k.dim(), 2);
        assert!((k.volume() - std::f64::consts::PI).abs() < 1e-15);
        let e = parse_body_spec("ellipsoid:axes=2,1").unwrap();
        assert!((e.volume() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(parse_body_spec("box:d=3").unwrap().volume(), 1.0);
        assert!((parse_body_spec("simplex:d=3").unwrap().volume() - 1.0 / 6.0).abs() < 1e-15);
        assert!(matches!(parse_body_spec("ball:d=1,r=1"), Err(Error::Parse { position: 7, .. })));
        assert!(matches!(parse_body_spec("ball:d=2,r=x"), Err(Error::Parse { position: 11, .. })));
        assert!(matches!(parse_body_spec("ball:d=2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_body_spec("cone:d=2"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_body_spec("ellipsoid:axes=2,-1"), Err(Error::Parse { position: 17, .. })));
        assert!(matches!(parse_body_spec("hpoly:file=/nonexistent/x"), Err(Error::Io(_))));
    }

    #[test]
    fn hpoly_spec_reads_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sq.txt");
        fs::write(&p, "1 0 1\n-1 0 1\n0 1 1\n0 -1 1\ninterior 0 0\n").unwrap();
        let k = parse_body_spec(&format!("hpoly:file={}", p.display())).unwrap();
        assert!((k.volume() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn config_file_parsing() {
        let c = ExperimentConfig::parse("# run\nbody = ball:d=2,r=1\nns = 100, 1000\nseed = 7\ncrn = true\n").unwrap();
        assert_eq!(c.body.as_deref(), Some("ball:d=2,r=1"));
        assert_eq!(c.ns, vec![100, 1000]);
        assert_eq!(c.seed, Some(7));
        assert!(c.crn);
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ExperimentConfig::parse("seed").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut c = ExperimentConfig::parse("seed = 7\ntrials = 10").unwrap();
        let f = Flags {
            seed: Some(9),
            ..Flags::default()
        };
        c.apply_flags(&f).unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.trials, Some(10));
    }

    #[test]
    fn fingerprint_ignores_out_and_workers() {
        let mut a = ExperimentConfig::parse("body = box:d=2\nns = 10\nseed = 3").unwrap();
        let fa = a.fingerprint(Command::Deficit);
        a.workers = Some(16);
        a.out = Some("x.csv".into());
        assert_eq!(a.fingerprint(Command::Deficit), fa);
        a.seed = Some(4);
        assert_ne!(a.fingerprint(Command::Deficit), fa);
        assert_ne!(a.fingerprint(Command::Asa), a.fingerprint(Command::Deficit));
    }

    proptest! {
        #[test]
        fn config_round_trips(
            ns in proptest::collection::vec(1usize..1_000_000, 0..5),
            n in proptest::option::of(1usize..1000),
            trials in proptest::option::of(1usize..1000),
            seed in proptest::option::of(any::<u64>()),
            delta in proptest::option::of(1e-6f64..10.0),
            crn in any::<bool>(),
            workers in proptest::option::of(1usize..64),
        ) {
            let c = ExperimentConfig {
                body: Some("ellipsoid:axes=2,1".into()),
                ns,
                n,
                trials,
                probes: Some(500),
                seed,
                suite: Some("lemma4".into()),
                dmax: Some(10),
                delta,
                crn,
                workers,
                out: Some("out/results.csv".into()),
            };
            let text = c.format();
            let back = ExperimentConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.format(), text);
        }
    }
}
