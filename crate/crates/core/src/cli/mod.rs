//! Command-line front end: `znd <subcommand>`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure in a
//! non-sweep command. Sweep points that fail are recorded, not fatal.

pub mod config;
pub mod emit;
pub mod scan;

use crate::evans::{evans, EvansOptions};
use crate::linsys::matrices_at;
use crate::profile::{ProfileRep, XCoord};
use crate::specfun::model_ode_check;
use crate::turning::regime_row;
use crate::{c64, Error, Result, C64};
use clap::{Parser, Subcommand};
use config::{Format, ScanConfig};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "znd", version, about = "High-frequency stability of ZND detonations via the Evans function")]
pub struct Cli {
    /// JSON scan configuration; missing fields take the reference values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `scan`.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output format(s); `svg` is only produced by `scan`.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady profile summary and samples along x.
    Profile {
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Coefficient matrices and Φ₀, Φ₁ at one point.
    Matrices {
        /// ζ as `re,im`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        zeta: Vec<f64>,
        /// Position x, or `inf`.
        #[arg(long, default_value = "0")]
        x: String,
    },
    /// Decaying solution, V(ζ, h), L₁(ζ) and the residual at one (ζ, h).
    Evans {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        zeta: Vec<f64>,
        #[arg(long)]
        h: f64,
    },
    /// Frequency class, regime near ζ∞ and turning point over the scan grid.
    Regimes,
    /// Sweep the configured (ζ, h) grid.
    Scan,
    /// Model Bessel problem: closed form against direct integration.
    ModelCheck,
}

fn parse_zeta(v: &[f64]) -> Result<C64> {
    match v {
        [re, im] => Ok(c64(*re, *im)),
        _ => Err(Error::Config(format!("--zeta needs two numbers re,im, got {v:?}"))),
    }
}

fn load_config(cli: &Cli) -> Result<ScanConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScanConfig::from_path(p)?,
        None => ScanConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.outputs.directory = o.clone();
    }
    if !cli.format.is_empty() {
        cfg.outputs.formats = cli.format.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Format for single-result commands: the first of csv/json requested,
/// JSON by default.
fn single_format(cli: &Cli) -> Result<Format> {
    match cli.format.first() {
        None | Some(Format::Json) => Ok(Format::Json),
        Some(Format::Csv) => Ok(Format::Csv),
        Some(Format::Svg) => Err(Error::Config("svg output is only produced by `scan`".into())),
    }
}

/// Print to stdout, or write `<out>/<name>` when --out is given.
fn deliver(cli: &Cli, name: &str, text: &str) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn rows_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?).expect("utf-8"))
}

#[derive(Serialize)]
struct ProfileSummary {
    det_speed: f64,
    d_cj: f64,
    mu: f64,
    big_lambda: f64,
    zeta0_abs: f64,
    zeta_inf_abs: f64,
    kind: crate::profile::ProfileType,
    samples: Vec<ProfileSample>,
}

#[derive(Serialize)]
struct ProfileSample {
    x: f64,
    lambda: f64,
    v: f64,
    u: f64,
    p: f64,
    t: f64,
    c0sq_eta: f64,
}

fn cmd_profile(cli: &Cli, cfg: &ScanConfig, samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Config("--samples must be at least 2".into()));
    }
    let rep = ProfileRep::build(&cfg.gas, &cfg.shock)?;
    let x_max = cfg.numerics.x_max.unwrap_or_else(|| rep.x_max_default());
    let pts = (0..samples)
        .map(|j| {
            let x = x_max * j as f64 / (samples - 1) as f64;
            let p = rep.state_at_x(x)?;
            Ok(ProfileSample { x, lambda: p.lambda, v: p.v, u: p.u, p: p.p, t: p.t, c0sq_eta: p.c0sq_eta() })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = ProfileSummary {
        det_speed: rep.det_speed,
        d_cj: rep.d_cj,
        mu: rep.mu,
        big_lambda: rep.big_lambda,
        zeta0_abs: rep.zeta0_abs(),
        zeta_inf_abs: rep.zeta_inf_abs(),
        kind: rep.type_classify().kind,
        samples: pts,
    };
    match single_format(cli)? {
        Format::Json => deliver(cli, "profile.json", &to_json(&s)),
        _ => {
            let rows: Vec<Vec<String>> = s
                .samples
                .iter()
                .map(|p| [p.x, p.lambda, p.v, p.u, p.p, p.t, p.c0sq_eta].iter().map(|v| v.to_string()).collect())
                .collect();
            deliver(cli, "profile.csv", &rows_csv(&["x", "lambda", "v", "u", "p", "T", "c0sq_eta"], &rows)?)
        }
    }
}

fn cmd_matrices(cli: &Cli, cfg: &ScanConfig, zeta: C64, x: &str) -> Result<()> {
    let rep = ProfileRep::build(&cfg.gas, &cfg.shock)?;
    let xc = match x {
        "inf" | "infinity" => XCoord::Infinity,
        s => XCoord::Finite(s.parse().map_err(|_| Error::Config(format!("--x {s}: not a number or `inf`")))?),
    };
    let m = matrices_at(&rep, xc, zeta)?;
    let real = |a: &crate::linsys::RMat5| -> Vec<Vec<C64>> { (0..5).map(|i| (0..5).map(|j| C64::from(a[(i, j)])).collect()).collect() };
    let cplx = |a: &crate::linsys::CMat5| -> Vec<Vec<C64>> { (0..5).map(|i| (0..5).map(|j| a[(i, j)]).collect()).collect() };
    let named = [("a_x", real(&m.a_x)), ("a_y", real(&m.a_y)), ("b", real(&m.b)), ("phi0", cplx(&m.phi0)), ("phi1", real(&m.phi1))];
    match single_format(cli)? {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                named.iter().map(|(k, v)| (k.to_string(), serde_json::to_value(v).expect("matrix"))).collect();
            deliver(cli, "matrices.json", &(serde_json::to_string_pretty(&map).expect("json") + "\n"))
        }
        _ => {
            let mut rows = Vec::new();
            for (name, a) in &named {
                for (i, row) in a.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        rows.push(vec![name.to_string(), i.to_string(), j.to_string(), v.re.to_string(), v.im.to_string()]);
                    }
                }
            }
            deliver(cli, "matrices.csv", &rows_csv(&["matrix", "row", "col", "re", "im"], &rows)?)
        }
    }
}

fn cmd_evans(cli: &Cli, cfg: &ScanConfig, zeta: C64, h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("--h {h} must be positive")));
    }
    let rep = ProfileRep::build(&cfg.gas, &cfg.shock)?;
    let opts = EvansOptions { x_max: cfg.numerics.x_max, rtol: cfg.numerics.rtol, ..EvansOptions::default() };
    let r = evans(&rep, zeta, h, &opts)?;
    match single_format(cli)? {
        Format::Json => deliver(cli, "evans.json", &to_json(&r)),
        _ => {
            let row = vec![zeta.re, zeta.im, h, r.v.re, r.v.im, r.v.norm(), r.l1.norm(), r.theta1_residual]
                .iter()
                .map(|v| v.to_string())
                .collect();
            deliver(cli, "evans.csv", &rows_csv(&["zeta_re", "zeta_im", "h", "V_re", "V_im", "abs_V", "abs_L1", "theta1_residual"], &[row])?)
        }
    }
}

fn cmd_regimes(cli: &Cli, cfg: &ScanConfig) -> Result<()> {
    let rep = ProfileRep::build(&cfg.gas, &cfg.shock)?;
    let opts = cfg.regime_options();
    let grid = cfg.grid(&rep);
    let mut rows = Vec::new();
    for &h in &cfg.h_list {
        for &(z, _) in &grid {
            let r = regime_row(&rep, z, h, &opts);
            let x_tp = match (r.x_tp, r.at_infinity) {
                (Some(x), _) => x.to_string(),
                (None, true) => "inf".to_string(),
                (None, false) => String::new(),
            };
            rows.push(vec![
                z.re.to_string(),
                z.im.to_string(),
                h.to_string(),
                scan::class_label(&r.class).to_string(),
                r.regime.map(|g| format!("{g:?}")).unwrap_or_default(),
                x_tp,
            ]);
        }
    }
    let header = ["zeta_re", "zeta_im", "h", "class", "regime", "x_tp"];
    match cli.format.first() {
        Some(Format::Json) => {
            let objs: Vec<serde_json::Value> =
                rows.iter().map(|r| serde_json::Value::Object(header.iter().zip(r).map(|(k, v)| (k.to_string(), v.clone().into())).collect())).collect();
            deliver(cli, "regimes.json", &to_json(&objs))
        }
        Some(Format::Svg) => Err(Error::Config("svg output is only produced by `scan`".into())),
        _ => deliver(cli, "regimes.csv", &rows_csv(&header, &rows)?),
    }
}

fn cmd_scan(cli: &Cli, cfg: &ScanConfig) -> Result<()> {
    let run = || scan::run_scan(cfg);
    let out = match cli.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("--jobs {n}: {e}")))?;
            pool.install(run)?
        }
        None => run()?,
    };
    let files = emit::emit(&cfg.outputs.directory, &out.records, &out.grid, &out.summary, &cfg.outputs.formats)?;
    print!("{}", out.summary.table());
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct ModelRow {
    alpha: C64,
    h: f64,
    max_rel_err: f64,
    pass: bool,
}

fn cmd_model_check(cli: &Cli) -> Result<()> {
    let cases = [(c64(0.0, 0.0), 0.1), (c64(0.0, 0.3), 0.1), (c64(0.2, 0.1), 0.05)];
    let mut rows = Vec::new();
    for (a, h) in cases {
        let c = model_ode_check(a, h, 5.0, 201)?;
        rows.push(ModelRow { alpha: a, h, max_rel_err: c.max_rel_err_i, pass: c.max_rel_err_i < 1e-6 });
    }
    match single_format(cli)? {
        Format::Json => deliver(cli, "model_check.json", &to_json(&rows))?,
        _ => {
            let r: Vec<Vec<String>> = rows
                .iter()
                .map(|m| vec![m.alpha.re.to_string(), m.alpha.im.to_string(), m.h.to_string(), m.max_rel_err.to_string(), m.pass.to_string()])
                .collect();
            deliver(cli, "model_check.csv", &rows_csv(&["alpha_re", "alpha_im", "h", "max_rel_err", "pass"], &r)?)?
        }
    }
    if rows.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Error::Numerical("model problem closed form and integration disagree beyond 1e-6".into()))
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = || load_config(cli);
    match &cli.command {
        Command::Profile { samples } => cmd_profile(cli, &cfg()?, *samples),
        Command::Matrices { zeta, x } => cmd_matrices(cli, &cfg()?, parse_zeta(zeta)?, x),
        Command::Evans { zeta, h } => cmd_evans(cli, &cfg()?, parse_zeta(zeta)?, *h),
        Command::Regimes => cmd_regimes(cli, &cfg()?),
        Command::Scan => cmd_scan(cli, &cfg()?),
        Command::ModelCheck => cmd_model_check(cli),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
