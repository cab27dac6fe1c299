//! Parameter sweep over (ζ, h) with a content-addressed result cache.

use super::config::{GridPart, ScanConfig};
use crate::evans::{evans, EvansOptions};
use crate::linsys::{class_ranges, classify_with, ClassInfo, FreqClass};
use crate::profile::{ProfileRep, ProfileType};
use crate::turning::{regime_classify_infinity, Regime};
use crate::{Error, Result, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub zeta: C64,
    pub h: f64,
    pub class: String,
    pub regime: Option<Regime>,
    pub v: Option<C64>,
    pub abs_v: Option<f64>,
    pub l1: Option<C64>,
    pub theta1_residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl ScanRecord {
    pub fn failed(&self) -> bool {
        self.v.is_none()
    }
}

pub fn class_label(c: &ClassInfo) -> &'static str {
    match (c.class, c.plus) {
        (FreqClass::I, _) => "I",
        (FreqClass::II, _) => "II",
        (FreqClass::III, true) => "III+",
        (FreqClass::III, false) => "III-",
    }
}

/// Per-h line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSummary {
    pub h: f64,
    pub points: usize,
    pub failures: usize,
    pub min_abs_v: f64,
    pub argmin_abs_v: C64,
    pub max_residual: f64,
    pub argmax_residual: C64,
    /// max residual below the previous (larger) h's; `None` for the first h.
    pub residual_decreased: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub config_hash: String,
    pub cache_hit: bool,
    pub profile_type: ProfileType,
    pub warnings: Vec<String>,
    pub per_h: Vec<HSummary>,
    /// min |V| > 0 at every point and max residual decreasing in h.
    pub all_nonzero: bool,
    pub monotone: bool,
}

impl ScanSummary {
    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("config {}  profile {:?}{}\n", &self.config_hash[..16], self.profile_type, if self.cache_hit { "  (cache)" } else { "" }));
        for w in &self.warnings {
            s.push_str(&format!("WARNING: {w}\n"));
        }
        s.push_str(&format!(
            "{:>8} {:>7} {:>6} {:>12} {:>24} {:>12} {:>24} {:>9}\n",
            "h", "points", "failed", "min|V|", "at ζ", "max resid", "at ζ", "decreased"
        ));
        for r in &self.per_h {
            let dec = match r.residual_decreased {
                None => "-",
                Some(true) => "yes",
                Some(false) => "NO",
            };
            s.push_str(&format!(
                "{:>8} {:>7} {:>6} {:>12.4e} {:>24} {:>12.4e} {:>24} {:>9}\n",
                r.h,
                r.points,
                r.failures,
                r.min_abs_v,
                fmt_zeta(r.argmin_abs_v),
                r.max_residual,
                fmt_zeta(r.argmax_residual),
                dec
            ));
        }
        s.push_str(&format!("min|V| > 0 everywhere: {}; max residual decreasing in h: {}\n", self.all_nonzero, self.monotone));
        s
    }
}

fn fmt_zeta(z: C64) -> String {
    format!("{:.4}{:+.4}i", z.re, z.im)
}

/// Evaluate one grid point. Failures become warnings on the record.
pub fn scan_point(rep: &ProfileRep, cfg: &ScanConfig, class: ClassInfo, zeta: C64, h: f64) -> ScanRecord {
    let opts = EvansOptions { x_max: cfg.numerics.x_max, rtol: cfg.numerics.rtol, ..EvansOptions::default() };
    let regime = regime_classify_infinity(rep, zeta, h, &cfg.regime_options()).ok().map(|r| r.regime);
    let mut rec = ScanRecord {
        zeta,
        h,
        class: class_label(&class).to_string(),
        regime,
        v: None,
        abs_v: None,
        l1: None,
        theta1_residual: None,
        warnings: Vec::new(),
    };
    match evans(rep, zeta, h, &opts) {
        Ok(r) => {
            rec.v = Some(r.v);
            rec.abs_v = Some(r.v.norm());
            rec.l1 = Some(r.l1);
            rec.theta1_residual = Some(r.theta1_residual);
            if r.diagnostics.turning_warning {
                rec.warnings.push("gauge passed close to a turning point".into());
            }
            if r.diagnostics.jordan_fallback {
                rec.warnings.push("explicit eigenvector at infinity without refinement".into());
            }
        }
        Err(e) => rec.warnings.push(e.to_string()),
    }
    rec
}

/// Records in grid-index order: h outer (config order), ζ inner.
pub fn compute_records(rep: &ProfileRep, cfg: &ScanConfig, grid: &[(C64, GridPart)]) -> Vec<ScanRecord> {
    let ranges = class_ranges(rep);
    let jobs: Vec<(C64, f64)> = cfg.h_list.iter().flat_map(|&h| grid.iter().map(move |&(z, _)| (z, h))).collect();
    jobs.par_iter().map(|&(z, h)| scan_point(rep, cfg, classify_with(&ranges, rep, z), z, h)).collect()
}

pub fn summarize(cfg: &ScanConfig, records: &[ScanRecord], profile_type: ProfileType, cache_hit: bool) -> ScanSummary {
    let mut per_h = Vec::new();
    let mut prev: Option<f64> = None;
    for &h in &cfg.h_list {
        let recs: Vec<&ScanRecord> = records.iter().filter(|r| r.h == h).collect();
        let mut s = HSummary {
            h,
            points: recs.len(),
            failures: recs.iter().filter(|r| r.failed()).count(),
            min_abs_v: f64::INFINITY,
            argmin_abs_v: C64::new(f64::NAN, f64::NAN),
            max_residual: 0.0,
            argmax_residual: C64::new(f64::NAN, f64::NAN),
            residual_decreased: None,
        };
        for r in &recs {
            if let (Some(a), Some(res)) = (r.abs_v, r.theta1_residual) {
                if a < s.min_abs_v {
                    s.min_abs_v = a;
                    s.argmin_abs_v = r.zeta;
                }
                if res > s.max_residual {
                    s.max_residual = res;
                    s.argmax_residual = r.zeta;
                }
            }
        }
        s.residual_decreased = prev.map(|p| s.max_residual < p);
        prev = Some(s.max_residual);
        per_h.push(s);
    }
    let mut warnings = Vec::new();
    if profile_type != ProfileType::TypeD {
        warnings.push(format!("profile is {profile_type:?}, not type D; the high-frequency result does not apply"));
    }
    let failures: usize = per_h.iter().map(|s| s.failures).sum();
    if failures > 0 {
        warnings.push(format!("{failures} grid points failed; see the records' warnings"));
    }
    let all_nonzero = failures == 0 && per_h.iter().all(|s| s.min_abs_v > 0.0);
    let monotone = per_h.iter().all(|s| s.residual_decreased != Some(false));
    ScanSummary { config_hash: cfg.content_hash(), cache_hit, profile_type, warnings, per_h, all_nonzero, monotone }
}

pub fn cache_path(dir: &Path, hash: &str) -> PathBuf {
    dir.join("cache").join(format!("{hash}.json"))
}

pub struct ScanOutput {
    pub summary: ScanSummary,
    pub records: Vec<ScanRecord>,
    pub grid: Vec<(C64, GridPart)>,
}

/// Validate, build the profile, then read the records from the cache or
/// compute and store them.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    let rep = ProfileRep::build(&cfg.gas, &cfg.shock)?;
    let grid = cfg.grid(&rep);
    let hash = cfg.content_hash();
    let path = cache_path(&cfg.outputs.directory, &hash);
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", path.display()));
    let cached = std::fs::read_to_string(&path).ok().and_then(|t| serde_json::from_str::<Vec<ScanRecord>>(&t).ok());
    let (records, hit) = match cached {
        Some(r) if r.len() == grid.len() * cfg.h_list.len() => (r, true),
        _ => {
            let r = compute_records(&rep, cfg, &grid);
            std::fs::create_dir_all(path.parent().unwrap()).map_err(io)?;
            let text = serde_json::to_string(&r).map_err(|e| Error::Config(e.to_string()))?;
            std::fs::write(&path, text).map_err(io)?;
            (r, false)
        }
    };
    let summary = summarize(cfg, &records, rep.type_classify().kind, hit);
    Ok(ScanOutput { summary, records, grid })
}
