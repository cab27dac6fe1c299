//! CSV, JSON and SVG output of scan records.

use super::config::{Format, GridPart};
use super::scan::{ScanRecord, ScanSummary};
use crate::{Error, Result, C64};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: [&str; 10] =
    ["zeta_re", "zeta_im", "h", "class", "regime", "V_re", "V_im", "abs_V", "abs_L1", "theta1_residual"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn records_csv(records: &[ScanRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.zeta.re.to_string(),
            r.zeta.im.to_string(),
            r.h.to_string(),
            r.class.clone(),
            r.regime.map(|g| format!("{g:?}")).unwrap_or_default(),
            opt(r.v.map(|v| v.re)),
            opt(r.v.map(|v| v.im)),
            opt(r.abs_v),
            opt(r.l1.map(|l| l.norm())),
            opt(r.theta1_residual),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn records_json(records: &[ScanRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Config(format!("json: {e}")))
}

/// Blue-to-yellow ramp for t ∈ [0, 1].
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let c = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const CELL: f64 = 6.0;

fn heat_map(out: &mut String, x0: f64, y0: f64, title: &str, n_re: usize, n_im: usize, cells: &[(usize, usize, Option<f64>)]) {
    let vals: Vec<f64> = cells.iter().filter_map(|c| c.2).filter(|v| v.is_finite()).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let _ = writeln!(out, r#"<g transform="translate({x0},{y0})">"#);
    let _ = writeln!(out, r#"<text x="0" y="-6" font-size="11">{}</text>"#, esc(title));
    for &(i, j, v) in cells {
        // Im ζ grows upward.
        let y = (n_im - 1 - j) as f64 * CELL;
        let fill = match v {
            Some(v) if v.is_finite() => ramp((v - lo) / span),
            _ => "#999999".to_string(),
        };
        let _ = writeln!(out, r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#, i as f64 * CELL);
    }
    let h = n_im as f64 * CELL;
    let _ = writeln!(out, r#"<text x="0" y="{}" font-size="9">log10 range [{lo:.2}, {hi:.2}]; Re ζ →, Im ζ ↑</text>"#, h + 12.0);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{h}" fill="none" stroke="black"/>"#, n_re as f64 * CELL);
    let _ = writeln!(out, "</g>");
}

/// |V| and residual heat maps over the ζ box for each h, then the
/// residual-versus-h lines on log-log axes.
pub fn records_svg(records: &[ScanRecord], grid: &[(C64, GridPart)], summary: &ScanSummary) -> String {
    let (mut n_re, mut n_im) = (0, 0);
    for (_, p) in grid {
        if let GridPart::Box { i_re, i_im } = *p {
            n_re = n_re.max(i_re + 1);
            n_im = n_im.max(i_im + 1);
        }
    }
    let hs: Vec<f64> = summary.per_h.iter().map(|s| s.h).collect();
    let map_w = n_re as f64 * CELL + 40.0;
    let map_h = n_im as f64 * CELL + 50.0;
    let plot_h = 260.0;
    let width = (2.0 * map_w + 40.0).max(420.0);
    let height = hs.len() as f64 * map_h + plot_h + 60.0;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let n = grid.len();
    for (k, &h) in hs.iter().enumerate() {
        let recs = &records[k * n..(k + 1) * n];
        let mut vcells = Vec::new();
        let mut rcells = Vec::new();
        for ((_, p), r) in grid.iter().zip(recs) {
            if let GridPart::Box { i_re, i_im } = *p {
                vcells.push((i_re, i_im, r.abs_v.map(f64::log10)));
                rcells.push((i_re, i_im, r.theta1_residual.map(f64::log10)));
            }
        }
        let y0 = 30.0 + k as f64 * map_h;
        heat_map(&mut out, 20.0, y0, &format!("log10 |V|, h = {h}"), n_re, n_im, &vcells);
        heat_map(&mut out, 20.0 + map_w, y0, &format!("log10 residual, h = {h}"), n_re, n_im, &rcells);
    }
    // Log-log residual lines: max and median over the whole grid.
    let y0 = 30.0 + hs.len() as f64 * map_h;
    let (pw, ph) = (width - 80.0, plot_h - 60.0);
    let mut lines: Vec<(&str, &str, Vec<(f64, f64)>)> = vec![("max", "#c0392b", Vec::new()), ("median", "#2c7fb8", Vec::new())];
    for (k, &h) in hs.iter().enumerate() {
        let mut res: Vec<f64> = records[k * n..(k + 1) * n].iter().filter_map(|r| r.theta1_residual).filter(|v| *v > 0.0).collect();
        if res.is_empty() {
            continue;
        }
        res.sort_by(f64::total_cmp);
        lines[0].2.push((h.log10(), res[res.len() - 1].log10()));
        lines[1].2.push((h.log10(), res[res.len() / 2].log10()));
    }
    let pts: Vec<(f64, f64)> = lines.iter().flat_map(|l| l.2.iter().copied()).collect();
    let _ = writeln!(out, r#"<g transform="translate(50,{y0})">"#);
    let _ = writeln!(out, r#"<text x="0" y="-6" font-size="11">theta1 residual vs h (log-log)</text>"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    if !pts.is_empty() {
        let (xl, xh) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (yl, yh) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        let sx = |x: f64| if xh > xl { (x - xl) / (xh - xl) * pw } else { pw / 2.0 };
        let sy = |y: f64| if yh > yl { ph - (y - yl) / (yh - yl) * ph } else { ph / 2.0 };
        for (k, (name, color, l)) in lines.iter().enumerate() {
            let path: Vec<String> = l.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
            for &(x, y) in l {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10" fill="{color}">{name}</text>"#, pw - 60.0, 14.0 + 12.0 * k as f64);
        }
        let _ = writeln!(out, r#"<text x="0" y="{}" font-size="9">log10 h ∈ [{xl:.2}, {xh:.2}], log10 residual ∈ [{yl:.2}, {yh:.2}]</text>"#, ph + 14.0);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

/// Write the records in each format; returns the files written.
pub fn emit(
    dir: &Path,
    records: &[ScanRecord],
    grid: &[(C64, GridPart)],
    summary: &ScanSummary,
    formats: &[Format],
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Config("no records to emit".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        written.push(p);
        Ok(())
    };
    for f in formats {
        match f {
            Format::Csv => put("records.csv", records_csv(records)?)?,
            Format::Json => put("records.json", records_json(records)?)?,
            Format::Svg => put("scan.svg", records_svg(records, grid, summary))?,
        }
    }
    put("summary.json", serde_json::to_string_pretty(summary).map_err(|e| Error::Config(e.to_string()))?)?;
    put("summary.txt", summary.table())?;
    Ok(written)
}
