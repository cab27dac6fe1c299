//! Scan configuration: JSON in, validated, hashed for the result cache.

use crate::profile::{reference_config, ProfileRep, ShockSetup};
use crate::thermo::GasModel;
use crate::turning::RegimeOptions;
use crate::{c64, Error, Result, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Rectangle in the ζ-plane sampled on an `n_re × n_im` lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaBox {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub n_re: usize,
    pub n_im: usize,
    /// Read `im` in units of |ζ₀| of the configured profile.
    #[serde(default)]
    pub im_in_zeta0_units: bool,
}

/// Large-|ζ| samples on rays `|ζ| e^{i arg}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rays {
    pub radii: Vec<f64>,
    pub args: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaGrid {
    #[serde(rename = "box")]
    pub zbox: ZetaBox,
    /// Add the denser band around the turning-point frequencies.
    #[serde(default = "yes")]
    pub refinement: bool,
    #[serde(default)]
    pub rays: Option<Rays>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// `None` uses the profile default.
    #[serde(default)]
    pub x_max: Option<f64>,
    pub rtol: f64,
    pub k: f64,
    pub delta: f64,
    pub r_omega: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let r = RegimeOptions::default();
        Numerics { x_max: None, rtol: 1e-10, k: r.k, delta: r.delta, r_omega: r.r_omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { directory: PathBuf::from("znd-out"), formats: vec![Format::Csv, Format::Json, Format::Svg] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub gas: GasModel,
    pub shock: ShockSetup,
    pub zeta_grid: ZetaGrid,
    pub h_list: Vec<f64>,
    pub numerics: Numerics,
    pub outputs: Outputs,
}

impl Default for ScanConfig {
    /// The reference type-D desk-scale scan.
    fn default() -> Self {
        let (gas, shock) = reference_config();
        ScanConfig {
            gas,
            shock,
            zeta_grid: ZetaGrid {
                zbox: ZetaBox { re: [0.0, 2.0], im: [-2.0, 2.0], n_re: 41, n_im: 41, im_in_zeta0_units: true },
                refinement: true,
                rays: None,
            },
            h_list: vec![0.05, 0.02, 0.01],
            numerics: Numerics::default(),
            outputs: Outputs::default(),
        }
    }
}

/// Where a grid point came from; the SVG heat maps use the box part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPart {
    Box { i_re: usize, i_im: usize },
    Band,
    Ray,
}

impl ScanConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScanConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.gas.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.h_list.is_empty() {
            return bad("h_list is empty".into());
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h <= 1.0)) {
            return bad(format!("h_list {:?} must lie in (0, 1]", self.h_list));
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("h_list {:?} must be strictly decreasing", self.h_list));
        }
        let b = &self.zeta_grid.zbox;
        if b.n_re == 0 || b.n_im == 0 {
            return bad("zeta box has an empty lattice".into());
        }
        if !(b.re[0] <= b.re[1] && b.im[0] <= b.im[1]) || b.re.iter().chain(&b.im).any(|v| !v.is_finite()) {
            return bad(format!("zeta box {:?}×{:?} is not a rectangle", b.re, b.im));
        }
        if b.re[0] < 0.0 {
            return bad(format!("zeta box reaches Re ζ = {} < 0", b.re[0]));
        }
        if (b.n_re == 1 && b.re[0] != b.re[1]) || (b.n_im == 1 && b.im[0] != b.im[1]) {
            return bad("a single-point lattice needs a degenerate interval".into());
        }
        if let Some(r) = &self.zeta_grid.rays {
            if r.radii.is_empty() || r.args.is_empty() {
                return bad("rays need at least one radius and one argument".into());
            }
            if r.radii.iter().any(|&v| !(v > 0.0)) || r.args.iter().any(|a| a.abs() > std::f64::consts::FRAC_PI_2) {
                return bad("rays must have positive radii and |arg| ≤ π/2".into());
            }
        }
        let n = &self.numerics;
        if !(n.rtol > 0.0 && n.rtol < 1e-3) || !(n.k > 0.0) || !(n.delta > 0.0) || !(n.r_omega > 0.0) {
            return bad("numerics out of range".into());
        }
        if let Some(x) = n.x_max {
            if !(x > 0.0) {
                return bad(format!("x_max = {x} must be positive"));
            }
        }
        if self.outputs.formats.is_empty() {
            return bad("no output format selected".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON (keys sorted, shortest round-trip floats).
    pub fn content_hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn regime_options(&self) -> RegimeOptions {
        RegimeOptions { k: self.numerics.k, delta: self.numerics.delta, r_omega: self.numerics.r_omega }
    }

    /// ζ-grid in fixed order: box row by row (Re fastest), then the band,
    /// then the rays.
    pub fn grid(&self, rep: &ProfileRep) -> Vec<(C64, GridPart)> {
        let b = &self.zeta_grid.zbox;
        let scale = if b.im_in_zeta0_units { rep.zeta0_abs() } else { 1.0 };
        let lin = |lo: f64, hi: f64, n: usize, i: usize| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        let mut out = Vec::new();
        for i_im in 0..b.n_im {
            for i_re in 0..b.n_re {
                let z = c64(lin(b.re[0], b.re[1], b.n_re, i_re), scale * lin(b.im[0], b.im[1], b.n_im, i_im));
                out.push((z, GridPart::Box { i_re, i_im }));
            }
        }
        if self.zeta_grid.refinement {
            // Five times the box density over |Re ζ| ≤ 0.05 and
            // Im ζ ∈ [|ζ∞| − 0.1, |ζ₀| + 0.1], plus the endpoints themselves.
            let dre = if b.n_re > 1 { (b.re[1] - b.re[0]) / (b.n_re - 1) as f64 / 5.0 } else { 0.01 };
            let dim = if b.n_im > 1 { scale * (b.im[1] - b.im[0]) / (b.n_im - 1) as f64 / 5.0 } else { 0.02 };
            let (lo, hi) = (rep.zeta_inf_abs() - 0.1, rep.zeta0_abs() + 0.1);
            let n_re = (0.05 / dre).floor() as usize + 1;
            let n_im = ((hi - lo) / dim).ceil() as usize + 1;
            for i_im in 0..n_im {
                for i_re in 0..n_re {
                    out.push((c64(i_re as f64 * dre, lin(lo, hi, n_im, i_im)), GridPart::Band));
                }
            }
            out.push((c64(0.0, rep.zeta0_abs()), GridPart::Band));
            out.push((c64(0.0, rep.zeta_inf_abs()), GridPart::Band));
        }
        if let Some(r) = &self.zeta_grid.rays {
            for &rad in &r.radii {
                for &a in &r.args {
                    out.push((C64::from_polar(rad, a), GridPart::Ray));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_valid_and_round_trips() {
        let cfg = ScanConfig::default();
        cfg.validate().unwrap();
        let back = ScanConfig::from_json(&serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.content_hash(), cfg.content_hash());
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ScanConfig::default();
        let mut edits: Vec<ScanConfig> = Vec::new();
        let mut c = base.clone();
        c.gas.e_act += 1e-12;
        edits.push(c);
        let mut c = base.clone();
        c.h_list[2] = 0.011;
        edits.push(c);
        let mut c = base.clone();
        c.zeta_grid.zbox.n_re = 40;
        edits.push(c);
        let mut c = base.clone();
        c.numerics.k = 9.0;
        edits.push(c);
        let mut c = base.clone();
        c.outputs.formats.pop();
        edits.push(c);
        let mut c = base.clone();
        c.zeta_grid.refinement = false;
        edits.push(c);
        for e in edits {
            assert_ne!(e.content_hash(), base.content_hash());
        }
    }

    #[test]
    fn validation_errors() {
        let mut c = ScanConfig::default();
        c.h_list.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ScanConfig::default();
        c.h_list = vec![0.01, 0.02];
        assert!(c.validate().is_err());
        let mut c = ScanConfig::default();
        c.zeta_grid.zbox.re = [-0.1, 1.0];
        assert!(c.validate().is_err());
        assert!(ScanConfig::from_json("{\"h_list\": 3}").is_err());
    }

    #[test]
    fn partial_json_falls_back_to_reference() {
        let c = ScanConfig::from_json("{\"h_list\": [0.1]}").unwrap();
        assert_eq!(c.h_list, vec![0.1]);
        assert_eq!(c.gas, ScanConfig::default().gas);
    }
}
