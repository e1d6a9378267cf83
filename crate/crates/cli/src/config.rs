//! Run configuration: TOML file, command-line overrides and validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde::Deserialize;

use pdc_core::crystal::SellmeierFormula;
use pdc_core::gain::MismatchMode;
use pdc_core::stokes::FilterKind;
use pdc_core::{CompensationSpec, Crystal, CrystalConfig, FilterSpec, MapGrid, SellmeierSet, Setup};

/// Configuration or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub crystal: CrystalSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub compensation: CompensationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub preset: Option<String>,
    pub sellmeier: Option<SellmeierSection>,
    pub cut_angle_deg: Option<f64>,
    pub length_mm: Option<f64>,
    pub pump_nm: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierSection {
    /// `[a, b, c, d]` of `n² = a + b/(λ² − c) − d·λ²`, λ in µm.
    pub ordinary: [f64; 4],
    pub extraordinary: [f64; 4],
    pub band_um: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub mismatch: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub focal_mm: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    #[serde(rename = "extent_X0")]
    pub extent_x0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub kind: Option<String>,
    pub fwhm_nm: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LengthRatio {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensationSection {
    pub enabled: Option<bool>,
    pub length_ratio: Option<LengthRatio>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub formats: Option<String>,
}

/// Overrides shared by every subcommand. Each one replaces the matching
/// config-file key.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Parametric gain σ.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, value_name = "DEG")]
    pub cut_angle_deg: Option<f64>,
    #[arg(long, global = true, value_name = "MM")]
    pub length_mm: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    pub pump_nm: Option<f64>,
    #[arg(long, global = true, value_name = "MM")]
    pub focal_mm: Option<f64>,
    /// Phase-mismatch model: paraxial or exact.
    #[arg(long, global = true)]
    pub mismatch: Option<String>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    /// Grid half-width in units of X0.
    #[arg(long, global = true)]
    pub extent: Option<f64>,
    /// Filter kind: none, step or gaussian.
    #[arg(long, global = true)]
    pub filter: Option<String>,
    #[arg(long, global = true, value_name = "NM")]
    pub fwhm_nm: Option<f64>,
    /// off, optimal, or a length ratio in [0, 1].
    #[arg(long, global = true)]
    pub compensation: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv, pgm or both.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub pgm: bool,
}

/// Validated configuration ready for the core library.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub crystal: Crystal,
    pub setup: Setup,
    pub grid: MapGrid,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub preset: String,
    pub cut_angle_deg: f64,
    pub length_mm: f64,
    pub pump_nm: f64,
    pub focal_mm: f64,
}

impl Resolved {
    /// `key=value` pairs describing the run, in a fixed order.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let s = &self.setup;
        let mut m = vec![
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("crystal".into(), self.preset.clone()),
            ("cut_angle_deg".into(), self.cut_angle_deg.to_string()),
            ("length_mm".into(), self.length_mm.to_string()),
            ("pump_nm".into(), self.pump_nm.to_string()),
            ("focal_mm".into(), self.focal_mm.to_string()),
            ("sigma".into(), s.sigma.to_string()),
            ("mismatch".into(), s.mode.to_string()),
            ("filter".into(), s.filter.kind.to_string()),
        ];
        if s.filter.kind != FilterKind::None {
            m.push(("fwhm_nm".into(), (s.filter.fwhm * 1e9).to_string()));
        }
        m.push(("compensation".into(), if s.compensation.enabled { "on" } else { "off" }.into()));
        if s.compensation.enabled {
            m.push(("length_ratio".into(), s.compensation.length_ratio.to_string()));
        }
        m
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        Self::parse(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn resolve(&self, o: &Overrides) -> anyhow::Result<Resolved> {
        let c = &self.crystal;
        let preset = c.preset.clone();
        let sellmeier = match (&preset, &c.sellmeier) {
            (Some(_), Some(_)) => return usage("crystal: set either `preset` or `sellmeier`, not both"),
            (Some(p), None) if p != "BBO-default" => {
                return usage(format!("crystal.preset: unknown preset `{p}` (expected BBO-default)"))
            }
            (_, Some(s)) => {
                let f = |v: [f64; 4]| SellmeierFormula::new(v[0], v[1], v[2], v[3]);
                let band = s.band_um.unwrap_or([0.2, 3.0]);
                SellmeierSet {
                    ordinary: f(s.ordinary),
                    extraordinary: f(s.extraordinary),
                    band_um: (band[0], band[1]),
                }
            }
            _ => SellmeierSet::bbo(),
        };
        let preset = if c.sellmeier.is_some() { "custom".to_string() } else { "BBO-default".to_string() };

        let defaults = CrystalConfig::bbo_default();
        let cut_angle_deg = o.cut_angle_deg.or(c.cut_angle_deg).unwrap_or(defaults.cut_angle.to_degrees());
        let length_mm = o.length_mm.or(c.length_mm).unwrap_or(defaults.length * 1e3);
        let pump_nm = o.pump_nm.or(c.pump_nm).unwrap_or(defaults.pump_wavelength * 1e9);
        let sigma = o.sigma.or(c.sigma).unwrap_or(defaults.sigma);
        let focal_mm = o.focal_mm.or(self.detection.focal_mm).unwrap_or(100.0);

        positive("crystal.length_mm", length_mm)?;
        positive("crystal.pump_nm", pump_nm)?;
        positive("detection.focal_mm", focal_mm)?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return usage("crystal.sigma: must be finite and >= 0");
        }
        if !(cut_angle_deg > 0.0 && cut_angle_deg < 90.0) {
            return usage("crystal.cut_angle_deg: must lie in (0, 90)");
        }

        let cfg = CrystalConfig {
            sellmeier,
            cut_angle: cut_angle_deg.to_radians(),
            length: length_mm * 1e-3,
            pump_wavelength: pump_nm * 1e-9,
            sigma,
        };
        let crystal = Crystal::new(cfg, focal_mm * 1e-3).map_err(|e| UsageError(format!("crystal: {e}")))?;

        let mode = match o.mismatch.as_deref().or(self.model.mismatch.as_deref()) {
            None | Some("paraxial") => MismatchMode::Paraxial,
            Some("exact") => MismatchMode::Exact,
            Some(other) => return usage(format!("model.mismatch: unknown model `{other}` (paraxial|exact)")),
        };

        let kind: FilterKind = o
            .filter
            .as_deref()
            .or(self.filter.kind.as_deref())
            .unwrap_or("none")
            .parse()
            .map_err(|e| UsageError(format!("{e}")))?;
        let fwhm_nm = o.fwhm_nm.or(self.filter.fwhm_nm);
        let filter = match kind {
            FilterKind::None => FilterSpec::none(),
            _ => {
                let Some(w) = fwhm_nm else {
                    return usage("filter.fwhm_nm: required for step and gaussian filters");
                };
                positive("filter.fwhm_nm", w)?;
                FilterSpec { kind, fwhm: w * 1e-9 }
            }
        };

        let compensation = self.compensation_spec(o, sigma)?;

        let nx = o.nx.or(self.detection.nx).unwrap_or(128);
        let ny = o.ny.or(self.detection.ny).unwrap_or(128);
        let extent = o.extent.or(self.detection.extent_x0).unwrap_or(8.0);
        if nx == 0 || ny == 0 {
            return usage("detection.nx/ny: must be >= 1");
        }
        positive("detection.extent_X0", extent)?;

        let formats = match o.format.as_deref().or(self.output.formats.as_deref()).unwrap_or("csv") {
            "csv" => Formats { csv: true, pgm: false },
            "pgm" => Formats { csv: false, pgm: true },
            "both" => Formats { csv: true, pgm: true },
            other => return usage(format!("output.formats: unknown format `{other}` (csv|pgm|both)")),
        };
        let out_dir =
            o.out.clone().or_else(|| self.output.directory.clone()).unwrap_or_else(|| PathBuf::from("."));

        let setup = Setup::new(crystal)
            .with_sigma(sigma)
            .with_mode(mode)
            .with_filter(filter)
            .with_compensation(compensation);
        Ok(Resolved {
            crystal,
            setup,
            grid: MapGrid::new(nx, ny, extent),
            out_dir,
            formats,
            preset,
            cut_angle_deg,
            length_mm,
            pump_nm,
            focal_mm,
        })
    }

    fn compensation_spec(&self, o: &Overrides, sigma: f64) -> anyhow::Result<CompensationSpec> {
        let ratio = |r: f64| -> anyhow::Result<CompensationSpec> {
            if !(0.0..=1.0).contains(&r) {
                return usage("compensation.length_ratio: must lie in [0, 1]");
            }
            Ok(CompensationSpec::with_ratio(r))
        };
        if let Some(flag) = o.compensation.as_deref() {
            return match flag {
                "off" => Ok(CompensationSpec::disabled()),
                "optimal" => Ok(CompensationSpec::optimal(sigma)),
                s => match s.parse::<f64>() {
                    Ok(r) => ratio(r),
                    Err(_) => usage(format!("--compensation: expected off, optimal or a ratio, got `{s}`")),
                },
            };
        }
        let sec = &self.compensation;
        if !sec.enabled.unwrap_or(false) {
            return Ok(CompensationSpec::disabled());
        }
        match &sec.length_ratio {
            None => Ok(CompensationSpec::optimal(sigma)),
            Some(LengthRatio::Keyword(k)) if k == "optimal" => Ok(CompensationSpec::optimal(sigma)),
            Some(LengthRatio::Keyword(k)) => {
                usage(format!("compensation.length_ratio: expected a number or \"optimal\", got `{k}`"))
            }
            Some(LengthRatio::Value(r)) => ratio(*r),
        }
    }
}

fn positive(field: &str, v: f64) -> anyhow::Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!(UsageError(format!("{field}: must be finite and > 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let r = RunConfig::default().resolve(&Overrides::default()).unwrap();
        assert_eq!(r.setup.sigma, 2.0);
        assert_eq!(r.grid, MapGrid::new(128, 128, 8.0));
        assert!(!r.setup.compensation.enabled);
        assert_eq!(r.formats, Formats { csv: true, pgm: false });
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let err = RunConfig::parse("[filter]\nkind = \"step\"\nfwhm = 8\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fwhm"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn optimal_keyword_and_override() {
        let cfg = RunConfig::parse(
            "[crystal]\nsigma = 1.0\n[compensation]\nenabled = true\nlength_ratio = \"optimal\"\n",
        )
        .unwrap();
        let r = cfg.resolve(&Overrides::default()).unwrap();
        assert!((r.setup.compensation.length_ratio - 1f64.tanh() / 2.0).abs() < 1e-15);
        let o = Overrides { compensation: Some("0.3".into()), ..Default::default() };
        assert_eq!(cfg.resolve(&o).unwrap().setup.compensation.length_ratio, 0.3);
        let o = Overrides { compensation: Some("off".into()), ..Default::default() };
        assert!(!cfg.resolve(&o).unwrap().setup.compensation.enabled);
    }

    #[test]
    fn field_diagnostics() {
        let cfg = RunConfig::parse("[filter]\nkind = \"step\"\n").unwrap();
        let err = cfg.resolve(&Overrides::default()).unwrap_err();
        assert!(err.to_string().starts_with("filter.fwhm_nm"));
        let cfg = RunConfig::parse("[crystal]\npreset = \"KDP\"\n").unwrap();
        assert!(cfg.resolve(&Overrides::default()).unwrap_err().to_string().contains("KDP"));
    }

    #[test]
    fn custom_sellmeier() {
        let cfg = RunConfig::parse(
            "[crystal.sellmeier]\nordinary = [2.7359, 0.01878, 0.01822, 0.01354]\nextraordinary = [2.3753, 0.01224, 0.01667, 0.01516]\n",
        )
        .unwrap();
        let r = cfg.resolve(&Overrides::default()).unwrap();
        assert_eq!(r.preset, "custom");
        assert_eq!(r.crystal.cfg.sellmeier, SellmeierSet::bbo());
    }
}
