//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};

use pdc_core::fockoracle::{oracle_vs_analytic, ModePairGains, DEFAULT_N_MAX, HARD_N_MAX};
use pdc_core::gain::{MismatchMode, PairGains};
use pdc_core::pmcurves::{pm_locus, Branch};
use pdc_core::stokes::{noise_map, NoiseKind};

use crate::config::{Resolved, UsageError};
use crate::output::{fmt9, map_table, render_pgm, write_atomic, Table};

/// Result of a command that completed without error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A `--strict` check failed.
    StrictFailure,
    /// Output was written but some cells did not converge.
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Paraxial,
    Exact,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct PmCurvesArgs {
    /// Comma-separated wavelengths in nm.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub wavelengths: Vec<f64>,
    /// Mismatch model(s) to trace; defaults to the configured model.
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// Azimuth samples per curve.
    #[arg(long, default_value_t = 360)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// s2diff, s1sum, single_pixel_s2, dop, intensity, intensity_o or intensity_e.
    #[arg(long, default_value = "s2diff")]
    pub kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathChoice {
    /// Right half of the maximum-gain circle; coordinate is y/X0.
    Ring,
    /// Straight segment between --from and --to; coordinate is the arc fraction.
    Line,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long, default_value = "s2diff")]
    pub kind: String,
    #[arg(long, value_enum, default_value_t = PathChoice::Ring)]
    pub path: PathChoice,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Segment start `x,y` in units of X0.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub from: Option<Vec<f64>>,
    /// Segment end `x,y` in units of X0.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub to: Option<Vec<f64>>,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointChoice {
    /// Positive-x crossing of the two degenerate rings.
    Intersection,
    /// 0.1 X0 above the origin along the walk-off direction.
    Walkoff,
}

#[derive(Debug, Clone, Args)]
pub struct StateCheckArgs {
    /// Named mode position.
    #[arg(long, value_enum, conflicts_with = "x")]
    pub point: Option<PointChoice>,
    /// Mode position `x,y` in units of X0.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Frequency offset in units of 1/τcoh.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega: f64,
    /// Photon-number cutoff; chosen from the truncation weight when omitted.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Exit with status 1 when any residual exceeds the tolerance.
    #[arg(long)]
    pub strict: bool,
}

fn parse_kind(s: &str) -> anyhow::Result<NoiseKind> {
    s.parse().map_err(|e| UsageError(format!("--kind: {e}")).into())
}

fn modes(choice: Option<ModeChoice>, configured: MismatchMode) -> Vec<MismatchMode> {
    match choice {
        None => vec![configured],
        Some(ModeChoice::Paraxial) => vec![MismatchMode::Paraxial],
        Some(ModeChoice::Exact) => vec![MismatchMode::Exact],
        Some(ModeChoice::Both) => vec![MismatchMode::Paraxial, MismatchMode::Exact],
    }
}

/// Writes one `phi_rad,theta_ext_rad` file per wavelength, branch and model.
pub fn pm_curves(r: &Resolved, a: &PmCurvesArgs) -> anyhow::Result<(Status, Vec<PathBuf>)> {
    if a.wavelengths.is_empty() {
        return Err(UsageError("--wavelengths: at least one wavelength required".into()).into());
    }
    if a.samples == 0 {
        return Err(UsageError("--samples: must be >= 1".into()).into());
    }
    let mut written = Vec::new();
    for &nm in &a.wavelengths {
        if !(nm > 0.0 && nm.is_finite()) {
            return Err(UsageError(format!("--wavelengths: invalid wavelength {nm}")).into());
        }
        for mode in modes(a.mode, r.setup.mode) {
            for branch in [Branch::Signal, Branch::Idler] {
                let curve = pm_locus(&r.crystal, nm * 1e-9, branch, mode, a.samples)
                    .with_context(|| format!("{branch} curve at {nm} nm"))?;
                if curve.omitted > 0 {
                    eprintln!(
                        "warning: {branch} {nm} nm ({mode}): no phase-matching root at {} of {} azimuths",
                        curve.omitted, a.samples
                    );
                }
                let mut meta = r.metadata();
                meta.extend([
                    ("wavelength_nm".to_string(), nm.to_string()),
                    ("branch".into(), branch.to_string()),
                    ("model".into(), mode.to_string()),
                    ("samples".into(), a.samples.to_string()),
                    ("omitted".into(), curve.omitted.to_string()),
                ]);
                let mut t = Table::new(meta, &["phi_rad", "theta_ext_rad"]);
                t.rows = curve.samples.iter().map(|&(p, th)| vec![p, th]).collect();
                let path = r.out_dir.join(format!("pm_{nm}nm_{branch}_{mode}.csv"));
                t.write(&path)?;
                written.push(path);
            }
        }
    }
    Ok((Status::Ok, written))
}

pub fn map(r: &Resolved, a: &MapArgs) -> anyhow::Result<(Status, Vec<PathBuf>)> {
    let kind = parse_kind(&a.kind)?;
    let m = noise_map(&r.setup, kind, r.grid)?;
    let meta = r.metadata();
    let mut written = Vec::new();
    if r.formats.csv {
        let path = r.out_dir.join(format!("map_{kind}.csv"));
        map_table(&m, &meta).write(&path)?;
        written.push(path);
    }
    if r.formats.pgm {
        let path = r.out_dir.join(format!("map_{kind}.pgm"));
        write_atomic(&path, render_pgm(&m, &meta).as_bytes())?;
        written.push(path);
    }
    for f in m.failures.iter().take(5) {
        let (i, j) = m.grid.cell_of(f.index);
        eprintln!("warning: cell ({i}, {j}) failed: {}", f.error);
    }
    if m.failures.is_empty() {
        Ok((Status::Ok, written))
    } else {
        eprintln!("warning: {} cells did not converge and hold NaN", m.failures.len());
        Ok((Status::Partial, written))
    }
}

fn point2(v: &Option<Vec<f64>>, flag: &str) -> anyhow::Result<Option<[f64; 2]>> {
    match v.as_deref() {
        None => Ok(None),
        Some([x, y]) => Ok(Some([*x, *y])),
        Some(_) => Err(UsageError(format!("--{flag}: expected x,y")).into()),
    }
}

pub fn profile(r: &Resolved, a: &ProfileArgs) -> anyhow::Result<(Status, Vec<PathBuf>)> {
    let kind = parse_kind(&a.kind)?;
    if a.samples == 0 {
        return Err(UsageError("--samples: must be >= 1".into()).into());
    }
    let (samples, path_name) = match a.path {
        PathChoice::Ring => {
            if a.from.is_some() || a.to.is_some() {
                return Err(UsageError("--from/--to apply to --path line only".into()).into());
            }
            (r.setup.ring_profile(kind, a.samples)?, "ring")
        }
        PathChoice::Line => {
            let (Some(from), Some(to)) = (point2(&a.from, "from")?, point2(&a.to, "to")?) else {
                return Err(UsageError("--path line requires --from x,y and --to x,y".into()).into());
            };
            (r.setup.line_profile(kind, from, to, a.samples)?, "line")
        }
    };
    let mut meta = r.metadata();
    meta.extend([
        ("kind".to_string(), kind.to_string()),
        ("path".into(), path_name.to_string()),
        ("samples".into(), a.samples.to_string()),
    ]);
    let mut t = Table::new(meta, &["coordinate", "value", "x_over_X0", "y_over_X0"]);
    t.rows = samples.iter().map(|s| vec![s.coordinate, s.value, s.x, s.y]).collect();
    let name = a.name.clone().unwrap_or_else(|| format!("profile_{kind}_{path_name}.csv"));
    let path = r.out_dir.join(name);
    t.write(&path)?;
    Ok((Status::Ok, vec![path]))
}

/// Report produced by `state-check`.
#[derive(Debug, Clone)]
pub struct StateReport {
    pub text: String,
    pub pass: bool,
}

pub fn state_check(r: &Resolved, a: &StateCheckArgs) -> anyhow::Result<(Status, StateReport, Vec<PathBuf>)> {
    let s = &r.setup;
    let x = match (point2(&a.x, "x")?, a.point) {
        (Some(x), _) => x,
        (None, Some(PointChoice::Walkoff)) => [0.0, 0.1],
        (None, _) => s
            .intersections()
            .ok_or_else(|| UsageError("crystal: the degenerate rings do not intersect".into()))?[1],
    };
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(UsageError("--tol: must be > 0".into()).into());
    }
    let sc = &r.crystal.scales;
    let q = sc.q_from_scaled(x);
    let omega = a.omega / sc.tau_coh;
    let pair = PairGains::new(&r.crystal, q, omega, s.sigma, s.mode)?;
    let mut gains = ModePairGains::from_pair(&pair);
    if s.compensation.enabled {
        gains = gains.compensated(s.compensation.length_ratio, pair.plus.delta, pair.minus.delta);
    }
    let n_max = match a.n_max {
        Some(n) if n > HARD_N_MAX => {
            return Err(UsageError(format!("--n-max: at most {HARD_N_MAX}")).into());
        }
        Some(n) => n,
        None => gains.required_n_max(1e-8, HARD_N_MAX).unwrap_or(HARD_N_MAX).max(DEFAULT_N_MAX),
    };
    let cmp = oracle_vs_analytic(gains, n_max)?;

    let mut text = String::new();
    let _ = writeln!(text, "mode x/X0 = ({}, {}), omega*tau = {}", x[0], x[1], a.omega);
    let _ = writeln!(
        text,
        "delta(+) = {}, delta(-) = {}, sigma = {}, compensation = {}",
        fmt9(pair.plus.delta),
        fmt9(pair.minus.delta),
        s.sigma,
        if s.compensation.enabled { "on" } else { "off" }
    );
    let _ = writeln!(text, "n_max = {}, truncation weight = {}", cmp.n_max, fmt9(cmp.truncation_weight));
    let _ = writeln!(text, "{:<18} {:>16} {:>16} {:>16}", "quantity", "oracle", "analytic", "difference");
    for e in &cmp.entries {
        let _ = writeln!(
            text,
            "{:<18} {:>16} {:>16} {:>16}",
            e.name,
            fmt9(e.oracle),
            fmt9(e.analytic),
            fmt9(e.difference)
        );
    }
    let _ = writeln!(text, "{:<18} {:>16}", "res_cond1", fmt9(cmp.res_cond1));
    let _ = writeln!(text, "{:<18} {:>16}", "res_cond2", fmt9(cmp.res_cond2));
    let agree = cmp.max_difference() < a.tol;
    let symmetric = cmp.res_cond1 < a.tol && cmp.res_cond2 < a.tol;
    let pass = agree && symmetric;
    let _ = writeln!(text, "oracle agreement: {}", if agree { "PASS" } else { "FAIL" });
    let _ = writeln!(text, "pair symmetry: {}", if symmetric { "PASS" } else { "FAIL" });

    let mut meta = r.metadata();
    meta.extend([
        ("x_over_X0".to_string(), x[0].to_string()),
        ("y_over_X0".into(), x[1].to_string()),
        ("omega_tau".into(), a.omega.to_string()),
        ("n_max".into(), cmp.n_max.to_string()),
        ("truncation_weight".into(), fmt9(cmp.truncation_weight)),
        ("res_cond1".into(), fmt9(cmp.res_cond1)),
        ("res_cond2".into(), fmt9(cmp.res_cond2)),
    ]);
    let mut t = Table::new(meta, &["index", "oracle", "analytic", "difference"]);
    for (i, e) in cmp.entries.iter().enumerate() {
        t.meta.push((format!("quantity_{i}"), e.name.to_string()));
        t.rows.push(vec![i as f64, e.oracle, e.analytic, e.difference]);
    }
    let path = r.out_dir.join("state_check.csv");
    t.write(&path)?;
    let status = if a.strict && !pass { Status::StrictFailure } else { Status::Ok };
    Ok((status, StateReport { text, pass }, vec![path]))
}
