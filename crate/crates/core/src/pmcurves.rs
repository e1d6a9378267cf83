//! Phase-matching geometry: emission rings, polar loci per wavelength and the
//! locus of best-correlated conjugate modes.

use rayon::prelude::*;

use crate::crystal::{Crystal, DerivedScales};
use crate::error::{Error, Result};
use crate::gain::{mismatch, paraxial_mismatch, MismatchMode};
use crate::scalar::{c_light, Real};

/// Number of coarse scan points per azimuth.
pub const SCAN_POINTS: usize = 512;
/// Largest external polar angle scanned, rad.
pub const SCAN_MAX_ANGLE: f64 = 0.25;

/// Center offset qC (along y) and radius qR of the signal ring at offset Ω.
/// `None` when the cone has collapsed (negative radicand).
pub fn ring_center_radius<T: Real>(scales: &DerivedScales<T>, omega: T) -> Option<(T, T)> {
    let a = omega * scales.tau_coh;
    let c = scales.q_c / scales.q0;
    let rad = scales.delta0 + c * c + a + T::lit(0.5) * scales.epsilon * a * a;
    (rad >= T::zero()).then(|| (scales.q_c, scales.q0 * rad.sqrt()))
}

/// Idler wavelength from energy conservation 1/λp = 1/λs + 1/λi.
pub fn conjugate_wavelength<T: Real>(signal: T, pump: T) -> Result<T> {
    let inv = T::one() / pump - T::one() / signal;
    if !(inv > T::zero()) {
        return Err(Error::invalid("wavelength", "signal must be longer than the pump"));
    }
    Ok(T::one() / inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Ordinary photons.
    Signal,
    /// Extraordinary photons.
    Idler,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Signal => "signal",
            Branch::Idler => "idler",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarCurve<T> {
    pub wavelength: T,
    pub branch: Branch,
    pub mode: MismatchMode,
    /// (azimuth φ, external polar angle θ), sorted by φ then θ.
    pub samples: Vec<(T, T)>,
    /// Azimuths at which no root was found.
    pub omitted: usize,
}

impl<T: Real> PolarCurve<T> {
    /// Transverse wavevectors of the samples.
    pub fn q_points(&self) -> Vec<[T; 2]> {
        let k = T::TAU() / self.wavelength;
        self.samples
            .iter()
            .map(|&(phi, th)| {
                let q = k * th.sin();
                [q * phi.cos(), q * phi.sin()]
            })
            .collect()
    }
}

/// Frequency offset from degeneracy of light at `wavelength`.
pub fn omega_offset<T: Real>(crystal: &Crystal<T>, wavelength: T) -> T {
    T::TAU() * c_light::<T>() / wavelength - crystal.cfg.pump_omega() / T::lit(2.0)
}

/// Traces the Δ = 0 locus for photons of wavelength `wavelength` on `branch`,
/// at `n_samples` equally spaced azimuths.
pub fn pm_locus<T: Real>(
    crystal: &Crystal<T>,
    wavelength: T,
    branch: Branch,
    mode: MismatchMode,
    n_samples: usize,
) -> Result<PolarCurve<T>> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be >= 1"));
    }
    if !(wavelength > T::zero()) {
        return Err(Error::invalid("wavelength", "must be > 0"));
    }
    let w = omega_offset(crystal, wavelength);
    let k = T::TAU() / wavelength;
    let sign = match branch {
        Branch::Signal => T::one(),
        Branch::Idler => -T::one(),
    };
    let f = |phi: T, th: T| -> Result<T> {
        let q = k * th.sin();
        let q = [sign * q * phi.cos(), sign * q * phi.sin()];
        mismatch(crystal, q, sign * w, mode)
    };
    let per_phi: Vec<Result<Vec<T>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let phi = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n_samples);
            scan_roots(|th| f(phi, th), T::lit(SCAN_MAX_ANGLE))
        })
        .collect();
    let mut samples = Vec::new();
    let mut omitted = 0;
    for (i, roots) in per_phi.into_iter().enumerate() {
        let roots = roots?;
        if roots.is_empty() {
            omitted += 1;
        }
        let phi = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n_samples);
        samples.extend(roots.into_iter().map(|th| (phi, th)));
    }
    Ok(PolarCurve { wavelength, branch, mode, samples, omitted })
}

fn scan_roots<T: Real>(f: impl Fn(T) -> Result<T>, max: T) -> Result<Vec<T>> {
    let n = SCAN_POINTS;
    let at = |i: usize| max * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
    let mut roots = Vec::new();
    let mut prev = f(at(0))?;
    if prev == T::zero() {
        roots.push(T::zero());
    }
    for i in 1..n {
        let x = at(i);
        let cur = f(x)?;
        if cur == T::zero() {
            roots.push(x);
        } else if prev != T::zero() && prev.signum() != cur.signum() {
            roots.push(bisect(&f, at(i - 1), x, prev)?);
        }
        prev = cur;
    }
    Ok(roots)
}

fn bisect<T: Real>(f: &impl Fn(T) -> Result<T>, mut a: T, mut b: T, fa: T) -> Result<T> {
    let tol = T::tol_floor(1e-12);
    while b - a > tol {
        let m = (a + b) / T::lit(2.0);
        let fm = f(m)?;
        if fm == T::zero() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) / T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsePoint<T> {
    pub omega: T,
    pub q: [T; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseLocus<T> {
    pub points: Vec<EllipsePoint<T>>,
    /// Semi-axes (along x, along y), 1/m.
    pub semi_axes: Option<(T, T)>,
    pub eccentricity: Option<T>,
}

/// Residual tolerance each ellipse point is checked against.
pub const ELLIPSE_TOL: f64 = 1e-6;

/// Solves Δ(q,Ω) = Δ(−q,−Ω) = 0 in the paraxial model for `n_samples` offsets
/// spread over [−band, band].
pub fn correlated_ellipse<T: Real>(scales: &DerivedScales<T>, band: T, n_samples: usize) -> EllipseLocus<T> {
    let s = scales;
    let half = T::lit(0.5);
    let mut points = Vec::new();
    for k in 0..n_samples {
        let w = if n_samples < 2 {
            T::zero()
        } else {
            -band + T::lit(2.0) * band * T::from_usize_lossy(k) / T::from_usize_lossy(n_samples - 1)
        };
        let a = w * s.tau_coh;
        let qy = -a / s.walkoff_term;
        let qx2 = s.q0 * s.q0 * (s.delta0 + half * s.epsilon * a * a) - qy * qy;
        if qx2 < T::zero() {
            continue;
        }
        let qx = qx2.sqrt();
        let cands: &[T] = if qx == T::zero() { &[T::zero()] } else { &[-qx, qx] };
        for &x in cands {
            let q = [x, qy];
            let r1 = paraxial_mismatch(s, q, w).abs();
            let r2 = paraxial_mismatch(s, [-q[0], -q[1]], -w).abs();
            if r1 < T::lit(ELLIPSE_TOL) && r2 < T::lit(ELLIPSE_TOL) {
                points.push(EllipsePoint { omega: w, q });
            }
        }
    }
    let (semi_axes, eccentricity) = if s.delta0 > T::zero() {
        let ax = s.q0 * s.delta0.sqrt();
        let g = T::one() - half * s.epsilon * (s.q0 * s.walkoff_term).powi(2);
        if g > T::zero() {
            let ay = ax / g.sqrt();
            let (lo, hi) = (ax.min(ay), ax.max(ay));
            (Some((ax, ay)), Some((T::one() - (lo / hi).powi(2)).sqrt()))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    EllipseLocus { points, semi_axes, eccentricity }
}
