//! Plane-wave-pump gain functions, phase mismatch and compensation phases.

use num_complex::Complex;
use rayon::prelude::*;

use crate::crystal::{Crystal, DerivedScales, Polarization};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MismatchMode {
    #[default]
    Paraxial,
    Exact,
}

impl std::fmt::Display for MismatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MismatchMode::Paraxial => "paraxial",
            MismatchMode::Exact => "exact",
        })
    }
}

/// Dimensionless phase mismatch Δ(q, Ω) of an ordinary wave at (q, Ω) and an
/// extraordinary wave at (−q, −Ω).
pub fn mismatch<T: Real>(crystal: &Crystal<T>, q: [T; 2], omega: T, mode: MismatchMode) -> Result<T> {
    let s = &crystal.scales;
    match mode {
        MismatchMode::Paraxial => Ok(paraxial_mismatch(s, q, omega)),
        MismatchMode::Exact => {
            let ko = crystal.kz_exact(Polarization::Ordinary, q, omega)?;
            let ke = crystal.kz_exact(Polarization::Extraordinary, [-q[0], -q[1]], -omega)?;
            Ok(s.length * (ko + ke - s.k_p))
        }
    }
}

/// Δ0 + ρe·lc·q_y − q²/q0² + Ωτcoh + ½ε(Ωτcoh)².
pub fn paraxial_mismatch<T: Real>(s: &DerivedScales<T>, q: [T; 2], omega: T) -> T {
    let a = omega * s.tau_coh;
    let q2 = (q[0] * q[0] + q[1] * q[1]) / (s.q0 * s.q0);
    s.delta0 + s.walkoff_term * q[1] - q2 + a + T::lit(0.5) * s.epsilon * a * a
}

/// Propagation phase φ = (lc/2)[k_oz(q,Ω) − k_ez(−q,−Ω)].
pub fn propagation_phase<T: Real>(
    crystal: &Crystal<T>,
    q: [T; 2],
    omega: T,
    mode: MismatchMode,
) -> Result<T> {
    let mq = [-q[0], -q[1]];
    let (ko, ke) = match mode {
        MismatchMode::Paraxial => (
            crystal.kz_paraxial(Polarization::Ordinary, q, omega),
            crystal.kz_paraxial(Polarization::Extraordinary, mq, -omega),
        ),
        MismatchMode::Exact => (
            crystal.kz_exact(Polarization::Ordinary, q, omega)?,
            crystal.kz_exact(Polarization::Extraordinary, mq, -omega)?,
        ),
    };
    Ok(crystal.scales.length / T::lit(2.0) * (ko - ke))
}

/// Gain coefficients at one (q, Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample<T> {
    pub u: Complex<T>,
    pub v: Complex<T>,
    /// Propagation phase φ, rad.
    pub phi: T,
    pub delta: T,
    /// Γ = √(σ² − Δ²/4), purely imaginary past the branch point.
    pub gamma: Complex<T>,
    /// Pair phase ψ = (arg U + arg V)/2.
    pub psi: T,
    /// Squeeze parameter r = asinh|V|.
    pub r: T,
    /// θ = (arg U − arg V)/2.
    pub theta: T,
}

/// Returns `(cosh Γ, sinh Γ / Γ)` as functions of Γ², valid on both sides of
/// the branch point.
pub fn cosh_sinhc<T: Real>(gamma2: T) -> (T, T) {
    let g = gamma2.abs().sqrt();
    if g < T::lit(1e-4) {
        let g4 = gamma2 * gamma2;
        let c = T::one() + gamma2 / T::lit(2.0) + g4 / T::lit(24.0);
        let s = T::one() + gamma2 / T::lit(6.0) + g4 / T::lit(120.0);
        (c, s)
    } else if gamma2 >= T::zero() {
        (g.cosh(), g.sinh() / g)
    } else {
        (g.cos(), g.sin() / g)
    }
}

/// Gain sample for a given mismatch, without propagation phase.
pub fn gain_from_mismatch<T: Real>(delta: T, sigma: T, global_phase: T) -> GainSample<T> {
    let half_d = delta / T::lit(2.0);
    let g2 = sigma * sigma - half_d * half_d;
    let (c, s) = cosh_sinhc(g2);
    let g = if g2 >= T::zero() {
        Complex::new(g2.sqrt(), T::zero())
    } else {
        Complex::new(T::zero(), (-g2).sqrt())
    };
    let ph = Complex::from_polar(T::one(), global_phase);
    let u = ph * Complex::new(c, half_d * s);
    let v = ph * Complex::new(sigma * s, T::zero());
    let arg_u = u.arg();
    let arg_v = if v.norm() > T::zero() { v.arg() } else { arg_u };
    GainSample {
        u,
        v,
        phi: T::zero(),
        delta,
        gamma: g,
        psi: (arg_u + arg_v) / T::lit(2.0),
        r: v.norm().asinh(),
        theta: (arg_u - arg_v) / T::lit(2.0),
    }
}

/// Global phase k_p·lc/2 reduced to [0, 2π).
pub fn global_phase<T: Real>(crystal: &Crystal<T>) -> T {
    let s = &crystal.scales;
    let k = s.k_p.as_f64() * s.length.as_f64() / 2.0;
    T::lit(k.rem_euclid(std::f64::consts::TAU))
}

/// Gain functions U, V and propagation phase at (q, Ω).
pub fn gain_at<T: Real>(
    crystal: &Crystal<T>,
    q: [T; 2],
    omega: T,
    sigma: T,
    mode: MismatchMode,
) -> Result<GainSample<T>> {
    let delta = mismatch(crystal, q, omega, mode)?;
    let mut g = gain_from_mismatch(delta, sigma, global_phase(crystal));
    g.phi = propagation_phase(crystal, q, omega, mode)?;
    Ok(g)
}

/// How the compensated pair phase 2ψ is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairPhaseModel {
    /// arg of (C + iΔS/2)·S, i.e. atan(Δ·tanhΓ/(2Γ)) on the principal branch.
    #[default]
    Exact,
    /// Δ·tanh σ/(2σ).
    Linearized,
}

/// Pair phase 2ψ with the global phase removed.
pub fn pair_phase<T: Real>(delta: T, sigma: T, model: PairPhaseModel) -> T {
    match model {
        PairPhaseModel::Exact => {
            let half_d = delta / T::lit(2.0);
            let (c, s) = cosh_sinhc(sigma * sigma - half_d * half_d);
            let z = Complex::new(c, half_d * s);
            if s == T::zero() {
                z.arg()
            } else {
                (z * s).arg()
            }
        }
        PairPhaseModel::Linearized => delta * optimal_length_ratio(sigma),
    }
}

/// Second, pump-free crystal after a 90° polarization rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationSpec<T> {
    pub enabled: bool,
    /// l′c / lc.
    pub length_ratio: T,
}

impl<T: Real> CompensationSpec<T> {
    pub fn disabled() -> Self {
        Self { enabled: false, length_ratio: T::zero() }
    }

    pub fn with_ratio(length_ratio: T) -> Self {
        Self { enabled: true, length_ratio }
    }

    pub fn optimal(sigma: T) -> Self {
        Self::with_ratio(optimal_length_ratio(sigma))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_ratio >= T::zero() && self.length_ratio <= T::one()) {
            return Err(Error::invalid("compensation.length_ratio", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// φ_c = [Δ(−q,−Ω) − Δ(q,Ω)]·l′c/lc; zero when compensation is disabled.
pub fn compensation_phase<T: Real>(
    crystal: &Crystal<T>,
    q: [T; 2],
    omega: T,
    comp: &CompensationSpec<T>,
    mode: MismatchMode,
) -> Result<T> {
    if !comp.enabled {
        return Ok(T::zero());
    }
    let dp = mismatch(crystal, q, omega, mode)?;
    let dm = mismatch(crystal, [-q[0], -q[1]], -omega, mode)?;
    Ok((dm - dp) * comp.length_ratio)
}

/// tanh σ / (2σ).
pub fn optimal_length_ratio<T: Real>(sigma: T) -> T {
    if sigma.abs() < T::lit(1e-4) {
        T::lit(0.5) - sigma * sigma / T::lit(6.0)
    } else {
        sigma.tanh() / (T::lit(2.0) * sigma)
    }
}

/// Compensation length minimizing the symmetric-pixel S2 noise, m.
pub fn optimal_compensation_length<T: Real>(sigma: T, length: T) -> T {
    length * optimal_length_ratio(sigma)
}

/// Gains at a conjugate pair ξ = (q, Ω) and −ξ, composed into the ordinary and
/// extraordinary output coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGains<T> {
    pub plus: GainSample<T>,
    pub minus: GainSample<T>,
}

impl<T: Real> PairGains<T> {
    pub fn new(crystal: &Crystal<T>, q: [T; 2], omega: T, sigma: T, mode: MismatchMode) -> Result<Self> {
        Ok(Self {
            plus: gain_at(crystal, q, omega, sigma, mode)?,
            minus: gain_at(crystal, [-q[0], -q[1]], -omega, sigma, mode)?,
        })
    }

    fn rot(phi: T) -> Complex<T> {
        Complex::from_polar(T::one(), phi)
    }

    pub fn u_o(&self) -> Complex<T> {
        self.plus.u * Self::rot(self.plus.phi)
    }
    pub fn v_o(&self) -> Complex<T> {
        self.plus.v * Self::rot(self.plus.phi)
    }
    pub fn u_e(&self) -> Complex<T> {
        self.minus.u * Self::rot(-self.minus.phi)
    }
    pub fn v_e(&self) -> Complex<T> {
        self.minus.v * Self::rot(-self.minus.phi)
    }
    /// U_o(−ξ).
    pub fn u_o_conj(&self) -> Complex<T> {
        self.minus.u * Self::rot(self.minus.phi)
    }
    /// V_o(−ξ).
    pub fn v_o_conj(&self) -> Complex<T> {
        self.minus.v * Self::rot(self.minus.phi)
    }
    /// U_e(−ξ).
    pub fn u_e_conj(&self) -> Complex<T> {
        self.plus.u * Self::rot(-self.plus.phi)
    }
    /// V_e(−ξ).
    pub fn v_e_conj(&self) -> Complex<T> {
        self.plus.v * Self::rot(-self.plus.phi)
    }

    /// `| |U|² − |V|² − 1 |` maximized over both members.
    pub fn norm_residual(&self) -> T {
        let r = |g: &GainSample<T>| (g.u.norm_sqr() - g.v.norm_sqr() - T::one()).abs();
        r(&self.plus).max(r(&self.minus))
    }

    /// `|U_o(ξ)V_e(−ξ) − V_o(ξ)U_e(−ξ)|`.
    pub fn commutator_residual(&self) -> T {
        (self.u_o() * self.v_e_conj() - self.v_o() * self.u_e_conj()).norm()
    }
}

/// Maximum unitarity residuals over a set of (q, Ω) points.
pub fn unitarity_residuals<T: Real>(
    crystal: &Crystal<T>,
    points: &[([T; 2], T)],
    sigma: T,
    mode: MismatchMode,
) -> Result<(T, T)> {
    points
        .par_iter()
        .map(|&(q, w)| {
            let p = PairGains::new(crystal, q, w, sigma, mode)?;
            Ok((p.norm_residual(), p.commutator_residual()))
        })
        .try_reduce(|| (T::zero(), T::zero()), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
}

/// Regular (q_x, q_y, Ω) grid in units of (q0, q0, 1/τcoh), endpoints included.
pub fn scaled_grid<T: Real>(
    crystal: &Crystal<T>,
    nq: usize,
    q_extent: T,
    nw: usize,
    w_extent: T,
) -> Vec<([T; 2], T)> {
    let s = &crystal.scales;
    let lin = |i: usize, n: usize, ext: T| {
        if n < 2 {
            T::zero()
        } else {
            -ext + T::lit(2.0) * ext * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
        }
    };
    let mut out = Vec::with_capacity(nq * nq * nw);
    for k in 0..nw {
        let w = lin(k, nw, w_extent) / s.tau_coh;
        for j in 0..nq {
            for i in 0..nq {
                out.push(([lin(i, nq, q_extent) * s.q0, lin(j, nq, q_extent) * s.q0], w));
            }
        }
    }
    out
}
