//! Dispersion of a negative uniaxial crystal cut for type-II down-conversion.
//!
//! Conventions: the pump travels along z, the optic axis lies in the z-y plane
//! at `cut_angle` from z, signal/idler carriers sit at the degenerate frequency
//! ωp/2. Lengths are meters and angular frequencies rad/s.

use crate::error::{Error, Result};
use crate::scalar::{c_light, Real};

/// Single-resonance Sellmeier form `n² = a + b/(λ² − c) − d·λ²` with λ in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierFormula<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> SellmeierFormula<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    /// Returns `(n², d n²/dλ, d² n²/dλ²)` with λ in µm.
    fn eval(&self, l_um: T) -> (T, T, T) {
        let two = T::lit(2.0);
        let l2 = l_um * l_um;
        let den = l2 - self.c;
        let n2 = self.a + self.b / den - self.d * l2;
        let d1 = -two * self.b * l_um / (den * den) - two * self.d * l_um;
        let d2 = -two * self.b / (den * den) + T::lit(8.0) * self.b * l2 / (den * den * den) - two * self.d;
        (n2, d1, d2)
    }

    pub fn n_squared(&self, l_um: T) -> T {
        self.eval(l_um).0
    }
}

/// Ordinary and principal-extraordinary dispersion of a uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierSet<T> {
    pub ordinary: SellmeierFormula<T>,
    pub extraordinary: SellmeierFormula<T>,
    /// Supported wavelength band in µm.
    pub band_um: (T, T),
}

impl<T: Real> SellmeierSet<T> {
    /// β-barium borate, coefficients of Eimerl et al. (1987).
    pub fn bbo() -> Self {
        let f = |a, b, c, d| SellmeierFormula::new(T::lit(a), T::lit(b), T::lit(c), T::lit(d));
        Self {
            ordinary: f(2.7359, 0.01878, 0.01822, 0.01354),
            extraordinary: f(2.3753, 0.01224, 0.01667, 0.01516),
            band_um: (T::lit(0.2), T::lit(3.0)),
        }
    }

    /// Checks the index formulas over the supported band.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.band_um;
        if !(lo > T::zero() && hi > lo) {
            return Err(Error::invalid("sellmeier.band", "band must satisfy 0 < min < max"));
        }
        let samples = 257;
        for i in 0..samples {
            let l = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(samples - 1);
            let no2 = self.ordinary.n_squared(l);
            let ne2 = self.extraordinary.n_squared(l);
            if !(no2 > T::one() && ne2 > T::one()) {
                return Err(Error::invalid("sellmeier", format!("squared index <= 1 at {} um", l.as_f64())));
            }
            if !(no2 > ne2) {
                return Err(Error::invalid(
                    "sellmeier",
                    format!("not negative uniaxial at {} um", l.as_f64()),
                ));
            }
        }
        Ok(())
    }

    fn check_band(&self, wavelength: T) -> Result<T> {
        let l_um = wavelength * T::lit(1e6);
        let (lo, hi) = self.band_um;
        if !(l_um >= lo && l_um <= hi) {
            return Err(Error::WavelengthOutOfBand {
                wavelength_um: l_um.as_f64(),
                min_um: lo.as_f64(),
                max_um: hi.as_f64(),
            });
        }
        Ok(l_um)
    }

    /// Index and its first two wavelength derivatives (SI units).
    pub fn index_derivs(&self, pol: Polarization, wavelength: T, angle: T) -> Result<IndexDerivs<T>> {
        let l_um = self.check_band(wavelength)?;
        let (s, s1, s2) = self.ordinary.eval(l_um);
        // Work with P = 1/n² = cos²θ/n_o² + sin²θ/n̄_e²; ordinary is the θ = 0 case.
        let (c2, sn2) = match pol {
            Polarization::Ordinary => (T::one(), T::zero()),
            Polarization::Extraordinary => {
                let c = angle.cos();
                (c * c, T::one() - c * c)
            }
        };
        let (t, t1, t2) = self.extraordinary.eval(l_um);
        let two = T::lit(2.0);
        let p = c2 / s + sn2 / t;
        let p1 = -c2 * s1 / (s * s) - sn2 * t1 / (t * t);
        let p2 = c2 * (two * s1 * s1 / (s * s * s) - s2 / (s * s))
            + sn2 * (two * t1 * t1 / (t * t * t) - t2 / (t * t));
        let n = p.powf(T::lit(-0.5));
        let dn = -T::lit(0.5) * p.powf(T::lit(-1.5)) * p1;
        let d2n = T::lit(0.75) * p.powf(T::lit(-2.5)) * p1 * p1 - T::lit(0.5) * p.powf(T::lit(-1.5)) * p2;
        let um = T::lit(1e6);
        Ok(IndexDerivs { n, dn_dlambda: dn * um, d2n_dlambda2: d2n * um * um })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexDerivs<T> {
    pub n: T,
    /// dn/dλ in 1/m.
    pub dn_dlambda: T,
    /// d²n/dλ² in 1/m².
    pub d2n_dlambda2: T,
}

impl<T: Real> IndexDerivs<T> {
    /// `dk/dω = (n − λ dn/dλ)/c`, the inverse group velocity.
    pub fn inverse_group_velocity(&self, wavelength: T) -> T {
        (self.n - wavelength * self.dn_dlambda) / c_light::<T>()
    }

    /// `d²k/dω² = λ³/(2πc²) d²n/dλ²`.
    pub fn gvd(&self, wavelength: T) -> T {
        let c = c_light::<T>();
        wavelength * wavelength * wavelength * self.d2n_dlambda2 / (T::TAU() * c * c)
    }
}

/// Index of refraction. `angle` is measured from the optic axis and ignored for
/// ordinary polarization.
pub fn refractive_index<T: Real>(
    set: &SellmeierSet<T>,
    pol: Polarization,
    wavelength: T,
    angle: T,
) -> Result<T> {
    Ok(set.index_derivs(pol, wavelength, angle)?.n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalConfig<T> {
    pub sellmeier: SellmeierSet<T>,
    /// Angle between pump direction and optic axis, rad.
    pub cut_angle: T,
    /// Crystal length lc, m.
    pub length: T,
    /// Pump wavelength λp, m.
    pub pump_wavelength: T,
    /// Parametric gain σ.
    pub sigma: T,
}

impl<T: Real> CrystalConfig<T> {
    /// 2 mm BBO cut at 49.6°, pumped at 351 nm, σ = 2.
    pub fn bbo_default() -> Self {
        Self {
            sellmeier: SellmeierSet::bbo(),
            cut_angle: T::lit(49.6).to_radians(),
            length: T::lit(2e-3),
            pump_wavelength: T::lit(351e-9),
            sigma: T::lit(2.0),
        }
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > T::zero()) {
            return Err(Error::invalid("length", "must be > 0"));
        }
        if !(self.pump_wavelength > T::zero()) {
            return Err(Error::invalid("pump_wavelength", "must be > 0"));
        }
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma", "must be finite and >= 0"));
        }
        if !(self.cut_angle > T::zero() && self.cut_angle < T::FRAC_PI_2()) {
            return Err(Error::invalid("cut_angle", "must lie in (0, pi/2)"));
        }
        self.sellmeier.validate()?;
        self.sellmeier.check_band(self.pump_wavelength)?;
        self.sellmeier.check_band(self.carrier_wavelength())?;
        Ok(())
    }

    pub fn pump_omega(&self) -> T {
        T::TAU() * c_light::<T>() / self.pump_wavelength
    }

    /// Degenerate signal/idler wavelength 2λp.
    pub fn carrier_wavelength(&self) -> T {
        T::lit(2.0) * self.pump_wavelength
    }
}

/// Parameters of the quadratic mismatch expansion and related scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales<T> {
    /// Collinear mismatch at the carrier.
    pub delta0: T,
    /// Transverse bandwidth, 1/m.
    pub q0: T,
    /// 1/q0, m.
    pub coherence_length: T,
    /// Signal-idler group delay across the crystal, s.
    pub tau_coh: T,
    pub epsilon: T,
    /// lc·tan ρ, the coefficient of q_y in the mismatch, m.
    pub walkoff_term: T,
    /// Walk-off angle ρ, rad.
    pub walkoff_angle: T,
    /// Ring-center offset along y, 1/m.
    pub q_c: T,
    /// Far-field unit λf·q0/2π, m.
    pub x0: T,
    pub focal_length: T,
    pub length: T,
    pub carrier_wavelength: T,
    pub n_o: T,
    pub n_e: T,
    pub n_pump: T,
    pub k_o: T,
    pub k_e: T,
    pub k_p: T,
    pub group_velocity_o: T,
    pub group_velocity_e: T,
    pub gvd_o: T,
    pub gvd_e: T,
}

impl<T: Real> DerivedScales<T> {
    /// Transverse wavevector for a far-field position given in units of X0.
    pub fn q_from_scaled(&self, x: [T; 2]) -> [T; 2] {
        [x[0] * self.q0, x[1] * self.q0]
    }
}

/// Computes the mismatch expansion scales for `cfg` with a far-field lens of
/// the given focal length.
pub fn derive_scales<T: Real>(cfg: &CrystalConfig<T>, focal_length: T) -> Result<DerivedScales<T>> {
    cfg.validate()?;
    if !(focal_length > T::zero()) {
        return Err(Error::invalid("focal_length", "must be > 0"));
    }
    let c = c_light::<T>();
    let set = &cfg.sellmeier;
    let lam = cfg.carrier_wavelength();
    let omega = cfg.pump_omega() / T::lit(2.0);
    let o = set.index_derivs(Polarization::Ordinary, lam, T::zero())?;
    let e = set.index_derivs(Polarization::Extraordinary, lam, cfg.cut_angle)?;
    let p = set.index_derivs(Polarization::Extraordinary, cfg.pump_wavelength, cfg.cut_angle)?;
    let no2 = o.n * o.n;
    let nbar = set.index_derivs(Polarization::Extraordinary, lam, T::FRAC_PI_2())?.n;

    let k_o = o.n * omega / c;
    let k_e = e.n * omega / c;
    let k_p = p.n * cfg.pump_omega() / c;
    let lc = cfg.length;
    let delta0 = lc * (k_o + k_e - k_p);
    let q0 = (T::lit(2.0) * k_e * k_o / ((k_e + k_o) * lc)).sqrt();

    let ko1 = o.inverse_group_velocity(lam);
    let ke1 = e.inverse_group_velocity(lam);
    let tau = lc * (ko1 - ke1);
    let gvd_o = o.gvd(lam);
    let gvd_e = e.gvd(lam);
    let epsilon = lc * (gvd_o + gvd_e) / (tau * tau);

    let th = cfg.cut_angle;
    let tan_rho =
        e.n * e.n / T::lit(2.0) * (T::lit(2.0) * th).sin() * (T::one() / (nbar * nbar) - T::one() / no2);
    let walkoff_term = lc * tan_rho;
    let q_c = T::lit(0.5) * q0 * q0 * walkoff_term;
    let x0 = lam * focal_length * q0 / T::TAU();

    Ok(DerivedScales {
        delta0,
        q0,
        coherence_length: T::one() / q0,
        tau_coh: tau,
        epsilon,
        walkoff_term,
        walkoff_angle: tan_rho.atan(),
        q_c,
        x0,
        focal_length,
        length: lc,
        carrier_wavelength: lam,
        n_o: o.n,
        n_e: e.n,
        n_pump: p.n,
        k_o,
        k_e,
        k_p,
        group_velocity_o: T::one() / ko1,
        group_velocity_e: T::one() / ke1,
        gvd_o,
        gvd_e,
    })
}

/// Crystal configuration bundled with its derived scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crystal<T> {
    pub cfg: CrystalConfig<T>,
    pub scales: DerivedScales<T>,
}

const ANGLE_MAX_ITER: usize = 50;

impl<T: Real> Crystal<T> {
    pub fn new(cfg: CrystalConfig<T>, focal_length: T) -> Result<Self> {
        let scales = derive_scales(&cfg, focal_length)?;
        Ok(Self { cfg, scales })
    }

    pub fn bbo_default() -> Self {
        Self::new(CrystalConfig::bbo_default(), T::lit(0.1)).expect("default crystal is valid")
    }

    fn omega_total(&self, omega: T) -> T {
        self.cfg.pump_omega() / T::lit(2.0) + omega
    }

    /// Longitudinal wavevector at carrier offset `omega` and transverse `q`,
    /// without paraxial expansion.
    pub fn kz_exact(&self, pol: Polarization, q: [T; 2], omega: T) -> Result<T> {
        let c = c_light::<T>();
        let w = self.omega_total(omega);
        if !(w > T::zero()) {
            return Err(Error::invalid("omega", "total frequency must be positive"));
        }
        let lam = T::TAU() * c / w;
        let q2 = q[0] * q[0] + q[1] * q[1];
        let set = &self.cfg.sellmeier;
        match pol {
            Polarization::Ordinary => {
                let k = set.index_derivs(pol, lam, T::zero())?.n * w / c;
                if q2 > k * k {
                    return Err(Error::Evanescent { q: q2.sqrt().as_f64(), k: k.as_f64() });
                }
                Ok((k * k - q2).sqrt())
            }
            Polarization::Extraordinary => {
                let (s, co) = self.cfg.cut_angle.sin_cos();
                let tol = T::tol_floor(1e-12);
                let mut theta = self.cfg.cut_angle;
                for _ in 0..ANGLE_MAX_ITER {
                    let k = set.index_derivs(pol, lam, theta)?.n * w / c;
                    if q2 > k * k {
                        return Err(Error::Evanescent { q: q2.sqrt().as_f64(), k: k.as_f64() });
                    }
                    let kz = (k * k - q2).sqrt();
                    let cos_t = ((kz * co - q[1] * s) / k).max(-T::one()).min(T::one());
                    let next = cos_t.acos();
                    let done = (next - theta).abs() < tol;
                    theta = next;
                    if done {
                        let k = set.index_derivs(pol, lam, theta)?.n * w / c;
                        return Ok((k * k - q2).max(T::zero()).sqrt());
                    }
                }
                Err(Error::AngleIteration { iterations: ANGLE_MAX_ITER })
            }
        }
    }

    /// Second-order expansion of the longitudinal wavevector.
    pub fn kz_paraxial(&self, pol: Polarization, q: [T; 2], omega: T) -> T {
        let s = &self.scales;
        let half = T::lit(0.5);
        let q2 = q[0] * q[0] + q[1] * q[1];
        match pol {
            Polarization::Ordinary => {
                s.k_o + omega / s.group_velocity_o + half * s.gvd_o * omega * omega
                    - q2 / (T::lit(2.0) * s.k_o)
            }
            Polarization::Extraordinary => {
                s.k_e + omega / s.group_velocity_e + half * s.gvd_e * omega * omega
                    - s.walkoff_term / s.length * q[1]
                    - q2 / (T::lit(2.0) * s.k_e)
            }
        }
    }
}

/// Cut angle at which degenerate collinear type-II (e → o + e) matching holds
/// for the given pump wavelength.
pub fn collinear_cut_angle<T: Real>(set: &SellmeierSet<T>, pump_wavelength: T) -> Result<T> {
    let lam = T::lit(2.0) * pump_wavelength;
    let f = |theta: T| -> Result<T> {
        let no = set.index_derivs(Polarization::Ordinary, lam, T::zero())?.n;
        let ne = set.index_derivs(Polarization::Extraordinary, lam, theta)?.n;
        let np = set.index_derivs(Polarization::Extraordinary, pump_wavelength, theta)?.n;
        Ok(no + ne - T::lit(2.0) * np)
    };
    let mut a = T::zero();
    let mut b = T::FRAC_PI_2();
    let fa = f(a)?;
    if fa.signum() == f(b)?.signum() {
        return Err(Error::invalid("pump_wavelength", "no collinear type-II matching angle"));
    }
    let tol = T::tol_floor(1e-13);
    while b - a > tol {
        let m = (a + b) / T::lit(2.0);
        if f(m)?.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) / T::lit(2.0))
}
