//! Far-field Stokes observables under spectral filtering.
//!
//! Every frequency integral is carried out in the dimensionless variable
//! Ωτcoh and rescaled to ∫dΩ/2π on output.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::crystal::Crystal;
use crate::error::{Error, Result};
use crate::farfield::{CellFailure, FarFieldMap, MapGrid, MapMeta};
use crate::gain::{CompensationSpec, MismatchMode, PairGains};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::{c_light, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FilterKind {
    #[default]
    None,
    Step,
    Gaussian,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::None => "none",
            FilterKind::Step => "step",
            FilterKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FilterKind::None),
            "step" => Ok(FilterKind::Step),
            "gaussian" => Ok(FilterKind::Gaussian),
            _ => Err(Error::invalid("filter.kind", format!("unknown filter `{s}`"))),
        }
    }
}

/// Spectral filter centered on the degenerate frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec<T> {
    pub kind: FilterKind,
    /// Full width Δλ, m. Ignored for `FilterKind::None`.
    pub fwhm: T,
}

impl<T: Real> FilterSpec<T> {
    pub fn none() -> Self {
        Self { kind: FilterKind::None, fwhm: T::zero() }
    }

    pub fn step(fwhm: T) -> Self {
        Self { kind: FilterKind::Step, fwhm }
    }

    pub fn gaussian(fwhm: T) -> Self {
        Self { kind: FilterKind::Gaussian, fwhm }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != FilterKind::None && !(self.fwhm > T::zero() && self.fwhm.is_finite()) {
            return Err(Error::invalid("filter.fwhm", "must be > 0"));
        }
        Ok(())
    }

    /// Full angular-frequency width ΔΩ = 2πcΔλ/λ².
    pub fn omega_width(&self, carrier_wavelength: T) -> T {
        T::TAU() * c_light::<T>() * self.fwhm / (carrier_wavelength * carrier_wavelength)
    }

    /// Transmission f(Ω).
    pub fn transmission(&self, omega: T, carrier_wavelength: T) -> T {
        match self.kind {
            FilterKind::None => T::one(),
            FilterKind::Step => {
                if omega.abs() <= self.omega_width(carrier_wavelength) / T::lit(2.0) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FilterKind::Gaussian => {
                let w = self.omega_width(carrier_wavelength);
                (-T::lit(4.0) * T::LN_2() * omega * omega / (w * w)).exp()
            }
        }
    }

    /// Half-width of the integration range, rad/s.
    pub fn support(&self, carrier_wavelength: T, pump_omega: T) -> T {
        match self.kind {
            FilterKind::None => pump_omega / T::lit(4.0),
            FilterKind::Step => self.omega_width(carrier_wavelength) / T::lit(2.0),
            FilterKind::Gaussian => T::lit(4.0) * self.omega_width(carrier_wavelength),
        }
    }
}

/// Detector description. Ratio observables are independent of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams<T> {
    /// Detection time T, s.
    pub detection_time: T,
    /// Resolution area D_R, m².
    pub resolution_area: T,
}

impl<T: Real> Default for DetectionParams<T> {
    fn default() -> Self {
        Self { detection_time: T::lit(1e-9), resolution_area: T::lit(1e-10) }
    }
}

/// Second moments of the filtered far-field operators at (x, Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredMoments<T> {
    pub n_o: T,
    pub n_e: T,
    /// ⟨A_o(x,Ω) A_e(−x,−Ω)⟩.
    pub anomalous_oe: Complex<T>,
    /// ⟨A_e(x,Ω) A_o(−x,−Ω)⟩.
    pub anomalous_eo: Complex<T>,
}

impl<T: Real> FilteredMoments<T> {
    fn h1(&self) -> T {
        self.n_o * (self.n_e + T::one()) + self.n_e * (self.n_o + T::one())
    }

    fn h2(&self) -> T {
        T::lit(2.0) * (self.anomalous_oe.conj() * self.anomalous_eo).re
    }

    fn f1(&self) -> T {
        self.n_o * (self.n_o + T::one()) + self.n_e * (self.n_e + T::one())
    }

    fn f2(&self) -> T {
        self.anomalous_oe.norm_sqr() + self.anomalous_eo.norm_sqr()
    }
}

/// Frequency-integrated quantities at one far-field point, per unit T/D_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellIntegrals<T> {
    pub s0: T,
    pub s1: T,
    pub h1: T,
    pub h2: T,
    pub f1: T,
    pub f2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntensityComponent {
    Ordinary,
    Extraordinary,
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Symmetric-pixel difference noise of S2 (equal for S3), in shot-noise units.
    S2Diff,
    /// Symmetric-pixel sum noise of S1, in shot-noise units.
    S1Sum,
    /// Single-pixel S2 noise, in shot-noise units.
    SinglePixelS2,
    /// Degree of polarization ⟨S1⟩/⟨S0⟩.
    Dop,
    /// Photons per coherence time.
    Intensity(IntensityComponent),
}

impl NoiseKind {
    /// Observable satisfies map(x) = map(−x).
    pub fn is_parity_symmetric(&self) -> bool {
        matches!(
            self,
            NoiseKind::S2Diff
                | NoiseKind::S1Sum
                | NoiseKind::SinglePixelS2
                | NoiseKind::Intensity(IntensityComponent::Total)
        )
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::S2Diff => "s2diff",
            NoiseKind::S1Sum => "s1sum",
            NoiseKind::SinglePixelS2 => "single_pixel_s2",
            NoiseKind::Dop => "dop",
            NoiseKind::Intensity(IntensityComponent::Total) => "intensity",
            NoiseKind::Intensity(IntensityComponent::Ordinary) => "intensity_o",
            NoiseKind::Intensity(IntensityComponent::Extraordinary) => "intensity_e",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "s2diff" => NoiseKind::S2Diff,
            "s1sum" => NoiseKind::S1Sum,
            "single_pixel_s2" => NoiseKind::SinglePixelS2,
            "dop" => NoiseKind::Dop,
            "intensity" => NoiseKind::Intensity(IntensityComponent::Total),
            "intensity_o" => NoiseKind::Intensity(IntensityComponent::Ordinary),
            "intensity_e" => NoiseKind::Intensity(IntensityComponent::Extraordinary),
            _ => return Err(Error::invalid("kind", format!("unknown observable `{s}`"))),
        })
    }
}

/// Everything needed to evaluate far-field observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup<T> {
    pub crystal: Crystal<T>,
    pub sigma: T,
    pub mode: MismatchMode,
    pub filter: FilterSpec<T>,
    pub compensation: CompensationSpec<T>,
    pub detection: DetectionParams<T>,
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    /// Path coordinate: y/X0 on the ring, arc fraction on a line.
    pub coordinate: T,
    pub x: T,
    pub y: T,
    pub value: T,
}

impl<T: Real> Setup<T> {
    /// σ taken from the crystal config, no filter, no compensation.
    pub fn new(crystal: Crystal<T>) -> Self {
        Self {
            sigma: crystal.cfg.sigma,
            crystal,
            mode: MismatchMode::Paraxial,
            filter: FilterSpec::none(),
            compensation: CompensationSpec::disabled(),
            detection: DetectionParams::default(),
            tolerance: Tolerance::default(),
        }
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_filter(mut self, filter: FilterSpec<T>) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_compensation(mut self, comp: CompensationSpec<T>) -> Self {
        self.compensation = comp;
        self
    }

    pub fn with_mode(mut self, mode: MismatchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= T::zero()) {
            return Err(Error::invalid("sigma", "must be >= 0"));
        }
        self.filter.validate()?;
        self.compensation.validate()
    }

    fn time_unit(&self) -> T {
        self.crystal.scales.tau_coh.abs().max(T::lit(1e-15))
    }

    /// Filtered moments at scaled far-field position `x` and offset Ω.
    pub fn filtered_second_moments(&self, x: [T; 2], omega: T) -> Result<FilteredMoments<T>> {
        let s = &self.crystal.scales;
        let q = s.q_from_scaled(x);
        let lam = s.carrier_wavelength;
        let fp = self.filter.transmission(omega, lam);
        let fm = self.filter.transmission(-omega, lam);
        let g = PairGains::new(&self.crystal, q, omega, self.sigma, self.mode)?;
        let cross = (fp * fm).sqrt();
        let mut m = FilteredMoments {
            n_o: fp * g.v_o().norm_sqr(),
            n_e: fp * g.v_e().norm_sqr(),
            anomalous_oe: g.u_o() * g.v_e_conj() * cross,
            anomalous_eo: g.u_e() * g.v_o_conj() * cross,
        };
        if self.compensation.enabled {
            let r = self.compensation.length_ratio;
            let oe = m.anomalous_eo * Complex::from_polar(T::one(), g.plus.delta * r);
            let eo = m.anomalous_oe * Complex::from_polar(T::one(), g.minus.delta * r);
            m = FilteredMoments { n_o: m.n_e, n_e: m.n_o, anomalous_oe: oe, anomalous_eo: eo };
        }
        Ok(m)
    }

    /// S0, S1, H1, H2, F1, F2 at Ω = 0, integrated over the filter support.
    pub fn cell(&self, x: [T; 2]) -> Result<CellIntegrals<T>> {
        let s = &self.crystal.scales;
        let tu = self.time_unit();
        let half = self.filter.support(s.carrier_wavelength, self.crystal.cfg.pump_omega()) * tu;
        let panels = ((half * T::lit(2.0) / T::lit(4.0)).ceil().as_f64() as usize).clamp(2, 512);
        let panels = panels + panels % 2;
        let r = integrate(
            |a: T| {
                let m = self.filtered_second_moments(x, a / tu)?;
                Ok([m.n_o + m.n_e, m.n_o - m.n_e, m.h1(), m.h2(), m.f1(), m.f2()])
            },
            -half,
            half,
            panels,
            self.tolerance,
        )?;
        let k = T::one() / (T::TAU() * tu);
        let v = r.value;
        Ok(CellIntegrals {
            s0: v[0] * k,
            s1: v[1] * k,
            h1: v[2] * k,
            h2: v[3] * k,
            f1: v[4] * k,
            f2: v[5] * k,
        })
    }

    /// (⟨S0⟩, ⟨S1⟩, ⟨S2⟩, ⟨S3⟩) per unit T/D_R.
    pub fn mean_stokes(&self, x: [T; 2]) -> Result<[T; 4]> {
        let c = self.cell(x)?;
        Ok([c.s0, c.s1, T::zero(), T::zero()])
    }

    /// Mean photon counts (o, e) in one resolution cell over the detection time.
    pub fn mean_counts(&self, x: [T; 2]) -> Result<[T; 2]> {
        let c = self.cell(x)?;
        let t = self.detection.detection_time;
        let half = T::lit(0.5);
        Ok([half * (c.s0 + c.s1) * t, half * (c.s0 - c.s1) * t])
    }

    pub fn f_functions(&self, x: [T; 2]) -> Result<(T, T)> {
        let c = self.cell(x)?;
        Ok((c.f1, c.f2))
    }

    pub fn h_functions(&self, x: [T; 2]) -> Result<(T, T)> {
        let c = self.cell(x)?;
        Ok((c.h1, c.h2))
    }

    /// Value of `kind` at scaled position `x`.
    pub fn noise_at(&self, kind: NoiseKind, x: [T; 2]) -> Result<T> {
        let c = self.cell(x)?;
        Ok(self.observable(kind, &c))
    }

    /// Evaluates an observable from precomputed integrals. Ratios with a zero
    /// shot level are reported as 0.
    pub fn observable(&self, kind: NoiseKind, c: &CellIntegrals<T>) -> T {
        let ratio = |num: T| if c.s0 > T::zero() { num / c.s0 } else { T::zero() };
        let half = T::lit(0.5);
        let tau = self.crystal.scales.tau_coh.abs();
        match kind {
            NoiseKind::S2Diff => ratio(c.h1 - c.h2),
            NoiseKind::S1Sum => ratio(c.f1 - c.f2),
            NoiseKind::SinglePixelS2 => ratio(c.h1),
            NoiseKind::Dop => ratio(c.s1),
            NoiseKind::Intensity(IntensityComponent::Total) => c.s0 * tau,
            NoiseKind::Intensity(IntensityComponent::Ordinary) => half * (c.s0 + c.s1) * tau,
            NoiseKind::Intensity(IntensityComponent::Extraordinary) => half * (c.s0 - c.s1) * tau,
        }
    }

    /// Center y and radius of the Δ = 0 circle at Ω = 0, in units of X0.
    pub fn maximum_gain_circle(&self) -> Option<(T, T)> {
        let s = &self.crystal.scales;
        let c = s.q_c / s.q0;
        let r2 = s.delta0 + c * c;
        (r2 >= T::zero()).then(|| (c, r2.sqrt()))
    }

    /// Positions where the ordinary and extraordinary degenerate rings cross,
    /// in units of X0, ordered by x.
    pub fn intersections(&self) -> Option<[[T; 2]; 2]> {
        let d0 = self.crystal.scales.delta0;
        (d0 >= T::zero()).then(|| {
            let x = d0.sqrt();
            [[-x, T::zero()], [x, T::zero()]]
        })
    }

    /// Samples `kind` on the right half of the maximum-gain circle, bottom to top.
    pub fn ring_profile(&self, kind: NoiseKind, n: usize) -> Result<Vec<ProfileSample<T>>> {
        let (yc, r) =
            self.maximum_gain_circle().ok_or_else(|| Error::invalid("crystal", "no real degenerate ring"))?;
        let pts: Vec<[T; 2]> = (0..n)
            .map(|i| {
                let t = if n < 2 { T::zero() } else { T::from_usize_lossy(i) / T::from_usize_lossy(n - 1) };
                let phi = -T::FRAC_PI_2() + T::PI() * t;
                [r * phi.cos(), yc + r * phi.sin()]
            })
            .collect();
        self.sample_path(kind, &pts, |p, _| p[1])
    }

    /// Samples `kind` on a straight segment, coordinate = fraction of its length.
    pub fn line_profile(
        &self,
        kind: NoiseKind,
        from: [T; 2],
        to: [T; 2],
        n: usize,
    ) -> Result<Vec<ProfileSample<T>>> {
        let ts: Vec<T> = (0..n)
            .map(|i| if n < 2 { T::zero() } else { T::from_usize_lossy(i) / T::from_usize_lossy(n - 1) })
            .collect();
        let pts: Vec<[T; 2]> =
            ts.iter().map(|&t| [from[0] + (to[0] - from[0]) * t, from[1] + (to[1] - from[1]) * t]).collect();
        self.sample_path(kind, &pts, |_, i| ts[i])
    }

    fn sample_path(
        &self,
        kind: NoiseKind,
        pts: &[[T; 2]],
        coord: impl Fn([T; 2], usize) -> T,
    ) -> Result<Vec<ProfileSample<T>>> {
        self.validate()?;
        let vals: Vec<Result<T>> = pts.par_iter().map(|&p| self.noise_at(kind, p)).collect();
        pts.iter()
            .zip(vals)
            .enumerate()
            .map(|(i, (&p, v))| Ok(ProfileSample { coordinate: coord(p, i), x: p[0], y: p[1], value: v? }))
            .collect()
    }
}

/// Evaluates `kind` on every cell of `grid`. Parity-symmetric observables are
/// computed once per (x, −x) pair. Cells whose quadrature fails hold NaN and
/// are listed in `failures`.
pub fn noise_map<T: Real>(setup: &Setup<T>, kind: NoiseKind, grid: MapGrid<T>) -> Result<FarFieldMap<T>> {
    setup.validate()?;
    grid.validate()?;
    let symmetric = kind.is_parity_symmetric();
    let n = grid.nx * grid.ny;
    let jobs: Vec<usize> = (0..n).filter(|&idx| !symmetric || idx <= grid.partner_index(idx)).collect();
    let results: Vec<Result<T>> = jobs
        .par_iter()
        .map(|&idx| {
            let (i, j) = grid.cell_of(idx);
            setup.noise_at(kind, grid.center(i, j))
        })
        .collect();
    let mut values = vec![T::nan(); n];
    let mut failures = Vec::new();
    for (&idx, r) in jobs.iter().zip(results) {
        let v = match r {
            Ok(v) => v,
            Err(e) => {
                failures.push(CellFailure { index: idx, error: e });
                T::nan()
            }
        };
        values[idx] = v;
        if symmetric {
            values[grid.partner_index(idx)] = v;
        }
    }
    Ok(FarFieldMap {
        grid,
        values,
        meta: MapMeta {
            kind,
            sigma: setup.sigma,
            filter: setup.filter,
            compensation: setup.compensation,
            mode: setup.mode,
        },
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::optimal_length_ratio;

    fn setup(sigma: f64) -> Setup<f64> {
        Setup::new(Crystal::bbo_default()).with_sigma(sigma)
    }

    #[test]
    fn filter_transmission() {
        let lam = 702e-9;
        let g = FilterSpec::<f64>::gaussian(5e-9);
        assert_eq!(g.transmission(0.0, lam), 1.0);
        let w = g.omega_width(lam);
        assert!((g.transmission(w / 2.0, lam) - 0.5).abs() < 1e-14);
        assert_eq!(g.transmission(1e12, lam), g.transmission(-1e12, lam));
        let s = FilterSpec::step(8e-9);
        assert_eq!(s.transmission(0.49 * s.omega_width(lam), lam), 1.0);
        assert_eq!(s.transmission(-0.51 * s.omega_width(lam), lam), 0.0);
        assert!(FilterSpec::step(0.0).validate().is_err());
    }

    #[test]
    fn moments_outside_step_band_vanish() {
        let s = setup(2.0).with_filter(FilterSpec::step(1e-9));
        let m = s.filtered_second_moments([1.0, 0.5], 1e14).unwrap();
        assert_eq!(m.n_o, 0.0);
        assert_eq!(m.n_e, 0.0);
        assert_eq!(m.anomalous_oe.norm(), 0.0);
    }

    #[test]
    fn gaussian_center_equals_unfiltered() {
        let a = setup(2.0).with_filter(FilterSpec::gaussian(5e-9));
        let b = setup(2.0);
        let x = [1.2, -0.3];
        assert_eq!(a.filtered_second_moments(x, 0.0).unwrap(), b.filtered_second_moments(x, 0.0).unwrap());
    }

    #[test]
    fn vacuum_has_no_stokes_signal() {
        let s = setup(0.0).with_filter(FilterSpec::step(8e-9));
        let m = s.mean_stokes([1.0, 1.0]).unwrap();
        assert_eq!(m, [0.0; 4]);
        assert_eq!(s.noise_at(NoiseKind::S2Diff, [1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn schwarz_bounds_hold() {
        let s = setup(1.5).with_filter(FilterSpec::gaussian(5e-9));
        for x in [[0.5, 0.5], [4.0, 0.0], [-2.0, 6.0], [3.0, -3.3]] {
            let c = s.cell(x).unwrap();
            assert!(c.f2 <= c.f1 * (1.0 + 1e-12));
            assert!(c.h2.abs() <= c.h1 * (1.0 + 1e-12));
            assert!(c.h1 - c.h2 >= -1e-12 * c.h1);
        }
    }

    #[test]
    fn gaussian_filter_breaks_schwarz_equality() {
        let s = setup(2.0).with_filter(FilterSpec::gaussian(5e-9));
        let (f1, f2) = s.f_functions([4.0, 0.0]).unwrap();
        assert!(f2 < f1);
        let s = setup(2.0).with_filter(FilterSpec::step(5e-9));
        let (f1, f2) = s.f_functions([4.0, 0.0]).unwrap();
        assert!((f1 - f2).abs() < 1e-10 * f1);
    }

    #[test]
    fn intersection_is_unpolarized_and_correlated() {
        let s =
            setup(2.0).with_filter(FilterSpec::step(8e-9)).with_compensation(CompensationSpec::optimal(2.0));
        let x = s.intersections().unwrap()[1];
        let c = s.cell(x).unwrap();
        assert!((c.s1 / c.s0).abs() < 1e-3);
        assert!((c.h1 - c.h2) / c.h1 < 0.05);
        let off =
            s.cell([0.0, s.maximum_gain_circle().unwrap().0 + s.maximum_gain_circle().unwrap().1]).unwrap();
        assert!((off.h1 - off.h2) / off.h1 > 0.5);
    }

    #[test]
    fn ordinary_ring_is_polarized() {
        let s = setup(2.0).with_filter(FilterSpec::step(8e-9));
        let (yc, r) = s.maximum_gain_circle().unwrap();
        let dop = s.noise_at(NoiseKind::Dop, [0.0, yc + r]).unwrap();
        assert!(dop > 0.5, "{dop}");
    }

    #[test]
    fn compensation_swaps_polarization_labels() {
        let base = setup(1.0).with_filter(FilterSpec::step(8e-9));
        let comp = base.with_compensation(CompensationSpec::with_ratio(0.0));
        let x = [1.0, 2.0];
        let a = base.cell(x).unwrap();
        let b = comp.cell(x).unwrap();
        assert!((a.s1 + b.s1).abs() < 1e-12 * a.s0);
        assert!((a.h1 - b.h1).abs() < 1e-12 * a.h1);
    }

    #[test]
    fn small_gain_symmetric_point_is_noiseless() {
        let s = setup(0.01)
            .with_filter(FilterSpec::step(5e-9))
            .with_compensation(CompensationSpec::optimal(0.01));
        let x = s.intersections().unwrap()[0];
        let r = s.noise_at(NoiseKind::S2Diff, x).unwrap();
        assert!(r < 1e-3, "{r}");
        assert!((optimal_length_ratio(0.01f64) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn noise_kind_names_roundtrip() {
        for k in ["s2diff", "s1sum", "single_pixel_s2", "dop", "intensity", "intensity_o", "intensity_e"] {
            assert_eq!(k.parse::<NoiseKind>().unwrap().to_string(), k);
        }
        assert!("s2".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn ratio_maps_ignore_detection_params() {
        let a = setup(2.0).with_filter(FilterSpec::step(8e-9));
        let mut b = a;
        b.detection = DetectionParams { detection_time: 3.7e-3, resolution_area: 1e-12 };
        let grid = MapGrid::new(6, 6, 6.0);
        for kind in [NoiseKind::S2Diff, NoiseKind::SinglePixelS2, NoiseKind::Dop] {
            let ma = noise_map(&a, kind, grid).unwrap();
            let mb = noise_map(&b, kind, grid).unwrap();
            assert_eq!(ma.values, mb.values);
        }
    }

    #[test]
    fn symmetric_maps_have_exact_parity() {
        let s = setup(2.0).with_filter(FilterSpec::step(8e-9));
        let grid = MapGrid::new(9, 7, 6.0);
        let m = noise_map(&s, NoiseKind::S2Diff, grid).unwrap();
        for idx in 0..m.values.len() {
            assert_eq!(m.values[idx].to_bits(), m.values[grid.partner_index(idx)].to_bits());
        }
        assert!(m.failures.is_empty());
    }

    #[test]
    fn ring_profile_endpoints() {
        let s = setup(2.0).with_filter(FilterSpec::step(5e-9));
        let p = s.ring_profile(NoiseKind::Intensity(IntensityComponent::Ordinary), 5).unwrap();
        let (yc, r) = s.maximum_gain_circle().unwrap();
        assert!((p[0].y - (yc - r)).abs() < 1e-12);
        assert!((p[4].y - (yc + r)).abs() < 1e-12);
        assert!(p.iter().all(|q| q.x >= -1e-12));
    }
}
