//! Truncated Fock-space state of one conjugate mode pair and brute-force
//! Stokes moments, used to cross-check the field-operator results.
//!
//! Modes are ordered (o ξ, e ξ, o −ξ, e −ξ). The state lives on the slice
//! |m, N−m, N−m, m⟩ with amplitudes γ_{N,m} = c_m(ξ)·c_{N−m}(−ξ).

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gain::{gain_from_mismatch, GainSample, PairGains};
use crate::scalar::Real;

pub const DEFAULT_N_MAX: usize = 60;
pub const HARD_N_MAX: usize = 200;

/// Gains of the mode ξ and its conjugate −ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePairGains<T> {
    pub u_plus: Complex<T>,
    pub v_plus: Complex<T>,
    pub u_minus: Complex<T>,
    pub v_minus: Complex<T>,
}

impl<T: Real> ModePairGains<T> {
    pub fn from_samples(plus: &GainSample<T>, minus: &GainSample<T>) -> Self {
        Self { u_plus: plus.u, v_plus: plus.v, u_minus: minus.u, v_minus: minus.v }
    }

    pub fn from_pair(p: &PairGains<T>) -> Self {
        Self::from_samples(&p.plus, &p.minus)
    }

    /// Gains for mismatches Δ(ξ) and Δ(−ξ) at parametric gain σ.
    pub fn from_mismatch(sigma: T, delta_plus: T, delta_minus: T) -> Self {
        Self::from_samples(
            &gain_from_mismatch(delta_plus, sigma, T::zero()),
            &gain_from_mismatch(delta_minus, sigma, T::zero()),
        )
    }

    /// Gains seen after a compensation crystal of relative length `ratio`.
    pub fn compensated(&self, ratio: T, delta_plus: T, delta_minus: T) -> Self {
        let half = T::lit(0.5);
        let pp = Complex::from_polar(T::one(), delta_plus * ratio * half);
        let pm = Complex::from_polar(T::one(), delta_minus * ratio * half);
        Self {
            u_plus: self.u_minus * pp,
            v_plus: self.v_minus * pp,
            u_minus: self.u_plus * pm,
            v_minus: self.v_plus * pm,
        }
    }

    pub fn r_plus(&self) -> T {
        self.v_plus.norm().asinh()
    }

    pub fn r_minus(&self) -> T {
        self.v_minus.norm().asinh()
    }

    pub fn psi_plus(&self) -> T {
        (self.u_plus * self.v_plus).arg() / T::lit(2.0)
    }

    pub fn psi_minus(&self) -> T {
        (self.u_minus * self.v_minus).arg() / T::lit(2.0)
    }

    /// Largest `| |U|² − |V|² − 1 |` of the two modes.
    pub fn unitarity_residual(&self) -> T {
        let a = (self.u_plus.norm_sqr() - self.v_plus.norm_sqr() - T::one()).abs();
        let b = (self.u_minus.norm_sqr() - self.v_minus.norm_sqr() - T::one()).abs();
        a.max(b)
    }

    /// c_0..=c_n for one side: c_k = (UV)^k / |U|^{2k+1}.
    fn coefficients(u: Complex<T>, v: Complex<T>, n: usize) -> Vec<Complex<T>> {
        let nu = u.norm_sqr();
        let step = u * v / nu;
        let mut out = Vec::with_capacity(n + 1);
        let mut c = Complex::new(T::one() / nu.sqrt(), T::zero());
        for _ in 0..=n {
            out.push(c);
            c *= step;
        }
        out
    }

    /// `1 − Σ_{N ≤ n_max} Σ_m |γ_{N,m}|²`.
    pub fn truncation_weight(&self, n_max: usize) -> T {
        let a: Vec<T> =
            Self::coefficients(self.u_plus, self.v_plus, n_max).iter().map(|c| c.norm_sqr()).collect();
        let b: Vec<T> =
            Self::coefficients(self.u_minus, self.v_minus, n_max).iter().map(|c| c.norm_sqr()).collect();
        let mut prefix = vec![T::zero(); n_max + 1];
        let mut acc = T::zero();
        for (k, &x) in b.iter().enumerate() {
            acc += x;
            prefix[k] = acc;
        }
        let kept = (0..=n_max).fold(T::zero(), |s, m| s + a[m] * prefix[n_max - m]);
        (T::one() - kept).max(T::zero())
    }

    /// Smallest cutoff whose truncation weight is below `target`, up to `cap`.
    pub fn required_n_max(&self, target: T, cap: usize) -> Option<usize> {
        (1..=cap).find(|&n| self.truncation_weight(n) < target)
    }
}

/// Amplitudes γ_{N,m}, 0 ≤ m ≤ N ≤ N_max.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPairState<T> {
    pub gains: ModePairGains<T>,
    pub n_max: usize,
    /// `gamma[N][m]`.
    pub gamma: Vec<Vec<Complex<T>>>,
    pub truncation_weight: T,
    /// Set when the truncation weight exceeds 1e-6.
    pub truncation_warning: bool,
}

/// Fills the amplitude table up to `n_max` photons.
pub fn build_pair_state<T: Real>(gains: ModePairGains<T>, n_max: usize) -> Result<TruncatedPairState<T>> {
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be >= 1"));
    }
    let cp = ModePairGains::coefficients(gains.u_plus, gains.v_plus, n_max);
    let cm = ModePairGains::coefficients(gains.u_minus, gains.v_minus, n_max);
    let gamma: Vec<Vec<Complex<T>>> =
        (0..=n_max).map(|n| (0..=n).map(|m| cp[m] * cm[n - m]).collect()).collect();
    let total = gamma.iter().flatten().fold(T::zero(), |s, g| s + g.norm_sqr());
    let weight = (T::one() - total).max(T::zero());
    Ok(TruncatedPairState {
        gains,
        n_max,
        gamma,
        truncation_weight: weight,
        truncation_warning: weight > T::lit(1e-6),
    })
}

/// Builds a state starting at `DEFAULT_N_MAX` and raising the cutoff until
/// the truncation weight drops below 1e-10 or `HARD_N_MAX` is reached.
pub fn build_pair_state_auto<T: Real>(gains: ModePairGains<T>) -> Result<TruncatedPairState<T>> {
    let n = gains.required_n_max(T::lit(1e-10), HARD_N_MAX).unwrap_or(HARD_N_MAX).max(DEFAULT_N_MAX);
    build_pair_state(gains, n)
}

type Basis = [u32; 4];
type Ket<T> = BTreeMap<Basis, Complex<T>>;

/// Number-diagonal part plus a_i†a_j hops.
#[derive(Debug, Clone)]
struct Operator<T> {
    diag: [i32; 4],
    hops: Vec<(Complex<T>, usize, usize)>,
}

impl<T: Real> Operator<T> {
    fn zero() -> Self {
        Self { diag: [0; 4], hops: Vec::new() }
    }

    fn plus(mut self, other: &Self, sign: i32) -> Self {
        for k in 0..4 {
            self.diag[k] += sign * other.diag[k];
        }
        let s = T::lit(sign as f64);
        self.hops.extend(other.hops.iter().map(|&(c, i, j)| (c * s, i, j)));
        self
    }

    fn apply(&self, psi: &Ket<T>) -> Ket<T> {
        let mut out: Ket<T> = BTreeMap::new();
        for (b, &amp) in psi {
            let d: i64 = (0..4).map(|k| self.diag[k] as i64 * b[k] as i64).sum();
            if d != 0 {
                *out.entry(*b).or_default() += amp * T::lit(d as f64);
            }
            for &(c, i, j) in &self.hops {
                if b[j] == 0 {
                    continue;
                }
                let mut nb = *b;
                let f = T::from_u32(b[j]).unwrap().sqrt() * T::from_u32(b[i] + 1).unwrap().sqrt();
                nb[j] -= 1;
                nb[i] += 1;
                *out.entry(nb).or_default() += amp * c * f;
            }
        }
        out
    }
}

const O_P: usize = 0;
const E_P: usize = 1;
const O_M: usize = 2;
const E_M: usize = 3;

/// Stokes operators S0..S3 of the pixel formed by modes (o, e).
fn stokes_ops<T: Real>(o: usize, e: usize) -> [Operator<T>; 4] {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut s0 = Operator::zero();
    s0.diag[o] = 1;
    s0.diag[e] = 1;
    let mut s1 = Operator::zero();
    s1.diag[o] = 1;
    s1.diag[e] = -1;
    let s2 = Operator { diag: [0; 4], hops: vec![(one, o, e), (one, e, o)] };
    let s3 = Operator { diag: [0; 4], hops: vec![(-i, o, e), (i, e, o)] };
    [s0, s1, s2, s3]
}

fn inner<T: Real>(a: &Ket<T>, b: &Ket<T>) -> Complex<T> {
    let mut acc = Complex::default();
    for (k, va) in a {
        if let Some(vb) = b.get(k) {
            acc += va.conj() * vb;
        }
    }
    acc
}

/// Means and covariances of the eight pixel Stokes operators
/// (S0..S3 at ξ, then S0..S3 at −ξ).
#[derive(Debug, Clone, PartialEq)]
pub struct StokesMoments<T> {
    pub mean_plus: [T; 4],
    pub mean_minus: [T; 4],
    /// Symmetrized covariance matrix of the eight operators.
    pub covariance: [[T; 8]; 8],
    /// Var[S_i(ξ) + S_i(−ξ)].
    pub var_sum: [T; 4],
    /// Var[S_i(ξ) − S_i(−ξ)].
    pub var_diff: [T; 4],
    pub truncation_weight: T,
}

impl<T: Real> StokesMoments<T> {
    pub fn var_plus(&self, i: usize) -> T {
        self.covariance[i][i]
    }

    pub fn var_minus(&self, i: usize) -> T {
        self.covariance[4 + i][4 + i]
    }
}

impl<T: Real> TruncatedPairState<T> {
    fn ket(&self) -> Ket<T> {
        let mut k = BTreeMap::new();
        for (n, row) in self.gamma.iter().enumerate() {
            for (m, &g) in row.iter().enumerate() {
                let (m, r) = (m as u32, (n - m) as u32);
                k.insert([m, r, r, m], g);
            }
        }
        k
    }

    /// Photon-number probability of the (N, m) component.
    pub fn probability(&self, n: usize, m: usize) -> T {
        self.gamma[n][m].norm_sqr()
    }
}

/// Moments by exact ladder-operator algebra on the truncated, renormalized state.
pub fn stokes_moments<T: Real>(state: &TruncatedPairState<T>) -> StokesMoments<T> {
    let psi = state.ket();
    let norm = inner(&psi, &psi).re;
    let plus = stokes_ops::<T>(O_P, E_P);
    let minus = stokes_ops::<T>(O_M, E_M);
    let ops: Vec<&Operator<T>> = plus.iter().chain(minus.iter()).collect();
    let images: Vec<Ket<T>> = ops.iter().map(|op| op.apply(&psi)).collect();
    let means: Vec<T> = images.iter().map(|v| inner(&psi, v).re / norm).collect();
    let mut cov = [[T::zero(); 8]; 8];
    for a in 0..8 {
        for b in a..8 {
            let c = inner(&images[a], &images[b]).re / norm - means[a] * means[b];
            cov[a][b] = c;
            cov[b][a] = c;
        }
    }
    let mut var_sum = [T::zero(); 4];
    let mut var_diff = [T::zero(); 4];
    for i in 0..4 {
        for (sign, slot) in [(1, &mut var_sum[i]), (-1, &mut var_diff[i])] {
            let op = plus[i].clone().plus(&minus[i], sign);
            let v = op.apply(&psi);
            let m = inner(&psi, &v).re / norm;
            *slot = inner(&v, &v).re / norm - m * m;
        }
    }
    StokesMoments {
        mean_plus: [means[0], means[1], means[2], means[3]],
        mean_minus: [means[4], means[5], means[6], means[7]],
        covariance: cov,
        var_sum,
        var_diff,
        truncation_weight: state.truncation_weight,
    }
}

/// (res_cond1, res_cond2): flatness of γ within each N, and
/// |tanh r(ξ)e^{2iψ(ξ)} − tanh r(−ξ)e^{2iψ(−ξ)}|.
pub fn eigenstate_residuals<T: Real>(state: &TruncatedPairState<T>) -> (T, T) {
    let mut r1 = T::zero();
    for row in &state.gamma {
        for w in row.windows(2) {
            r1 = r1.max((w[0] - w[1]).norm());
        }
    }
    let g = &state.gains;
    let t = |u: Complex<T>, v: Complex<T>| u * v / u.norm_sqr();
    let r2 = (t(g.u_plus, g.v_plus) - t(g.u_minus, g.v_minus)).norm();
    (r1, r2)
}

/// Closed-form per-mode moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPairMoments<T> {
    pub h1: T,
    pub h2: T,
    pub f1: T,
    pub n_plus: T,
    pub n_minus: T,
}

impl<T: Real> AnalyticPairMoments<T> {
    pub fn new(g: &ModePairGains<T>) -> Self {
        let (up, vp, um, vm) = (g.u_plus, g.v_plus, g.u_minus, g.v_minus);
        Self {
            h1: (vp * um).norm_sqr() + (vm * up).norm_sqr(),
            h2: T::lit(2.0) * (up.conj() * um * vp.conj() * vm).re,
            f1: (vp * up).norm_sqr() + (vm * um).norm_sqr(),
            n_plus: vp.norm_sqr(),
            n_minus: vm.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEntry<T> {
    pub name: &'static str,
    pub oracle: T,
    pub analytic: T,
    /// Relative difference, or absolute when the analytic value is zero.
    pub difference: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison<T> {
    pub n_max: usize,
    pub truncation_weight: T,
    pub res_cond1: T,
    pub res_cond2: T,
    pub entries: Vec<ComparisonEntry<T>>,
    pub moments: StokesMoments<T>,
}

impl<T: Real> OracleComparison<T> {
    pub fn max_difference(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, e| m.max(e.difference))
    }
}

/// Runs the Fock-space oracle and compares against the closed forms.
pub fn oracle_vs_analytic<T: Real>(gains: ModePairGains<T>, n_max: usize) -> Result<OracleComparison<T>> {
    let target = T::lit(1e-8);
    let w = gains.truncation_weight(n_max);
    if w >= target {
        let required = gains.required_n_max(target, 10 * HARD_N_MAX).unwrap_or(10 * HARD_N_MAX);
        return Err(Error::Truncation { weight: w.as_f64(), n_max, required });
    }
    let state = build_pair_state(gains, n_max)?;
    let m = stokes_moments(&state);
    let a = AnalyticPairMoments::new(&gains);
    let two = T::lit(2.0);
    let mut entries = Vec::new();
    // Differences are relative to the larger of the value and the size of the
    // terms that cancel in it.
    let mut push = |name, oracle: T, analytic: T, terms: T| {
        let den = analytic.abs().max(terms).max(T::min_positive_value());
        let difference = (oracle - analytic).abs() / den;
        entries.push(ComparisonEntry { name, oracle, analytic, difference });
    };
    let n = a.n_plus + a.n_minus;
    push("mean S0(+)", m.mean_plus[0], n, n);
    push("mean S1(+)", m.mean_plus[1], a.n_plus - a.n_minus, n);
    push("mean S0(-)", m.mean_minus[0], n, n);
    push("mean S1(-)", m.mean_minus[1], a.n_minus - a.n_plus, n);
    push("var S2(+)", m.var_plus(2), a.h1, a.h1);
    push("var S3(+)", m.var_plus(3), a.h1, a.h1);
    push("var S2(-)", m.var_minus(2), a.h1, a.h1);
    push("var S2 diff", m.var_diff[2], two * (a.h1 - a.h2), two * a.h1);
    push("var S3 diff", m.var_diff[3], two * (a.h1 - a.h2), two * a.h1);
    push("var S1(+)", m.var_plus(1), a.f1, a.f1);
    push("var S0(+)", m.var_plus(0), a.f1, a.f1);
    push("cov S1(+),S1(-)", m.covariance[1][5], -a.f1, a.f1);
    push("var S1 sum", m.var_sum[1], T::zero(), two * a.f1);
    push("var S0 diff", m.var_diff[0], T::zero(), two * a.f1);
    push("var S1 diff", m.var_diff[1], T::lit(4.0) * a.f1, T::lit(4.0) * a.f1);
    let (r1, r2) = eigenstate_residuals(&state);
    Ok(OracleComparison {
        n_max,
        truncation_weight: state.truncation_weight,
        res_cond1: r1,
        res_cond2: r2,
        entries,
        moments: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_state() {
        let g = ModePairGains::<f64>::from_mismatch(0.0, 0.3, -0.2);
        let s = build_pair_state(g, 10).unwrap();
        assert!((s.gamma[0][0].norm() - 1.0).abs() < 1e-15);
        assert!(s.gamma.iter().flatten().skip(1).all(|c| c.norm() == 0.0));
        let m = stokes_moments(&s);
        assert!(m.mean_plus.iter().chain(&m.mean_minus).all(|&x| x == 0.0));
        assert!(m.covariance.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn symmetric_r1_table() {
        // Δ = 0 gives U = cosh σ, so r = σ.
        let g = ModePairGains::<f64>::from_mismatch(1.0, 0.0, 0.0);
        let s = build_pair_state(g, 30).unwrap();
        let t = 1f64.tanh();
        for n in 0..=30 {
            let expected = t.powi(2 * n as i32) / 1f64.cosh().powi(4);
            for m in 0..=n {
                assert!((s.probability(n, m) - expected).abs() < 1e-14 * (1.0 + expected));
            }
        }
        let (r1, r2) = eigenstate_residuals(&s);
        assert!(r1 < 1e-14 && r2 < 1e-14);
    }

    #[test]
    fn asymmetric_table_is_monotone() {
        let g = ModePairGains::<f64>::from_mismatch(1.0, 0.4, -1.1);
        assert!(g.r_plus() != g.r_minus());
        let s = build_pair_state(g, 20).unwrap();
        let up = g.r_plus() > g.r_minus();
        for row in &s.gamma[2..] {
            for w in row.windows(2) {
                assert_eq!(w[1].norm() > w[0].norm(), up);
            }
        }
    }

    #[test]
    fn truncation_weight_matches_table() {
        let g = ModePairGains::<f64>::from_mismatch(1.2, 0.5, -0.5);
        let s = build_pair_state(g, 25).unwrap();
        assert!((s.truncation_weight - g.truncation_weight(25)).abs() < 1e-13);
        assert!(s.truncation_warning);
        let a = build_pair_state_auto(g).unwrap();
        assert!(a.truncation_weight < 1e-10 && a.n_max >= DEFAULT_N_MAX);
    }

    #[test]
    fn sum_s1_is_sharp() {
        let g = ModePairGains::<f64>::from_mismatch(0.9, 1.7, -0.3);
        let m = stokes_moments(&build_pair_state(g, 40).unwrap());
        assert_eq!(m.var_sum[1], 0.0);
        assert_eq!(m.var_diff[0], 0.0);
    }

    #[test]
    fn compensation_restores_symmetry() {
        // On the walk-off axis Δ(ξ) = d0 + w, Δ(−ξ) = d0 − w.
        let sigma = 0.8;
        let (dp, dm) = (0.6, -0.4);
        let g = ModePairGains::<f64>::from_mismatch(sigma, dp, dm);
        let s = build_pair_state(g, 40).unwrap();
        let (_, r2) = eigenstate_residuals(&s);
        assert!(r2 > 1e-3);
        let opt = crate::gain::optimal_length_ratio(sigma);
        let c = g.compensated(opt, dp, dm);
        let (_, rc) = eigenstate_residuals(&build_pair_state(c, 40).unwrap());
        assert!(rc < 0.1 * r2, "{rc} {r2}");
    }

    #[test]
    fn refuses_insufficient_cutoff() {
        let g = ModePairGains::<f64>::from_mismatch(2.0, 0.0, 0.0);
        match oracle_vs_analytic(g, 20).unwrap_err() {
            Error::Truncation { required, .. } => {
                assert!(required > 20);
                assert!(g.truncation_weight(required) < 1e-8);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let g = ModePairGains::<f64>::from_mismatch(1.0, 0.0, 0.0);
        let c = oracle_vs_analytic(g, 60).unwrap();
        assert!(c.max_difference() < 1e-6, "{:?}", c.entries);
        let g = ModePairGains::<f64>::from_mismatch(1.2, 0.5, -0.5);
        let c = oracle_vs_analytic(g, 60).unwrap();
        let e = c.entries.iter().find(|e| e.name == "var S2 diff").unwrap();
        assert!(e.difference < 1e-6, "{e:?}");
    }

    #[test]
    fn symmetric_difference_noise_vanishes() {
        let g = ModePairGains::<f64>::from_mismatch(1.0, 0.3, 0.3);
        let m = stokes_moments(&build_pair_state(g, 60).unwrap());
        assert!(m.var_diff[2] < 1e-8 && m.var_diff[3] < 1e-8);
    }
}
