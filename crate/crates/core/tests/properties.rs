use pdc_core::crystal::{refractive_index, Crystal, Polarization, SellmeierSet};
use pdc_core::farfield::MapGrid;
use pdc_core::fockoracle::{build_pair_state, stokes_moments, AnalyticPairMoments, ModePairGains};
use pdc_core::gain::{gain_from_mismatch, optimal_length_ratio, MismatchMode, PairGains};
use pdc_core::pmcurves::{correlated_ellipse, pm_locus, Branch};
use pdc_core::stokes::FilterSpec;
use proptest::prelude::*;

fn crystal() -> Crystal<f64> {
    Crystal::bbo_default()
}

/// Cholesky with a small diagonal allowance; fails on a clearly negative pivot.
fn is_psd(m: &[[f64; 8]; 8], slack: f64) -> bool {
    let mut l = [[0.0f64; 8]; 8];
    for i in 0..8 {
        for j in 0..=i {
            let s = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s < -slack {
                    return false;
                }
                l[i][i] = s.max(0.0).sqrt();
            } else if l[j][j] > slack.sqrt() {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gains_are_unitary(delta in -50.0f64..50.0, sigma in 0.0f64..3.0, phase in -10.0f64..10.0) {
        let g = gain_from_mismatch(delta, sigma, phase);
        let scale = g.u.norm_sqr().max(1.0);
        prop_assert!((g.u.norm_sqr() - g.v.norm_sqr() - 1.0).abs() < 1e-12 * scale);
    }

    #[test]
    fn pair_gains_are_unitary(
        qx in -10.0f64..10.0, qy in -10.0f64..10.0, a in -20.0f64..20.0, sigma in 0.0f64..2.5,
    ) {
        let c = crystal();
        let s = &c.scales;
        let p = PairGains::new(&c, [qx * s.q0, qy * s.q0], a / s.tau_coh, sigma, MismatchMode::Paraxial).unwrap();
        prop_assert!(p.norm_residual() < 1e-10);
        prop_assert!(p.commutator_residual() < 1e-10);
    }

    #[test]
    fn moments_ignore_global_phase(
        dp in -5.0f64..5.0, dm in -5.0f64..5.0, sigma in 0.0f64..2.0, phase in -6.0f64..6.0,
    ) {
        let base = AnalyticPairMoments::new(&ModePairGains::from_samples(
            &gain_from_mismatch(dp, sigma, 0.0),
            &gain_from_mismatch(dm, sigma, 0.0),
        ));
        let shifted = AnalyticPairMoments::new(&ModePairGains::from_samples(
            &gain_from_mismatch(dp, sigma, phase),
            &gain_from_mismatch(dm, sigma, phase),
        ));
        let tol = 1e-10 * base.h1.max(1.0);
        prop_assert!((base.h1 - shifted.h1).abs() < tol);
        prop_assert!((base.h2 - shifted.h2).abs() < tol);
        prop_assert!((base.f1 - shifted.f1).abs() < tol);
    }

    #[test]
    fn extraordinary_index_decreases_with_angle(t1 in 0.0f64..1.5, dt in 0.0f64..0.07, l in 0.3f64..1.5) {
        let set = SellmeierSet::<f64>::bbo();
        let lam = l * 1e-6;
        let a = refractive_index(&set, Polarization::Extraordinary, lam, t1).unwrap();
        let b = refractive_index(&set, Polarization::Extraordinary, lam, t1 + dt).unwrap();
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn paraxial_kz_tracks_exact(
        r in 0.0f64..1.0, phi in 0.0f64..std::f64::consts::TAU, a in -1.0f64..1.0,
    ) {
        let c = crystal();
        let s = &c.scales;
        let q = [r * s.q0 * phi.cos(), r * s.q0 * phi.sin()];
        let w = a / s.tau_coh;
        for pol in [Polarization::Ordinary, Polarization::Extraordinary] {
            let exact = c.kz_exact(pol, q, w).unwrap();
            let par = c.kz_paraxial(pol, q, w);
            prop_assert!(((exact - par) * s.length).abs() < 0.05);
        }
    }

    #[test]
    fn optimal_length_decreases_with_gain(s1 in 0.0f64..5.0, ds in 1e-3f64..1.0) {
        let a = optimal_length_ratio(s1);
        let b = optimal_length_ratio(s1 + ds);
        prop_assert!(b < a);
        prop_assert!(a <= 0.5 && b > 0.0);
    }

    #[test]
    fn filters_are_symmetric_and_bounded(fwhm in 0.1f64..60.0, w in 0.0f64..1e14, gaussian in any::<bool>()) {
        let f = if gaussian { FilterSpec::gaussian(fwhm * 1e-9) } else { FilterSpec::step(fwhm * 1e-9) };
        let lam = 702e-9;
        let t = f.transmission(w, lam);
        prop_assert_eq!(t, f.transmission(-w, lam));
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn partner_is_an_involution(nx in 1usize..40, ny in 1usize..40, seed in any::<u64>()) {
        let g = MapGrid::new(nx, ny, 8.0);
        let idx = (seed as usize) % (nx * ny);
        prop_assert_eq!(g.partner_index(g.partner_index(idx)), idx);
        let (i, j) = g.cell_of(idx);
        let (pi, pj) = g.cell_of(g.partner_index(idx));
        let (a, b) = (g.center(i, j), g.center(pi, pj));
        prop_assert_eq!(a[0], -b[0]);
        prop_assert_eq!(a[1], -b[1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pair_state_reproduces_amplitudes(sigma in 0.0f64..1.0, dp in -2.0f64..2.0, dm in -2.0f64..2.0) {
        let g = ModePairGains::from_mismatch(sigma, dp, dm);
        let st = build_pair_state(g, 40).unwrap();
        let mut total = 0.0;
        for (n, row) in st.gamma.iter().enumerate() {
            for (m, amp) in row.iter().enumerate() {
                total += amp.norm_sqr();
                prop_assert!((st.probability(n, m) - amp.norm_sqr()).abs() < 1e-15);
            }
        }
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!((total + st.truncation_weight - 1.0).abs() < 1e-12);
        let c = |k: usize, u: num_complex::Complex<f64>, v: num_complex::Complex<f64>| {
            (u * v).powu(k as u32) / u.norm().powi(2 * k as i32 + 1)
        };
        let expect = c(1, g.u_plus, g.v_plus) * c(2, g.u_minus, g.v_minus);
        prop_assert!((st.gamma[3][1] - expect).norm() < 1e-12);
    }

    #[test]
    fn oracle_moments_are_physical(sigma in 0.0f64..1.0, dp in -2.0f64..2.0, dm in -2.0f64..2.0) {
        let g = ModePairGains::from_mismatch(sigma, dp, dm);
        let st = build_pair_state(g, 50).unwrap();
        let m = stokes_moments(&st);
        prop_assert!(is_psd(&m.covariance, 1e-9));
        for (mean, i) in [(m.mean_plus, 0), (m.mean_minus, 4)] {
            let v2 = m.covariance[i + 2][i + 2];
            let v3 = m.covariance[i + 3][i + 3];
            prop_assert!(v2 * v3 >= mean[1] * mean[1] - 1e-9);
        }
        let n = 2.0 * (g.v_plus.norm_sqr() + g.v_minus.norm_sqr());
        prop_assert!((m.mean_plus[0] + m.mean_minus[0] - n).abs() < 1e-8 * n.max(1.0));
    }

    #[test]
    fn correlated_points_have_matched_pairs(sigma in 0.1f64..2.0, k in 0usize..41) {
        let c = crystal();
        let s = &c.scales;
        let locus = correlated_ellipse(s, 5.0 / s.tau_coh, 41);
        prop_assume!(!locus.points.is_empty());
        let p = locus.points[k % locus.points.len()];
        let pair = PairGains::new(&c, p.q, p.omega, sigma, MismatchMode::Paraxial).unwrap();
        let am = AnalyticPairMoments::new(&ModePairGains::from_pair(&pair));
        prop_assert!((am.h1 - am.h2) / am.h1 < 0.3);
    }
}

#[test]
fn phase_matching_loci_are_continuous() {
    let c = crystal();
    for branch in [Branch::Signal, Branch::Idler] {
        for lam in [697e-9, 702e-9, 707e-9] {
            let curve = pm_locus(&c, lam, branch, MismatchMode::Exact, 720).unwrap();
            assert_eq!(curve.samples.len(), 720, "{branch} {lam}");
            for w in curve.samples.windows(2) {
                assert!((w[1].1 - w[0].1).abs() < 2e-3, "{branch} {lam}: jump {:?}", w);
            }
        }
    }
}
