use num_complex::Complex64;
use proptest::prelude::*;
use ultralab::circle::{
    lemma_aaa_minimize, ln_chain_constant, ln_phi, partial_sum_projector, project_partial_sum, q_norm, q_norm_on,
    qhat_norm, star_product, FourierSeq, TailCertificate,
};
use ultralab::logdomain::{log_abs_diff, log_add, LogComplex};
use ultralab::mollifier::flat::certify_flatness;
use ultralab::mollifier::FlatKind;
use ultralab::quadrature::{composite, gauss_legendre, uniform_breaks};
use ultralab::sequences::{ultra_seminorm, ultrapseudometric, Thresholds};
use ultralab::series::BigRational;
use ultralab::{Net, Weight};

const N: u64 = 64;

fn log_net() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-30.0f64..30.0, N as usize)
}

fn net_of(logs: &[f64]) -> Net {
    Net::from_logs(logs.iter().enumerate().map(|(i, &l)| (i as u64 + 1, l)).collect()).unwrap()
}

fn laurent(k_max: u64) -> impl Strategy<Value = FourierSeq> {
    prop::collection::vec((-8.0f64..2.0, -3.2f64..3.2), 2 * k_max as usize + 1).prop_map(|v| {
        let c = v.into_iter().map(|(l, a)| LogComplex::from_polar_log(l, a)).collect();
        FourierSeq::from_coefficients(c, TailCertificate::Exact).unwrap()
    })
}

fn values(c: &FourierSeq) -> Vec<Complex64> {
    c.coefficients().iter().map(|z| z.to_complex()).collect()
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * x.norm().max(y.norm()).max(1e-300))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn log_add_matches_direct_sum(a in -50.0f64..50.0, b in -50.0f64..50.0) {
        let direct = (a.exp() + b.exp()).ln();
        prop_assert!((log_add(a, b) - direct).abs() < 1e-13 * direct.abs().max(1.0));
        prop_assert_eq!(log_add(a, b), log_add(b, a));
        prop_assert_eq!(log_add(a, f64::NEG_INFINITY), a);
    }

    #[test]
    fn log_abs_diff_matches_direct(a in -20.0f64..20.0, d in 1e-3f64..10.0) {
        let b = a - d;
        let direct = (a.exp() - b.exp()).abs().ln();
        prop_assert!((log_abs_diff(a, b) - direct).abs() < 1e-11 * direct.abs().max(1.0));
        prop_assert_eq!(log_abs_diff(a, a), f64::NEG_INFINITY);
    }

    #[test]
    fn ultrapseudometric_satisfies_strong_triangle(
        f in log_net(), g in log_net(), h in log_net(), m in 0.5f64..4.0,
    ) {
        let w = Weight::new(m).unwrap();
        let th = Thresholds::default();
        let (f, g, h) = (net_of(&f), net_of(&g), net_of(&h));
        let fh = ultrapseudometric(&f, &h, &w, &th).unwrap();
        let fg = ultrapseudometric(&f, &g, &w, &th).unwrap();
        let gh = ultrapseudometric(&g, &h, &w, &th).unwrap();
        prop_assert!(fh.l_hat <= fg.l_hat.max(gh.l_hat) + fh.slack + 1e-12);
        let ff = ultrapseudometric(&f, &f, &w, &th).unwrap();
        prop_assert_eq!(ff.l_hat, f64::NEG_INFINITY);
    }

    #[test]
    fn powers_scale_the_estimate_and_keep_the_argmax(
        logs in log_net(), a in 0.1f64..10.0, m in 0.5f64..4.0,
    ) {
        let w = Weight::new(m).unwrap();
        let th = Thresholds::default();
        let base = ultra_seminorm(&net_of(&logs), &w, &th).unwrap();
        let scaled_logs: Vec<f64> = logs.iter().map(|l| a * l).collect();
        let scaled = ultra_seminorm(&net_of(&scaled_logs), &w, &th).unwrap();
        for (p, q) in base.window_trace.iter().zip(&scaled.window_trace) {
            prop_assert!((q.l_hat - a * p.l_hat).abs() <= 1e-12 * (a * p.l_hat).abs().max(1.0));
        }
    }

    #[test]
    fn constant_factors_stay_within_slack(logs in log_net(), c in -5.0f64..5.0, m in 0.5f64..4.0) {
        let w = Weight::new(m).unwrap();
        let th = Thresholds::default();
        let base = ultra_seminorm(&net_of(&logs), &w, &th).unwrap();
        let shifted: Vec<f64> = logs.iter().map(|l| l + c).collect();
        let moved = ultra_seminorm(&net_of(&shifted), &w, &th).unwrap();
        prop_assert!((moved.l_hat - base.l_hat).abs() <= c.abs() * w.r(N / 2) + 1e-12);
    }

    #[test]
    fn closed_form_nets_are_recovered(a in -5.0f64..5.0, m in 0.5f64..4.0) {
        let w = Weight::new(m).unwrap();
        let logs: Vec<f64> = (1..=N).map(|n| a * w.inv_r(n)).collect();
        let e = ultra_seminorm(&net_of(&logs), &w, &Thresholds::default()).unwrap();
        for p in &e.window_trace {
            prop_assert!((p.l_hat - a).abs() < 1e-12);
        }
    }

    #[test]
    fn star_product_is_commutative_and_associative(a in laurent(6), b in laurent(6), c in laurent(6)) {
        prop_assert!(close(&values(&star_product(&a, &b)), &values(&star_product(&b, &a)), 1e-14));
        let left = star_product(&star_product(&a, &b), &c);
        let right = star_product(&a, &star_product(&b, &c));
        prop_assert!(close(&values(&left), &values(&right), 1e-13));
    }

    #[test]
    fn all_ones_is_the_identity(a in laurent(6)) {
        let ones = FourierSeq::from_coefficients(vec![LogComplex::one(); 13], TailCertificate::Exact).unwrap();
        prop_assert!(close(&values(&star_product(&a, &ones)), &values(&a), 1e-15));
    }

    #[test]
    fn projection_is_the_star_product_with_psi_n(a in laurent(24), n in 1u64..100, m in 1.5f64..4.0) {
        let w = Weight::new(m).unwrap();
        let p = project_partial_sum(&a, n, &w).unwrap();
        let s = star_product(&a, &partial_sum_projector(n, &w));
        prop_assert!(close(&values(&p), &values(&s), 1e-15));
        // idempotent
        let pp = project_partial_sum(&p, n, &w).unwrap();
        prop_assert!(close(&values(&pp), &values(&p), 1e-15));
    }

    #[test]
    fn qhat_is_monotone_in_lambda(a in laurent(10), l1 in 1.01f64..3.0, dl in 0.0f64..2.0) {
        prop_assert!(qhat_norm(&a, l1) <= qhat_norm(&a, l1 + dl));
    }

    #[test]
    fn qhat_of_star_product_is_bounded(a in laurent(8), b in laurent(8), lambda in 1.01f64..3.0) {
        let sup_b = b.coefficients().iter().map(|z| z.ln_abs).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(qhat_norm(&star_product(&a, &b), lambda) <= qhat_norm(&a, lambda) + sup_b + 1e-12);
    }

    #[test]
    fn grid_refinement_stays_within_the_resolution_bound(a in laurent(20), lambda in 1.01f64..3.0) {
        let coarse = q_norm_on(&a, lambda, 128).unwrap();
        let fine = q_norm_on(&a, lambda, 256).unwrap();
        prop_assert!(fine.q_val >= coarse.q_val - 1e-12);
        prop_assert!(fine.q_val <= coarse.q_val + coarse.grid_resolution + 1e-12);
    }

    #[test]
    fn annulus_norm_chain_holds_per_element(a in laurent(10), mu in 1.05f64..2.0, gap in 0.05f64..2.0) {
        let lambda = mu + gap;
        let qhat = qhat_norm(&a, lambda);
        let q_lambda = q_norm(&a, lambda).unwrap().q_val;
        let q_mu = q_norm(&a, mu).unwrap().q_val;
        prop_assert!(qhat <= q_lambda + 1e-12);
        prop_assert!(ln_chain_constant(lambda, mu) + q_mu <= qhat + 1e-12);
    }

    #[test]
    fn minimizer_bounds_hold_off_grid(m in 0.05f64..0.95, ln_rho in 1.05f64..12.0) {
        let rho = ln_rho.exp();
        let r = lemma_aaa_minimize(m, rho).unwrap();
        prop_assert!(r.residual < 1e-12);
        prop_assert!(r.bounds.lemma_holds());
        prop_assert!(r.bounds.closed_form_rel < 1e-10);
        let h = 1e-3 * r.t_rho;
        prop_assert!(ln_phi(m, rho, r.t_rho + h) >= r.ln_phi_direct - 1e-9 * r.ln_phi_direct.abs());
        if r.t_rho - h >= 0.5 {
            prop_assert!(ln_phi(m, rho, r.t_rho - h) >= r.ln_phi_direct - 1e-9 * r.ln_phi_direct.abs());
        }
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly(
        coeffs in prop::collection::vec(-3.0f64..3.0, 1..12), a in -2.0f64..0.0, len in 0.1f64..3.0, panels in 1usize..5,
    ) {
        let b = a + len;
        let order = coeffs.len().div_ceil(2);
        let rule = composite(&uniform_breaks(a, b, panels), &gauss_legendre::<f64>(order));
        let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let antideriv = |x: f64| coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32 + 1) / (i as f64 + 1.0)).sum::<f64>();
        let exact = antideriv(b) - antideriv(a);
        prop_assert!((rule.integrate(p) - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flat_profiles_vanish_to_order_2n_minus_1(n in 1u32..=16, der in any::<bool>()) {
        let kind = if der { FlatKind::K } else { FlatKind::H };
        let r = certify_flatness::<BigRational>(kind, n, None, 16).unwrap();
        prop_assert!(r.vanishing);
        prop_assert_eq!(r.value_at_zero, 1.0);
        prop_assert_eq!(r.first_nonzero, Some(2 * n as usize));
    }
}
