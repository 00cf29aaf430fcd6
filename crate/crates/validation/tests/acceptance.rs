//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultralab::circle::{
    classify_am, embed_hyperfunction, embedding_consistency_check, lemma_aaa_minimize, prop_aba_check,
    random_laurent_net, CoeffGenerator, FourierSeq, Membership,
};
use ultralab::embedding::{
    moderate_growth_experiment, null_decay_experiment, null_decay_gaussian_control, product_consistency_check,
    weak_equality_experiment, weak_equality_shift_control, DecayFit, NetSpec, UltraDistribution,
};
use ultralab::gevrey::catalog::CatalogFunction;
use ultralab::gevrey::GevreyParams;
use ultralab::mollifier::flat::{certify_flatness, certify_uniform_bounds};
use ultralab::mollifier::{moment_ladder, FlatKind, GridSpec, MollifierKind, MollifierNet};
use ultralab::sequences::{ultra_seminorm, ultrapseudometric, Thresholds, Verdict, DEFAULT_KS};
use ultralab::series::BigRational;
use ultralab::{Net, Result, Weight};

/// Outcome of one criterion: pass flag and a one-line summary.
type Check = Result<(bool, String)>;

type Criterion = (&'static str, fn() -> Check);

const NS: [u64; 6] = [8, 16, 32, 64, 128, 256];

fn trace(f: &DecayFit) -> String {
    let t: Vec<String> = f.estimate.window_trace.iter().map(|p| format!("{:.3}", p.l_hat)).collect();
    format!("[{}]", t.join(", "))
}

/// Strictly decreasing over the three windows with final value below `−τ`.
fn null_protocol(f: &DecayFit, th: &Thresholds) -> bool {
    let t = &f.estimate.window_trace;
    let decreasing = t.windows(2).all(|p| p[1].l_hat < p[0].l_hat) && t[2].l_hat < -th.tau;
    f.verdict == Verdict::Null && (decreasing || t[2].l_hat == f64::NEG_INFINITY)
}

fn mollifier_certification() -> Check {
    let mut flat_ok = 0;
    for kind in [FlatKind::H, FlatKind::K] {
        for n in 1..=16 {
            let r = certify_flatness::<BigRational>(kind, n, None, 16)?;
            flat_ok += usize::from(r.vanishing && r.order_cap == 2 * n as usize - 1 && r.value_at_zero == 1.0);
        }
    }
    let bounds = certify_uniform_bounds(FlatKind::H, 1..=40);
    let (bound_ok, detail) = match &bounds {
        Ok(r) => {
            let ok = r.entries.len() == 40 && r.entries.iter().all(|e| e.bound < 3.0 && e.log_bound < 1.0);
            (ok, format!("max Re exponent {:.4}, max sigma_2 bound {:.4}", r.max_log_bound, r.max_log_bound.exp()))
        }
        Err(e) => (false, e.to_string()),
    };
    Ok((flat_ok == 32 && bound_ok, format!("flatness exact {flat_ok}/32; n = 1..40: {detail}")))
}

fn moment_ladders() -> Check {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for kind in [MollifierKind::Pow, MollifierKind::Der] {
        let net = MollifierNet::new(kind, 2.0, GridSpec::default());
        for n in [4u64, 9, 16, 25] {
            let table = net.get(n)?;
            let upto = (n as f64).sqrt().floor() as usize + 1;
            let checks = moment_ladder(&table, Some(upto))?;
            ok &= checks.len() == upto + 1 && checks.iter().all(|c| c.within_certificate && c.dual_rel < 1e-10);
            worst = checks.iter().map(|c| c.dual_rel).fold(worst, f64::max);
            checked += checks.len();
        }
    }
    Ok((ok, format!("{checked} moments within certificate, worst dual rel {worst:.2e}")))
}

fn null_decay() -> Check {
    let th = Thresholds::default();
    let psi = CatalogFunction::bump(1.5);
    let params = GevreyParams::new(2.0, 1.0, 1.0, 30)?;
    let w = Weight::from_exponent(0.5)?;
    let nus = [1.0, 2.0, 4.0];
    let fits =
        null_decay_experiment(&psi, &NetSpec::new(MollifierKind::Pow, 2.0), &params, &nus, &NS, &w, &DEFAULT_KS, &th)?;
    let control = null_decay_gaussian_control(&psi, &params, &nus, &NS, &w, &DEFAULT_KS, &th)?;
    let ok = fits.iter().all(|f| null_protocol(f, &th)) && control.iter().all(|f| !null_protocol(f, &th));
    let traces: Vec<String> = fits.iter().map(|f| format!("nu {}: {}", f.nu, trace(f))).collect();
    let ctl: Vec<String> = control.iter().map(|f| format!("{:?}", f.verdict)).collect();
    Ok((ok, format!("{}; gaussian control {}", traces.join(", "), ctl.join("/"))))
}

fn moderate_and_weak_equality() -> Check {
    let th = Thresholds::default();
    let der = NetSpec::new(MollifierKind::Der, 2.0);
    let params = GevreyParams::new(2.0, 1.0, 1.0, 30)?;
    let w = Weight::from_exponent(1.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [0usize, 2] {
        let r = moderate_growth_experiment(&UltraDistribution::DeltaDerivative { k }, &der, &params, &NS, &w, &th)?;
        let l: Vec<f64> = r.fit.estimate.window_trace.iter().map(|p| p.l_hat).collect();
        let (lo, hi) = l.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        ok &= r.fit.verdict == Verdict::Moderate && lo >= -th.tau && hi <= th.big && hi - lo <= th.max_oscillation;
        parts.push(format!("delta^({k}) {:?} {}", r.fit.verdict, trace(&r.fit)));
    }
    let psi = CatalogFunction::bump(1.5);
    let a = NetSpec::new(MollifierKind::Pow, 2.0);
    let b = NetSpec { g_offset: 1, ..a };
    let delta = UltraDistribution::DeltaDerivative { k: 0 };
    let weak = weak_equality_experiment(&delta, &a, &b, &psi, &NS, &DEFAULT_KS, &th)?;
    let swept = weak.fit.k_sweep.as_ref().is_some_and(|s| s.passed && s.ks == DEFAULT_KS);
    ok &= !weak.identical_nets && swept && weak.fit.is_null();
    let control = weak_equality_shift_control(&a, &psi, 1.0, &NS, &DEFAULT_KS, &th)?;
    ok &= !control.fit.is_null();
    parts.push(format!("pairing k-sweep passed {swept} {}", trace(&weak.fit)));
    parts.push(format!("shift control {:?}", control.fit.verdict));
    Ok((ok, parts.join("; ")))
}

fn product_consistency() -> Check {
    let th = Thresholds::default();
    let phi = CatalogFunction::bump(1.5);
    let psi = CatalogFunction::Bump { order: 1.5, center: 0.25, half_width: 1.0 };
    let params = GevreyParams::new(2.0, 1.0, 1.0, 30)?;
    let fits = product_consistency_check(
        &phi,
        &psi,
        &NetSpec::new(MollifierKind::Pow, 2.0),
        &params,
        &[1.0],
        &NS,
        &Weight::from_exponent(0.5)?,
        &DEFAULT_KS,
        &th,
    )?;
    Ok((fits.iter().all(|f| null_protocol(f, &th)), format!("defect trace {}", trace(&fits[0]))))
}

fn lemma_grid() -> Check {
    let (mut lemma_ok, mut remark_ok, mut total) = (0, 0, 0);
    let mut worst_margin = f64::INFINITY;
    for m in [0.3, 0.5, 0.7, 0.9] {
        for rho in [3.0, 10.0, 100.0, 1000.0] {
            total += 1;
            let r = lemma_aaa_minimize(m, rho)?;
            let b = &r.bounds;
            let holds = r.residual < 1e-12
                && b.gap_lower > 0.0
                && b.gap_upper > 0.0
                && b.phi_lower > 0.0
                && b.phi_upper > 0.0
                && b.closed_form_rel < 1e-10;
            lemma_ok += usize::from(holds);
            remark_ok += usize::from(b.shifted_bound_holds());
            worst_margin = worst_margin.min(b.shifted_margin);
        }
    }
    Ok((
        lemma_ok == total && remark_ok == total,
        format!(
            "residual, gap, phi and closed-form bounds hold on {lemma_ok}/{total}; \
             shifted-point bound phi(rho^(1/m)+1/2) <= sqrt(rho) e^(-m rho^(1/m)) holds on {remark_ok}/{total} \
             (most negative log margin {worst_margin:.3e})"
        ),
    ))
}

fn am_classifier() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, beta) in [(0.5, 2.0), (0.5, 0.5), (0.7, 1.0)] {
        let c = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: -beta, p: 1.0 / m }, 4096);
        let r = classify_am(&c, m, ultralab::circle::TAU_C)?;
        let target = (-beta).exp();
        let est_rel = (r.estimate - target).abs() / target;
        let nu_target = (m / beta).powf(m);
        let nu_rel = match r.membership {
            Membership::Member { nu } => (nu - nu_target).abs() / nu_target,
            _ => f64::INFINITY,
        };
        ok &= est_rel <= 0.02 && nu_rel <= 0.03;
        parts.push(format!("(m {m}, beta {beta}) est rel {est_rel:.1e}, nu rel {nu_rel:.1e}"));
    }
    let fin = FourierSeq::sparse(4096, &[(-7, 1.0), (3, -2.0), (11, 0.5)])?;
    let r = classify_am(&fin, 0.5, ultralab::circle::TAU_C)?;
    ok &= r.membership == Membership::FiniteSupport { nu: 11 };
    let ones = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 0.0, p: 0.0 }, 4096);
    let r1 = classify_am(&ones, 0.5, ultralab::circle::TAU_C)?;
    ok &= r1.membership == Membership::NotMember;
    parts.push(format!("finite support {:?}; c_k = 1 {:?}", r.membership, r1.membership));
    Ok((ok, parts.join("; ")))
}

fn annulus_chain() -> Check {
    let th = Thresholds::default();
    let w = Weight::new(2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut per_n, mut ultra) = (0, 0);
    let mut max_gap = f64::NEG_INFINITY;
    for _ in 0..200 {
        let net = random_laurent_net(&mut || rng.gen::<f64>(), 16, 64);
        if let Ok(r) = prop_aba_check(&net, 1.5, 2.0, &w, &th) {
            per_n += 1;
            ultra += usize::from(r.ultra_chain_holds);
            max_gap = r.rows.iter().map(|x| x.cauchy_gap).fold(max_gap, f64::max);
        }
    }
    Ok((
        per_n == 200 && ultra == 200,
        format!("per-n {per_n}/200, ultra-norm {ultra}/200, max ln(qhat/q) {max_gap:.3}"),
    ))
}

fn circle_embedding() -> Check {
    let th = Thresholds::default();
    let w = Weight::new(2.0)?;
    let h = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 1.0, p: 0.5 }, 8192);
    let e = embed_hyperfunction(&h, &w, 1.5, 512, &th)?;
    let bound_ok = e.estimate.value <= 1.5f64.powi(2) + 0.05;
    let f = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: -std::f64::consts::LN_2, p: 2.0 }, 64);
    let null = embedding_consistency_check(&f, Some(&f), &w, 2.0, 512, &th)?;
    let geo = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 0.99f64.ln(), p: 1.0 }, 64);
    let control = embedding_consistency_check(&geo, None, &w, 1.02, 512, &th)?;
    let ok = bound_ok && null.verdict == Verdict::Null && control.verdict != Verdict::Null;
    Ok((
        ok,
        format!(
            "e^sqrt|k| estimate {:.4} <= 2.30; 0.5^(k^2) {:?}; geometric control {:?}",
            e.estimate.value, null.verdict, control.verdict
        ),
    ))
}

fn estimator_properties() -> Check {
    let th = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n_max = 256u64;
    let random_net =
        |rng: &mut ChaCha8Rng| Net::from_logs((1..=n_max).map(|n| (n, rng.gen_range(-40.0..40.0))).collect::<Vec<_>>());
    let (mut ultra_ok, mut scale_ok) = (0, 0);
    for _ in 0..100 {
        let m = rng.gen_range(0.5..4.0);
        let w = Weight::new(m)?;
        let (f, g, h) = (random_net(&mut rng)?, random_net(&mut rng)?, random_net(&mut rng)?);
        let fh = ultrapseudometric(&f, &h, &w, &th)?;
        let fg = ultrapseudometric(&f, &g, &w, &th)?;
        let gh = ultrapseudometric(&g, &h, &w, &th)?;
        ultra_ok += usize::from(fh.l_hat <= fg.l_hat.max(gh.l_hat) + fh.slack);
        let a = rng.gen_range(0.1..10.0);
        let base = ultra_seminorm(&f, &w, &th)?;
        let powered = Net::from_logs(f.entries().iter().map(|&(n, l)| (n, a * l)).collect())?;
        let p = ultra_seminorm(&powered, &w, &th)?;
        let same = base
            .window_trace
            .iter()
            .zip(&p.window_trace)
            .all(|(x, y)| (y.l_hat - a * x.l_hat).abs() <= 1e-12 * (a * x.l_hat).abs().max(1.0));
        scale_ok += usize::from(same);
    }
    let mut exact = true;
    for &(a, m) in &[(1.0, 2.0), (-0.7, 1.0), (2.5, 3.0), (0.3, 0.5)] {
        let w = Weight::new(m)?;
        let net = Net::from_logs((1..=n_max).map(|n| (n, a * w.inv_r(n))).collect())?;
        let e = ultra_seminorm(&net, &w, &th)?;
        exact &= e.window_trace.iter().all(|p| (p.l_hat.exp() - f64::exp(a)).abs() <= 1e-12 * f64::exp(a));
    }
    Ok((
        ultra_ok == 100 && scale_ok == 100 && exact,
        format!("ultrametric {ultra_ok}/100, power scaling {scale_ok}/100, closed forms recovered {exact}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("mollifier certification", mollifier_certification),
        ("moment ladder", moment_ladders),
        ("null decay", null_decay),
        ("moderate growth and weak equality", moderate_and_weak_equality),
        ("product consistency", product_consistency),
        ("minimizer grid", lemma_grid),
        ("A_m classifier", am_classifier),
        ("annulus norm chain", annulus_chain),
        ("hyperfunction embedding", circle_embedding),
        ("core estimator", estimator_properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2} {name} ({:.1}s): {detail}", i + 1, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
