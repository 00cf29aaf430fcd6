//! Executes experiments and assembles the report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use ultralab::circle::{
    classify_am, classify_circle_object, embed_hyperfunction, embedding_consistency_check, lemma_aaa_minimize,
    prop_aba_check, random_laurent_net, CircleClass, FourierSeq, Membership,
};
use ultralab::embedding::{
    moderate_growth_experiment, null_decay_experiment, null_decay_gaussian_control, product_consistency_check,
    weak_equality_experiment, weak_equality_shift_control, DecayFit, NetSpec,
};
use ultralab::gevrey::GevreyParams;
use ultralab::mollifier::flat::{certify_flatness, certify_uniform_bounds};
use ultralab::mollifier::{moment_ladder, GridSpec, MollifierNet, NetStats};
use ultralab::sequences::{Verdict, WeightSequence, WindowPoint};
use ultralab::series::BigRational;
use ultralab::{Error, Weight};

use crate::config::{self, Expectation, Experiment, RunConfig, ThresholdConfig};
use crate::error::CliError;
use crate::report::{write_report, write_table, Assertion, ExperimentOutcome, RunReport, Table, WallClock};

/// Where and how a run executes.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

/// Results of one experiment before they are written out.
struct Output {
    assertions: Vec<Assertion>,
    result: Value,
    tables: Vec<Table>,
    cache: NetStats,
}

impl Output {
    fn new(result: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            assertions: Vec::new(),
            result: serde_json::to_value(result)?,
            tables: Vec::new(),
            cache: NetStats::default(),
        })
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, passed, detail));
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn fit_table(name: String, fit: &DecayFit) -> Table {
    let mut t = Table::new(name, vec!["n", "inv_r", "ln_p", "argmax_order", "cap_hit"]).plotted(1, 2);
    for i in 0..fit.ns.len() {
        t.push(vec![
            fit.ns[i].to_string(),
            fmt(fit.abscissas[i]),
            fmt(fit.ordinates[i]),
            fit.argmax_order[i].to_string(),
            fit.cap_hit[i].to_string(),
        ]);
    }
    t
}

fn window_table(name: String, trace: &[WindowPoint]) -> Table {
    let mut t = Table::new(name, vec!["end", "l_hat"]).plotted(0, 1);
    for p in trace {
        t.push(vec![p.end.to_string(), fmt(p.l_hat)]);
    }
    t
}

fn fit_detail(fit: &DecayFit) -> String {
    let trace: Vec<String> = fit.estimate.window_trace.iter().map(|p| format!("{}:{:.4}", p.end, p.l_hat)).collect();
    format!("verdict {:?}, L_hat trace [{}]", fit.verdict, trace.join(", "))
}

fn null_decay(c: &config::NullDecay, th: &ThresholdConfig) -> Result<Output, CliError> {
    let spec = NetSpec::new(c.kind, c.m);
    let params = GevreyParams::new(c.m, c.nu.first().copied().unwrap_or(1.0), c.mu, c.s_max)?;
    let w = WeightSequence::from_exponent(c.weight_exponent.unwrap_or(1.0 / c.m))?;
    let ns = c.n.indices(c.dyadic);
    let fits = null_decay_experiment(&c.psi, &spec, &params, &c.nu, &ns, &w, &th.ks, &th.estimator())?;
    let control = if c.control {
        Some(null_decay_gaussian_control(&c.psi, &params, &c.nu, &ns, &w, &th.ks, &th.estimator())?)
    } else {
        None
    };
    let mut out = Output::new(json!({ "fits": fits, "control": control }))?;
    for f in &fits {
        out.check(format!("null at nu = {}", f.nu), f.is_null(), fit_detail(f));
        out.tables.push(fit_table(format!("nu{}", f.nu), f));
    }
    for f in control.iter().flatten() {
        out.check(format!("gaussian control not null at nu = {}", f.nu), !f.is_null(), fit_detail(f));
        out.tables.push(fit_table(format!("control-nu{}", f.nu), f));
    }
    Ok(out)
}

fn moderate_growth(c: &config::ModerateGrowth, th: &ThresholdConfig) -> Result<Output, CliError> {
    if !(c.m > 1.0) {
        return Err(CliError::ConfigInvalid(format!("moderate-growth: m must exceed 1, got {}", c.m)));
    }
    let spec = NetSpec::new(c.kind, c.m);
    let params = GevreyParams::new(c.m, c.nu, c.mu, c.s_max)?;
    let w = WeightSequence::from_exponent(c.weight_exponent.unwrap_or(1.0 / (c.m - 1.0)))?;
    let r = moderate_growth_experiment(&c.distribution, &spec, &params, &c.n.indices(c.dyadic), &w, &th.estimator())?;
    let mut out = Output::new(&r)?;
    out.check("moderate", r.fit.verdict == Verdict::Moderate, fit_detail(&r.fit));
    let mut t = fit_table("growth".into(), &r.fit);
    t.header.extend(["ln_raw_sup", "exact"]);
    for (i, row) in t.rows.iter_mut().enumerate() {
        row.push(fmt(r.log_raw_sup[i]));
        row.push(r.exact[i].to_string());
    }
    out.tables.push(t);
    Ok(out)
}

fn weak_equality(c: &config::WeakEquality, th: &ThresholdConfig) -> Result<Output, CliError> {
    let ns = c.n.indices(c.dyadic);
    let r = weak_equality_experiment(&c.distribution, &c.net_a, &c.net_b, &c.psi, &ns, &th.ks, &th.estimator())?;
    let control = match c.control_shift {
        Some(s) => Some(weak_equality_shift_control(&c.net_a, &c.psi, s, &ns, &th.ks, &th.estimator())?),
        None => None,
    };
    let mut out = Output::new(json!({ "pairing": r, "control": control }))?;
    out.check("pairing null", r.fit.is_null(), fit_detail(&r.fit));
    out.tables.push(fit_table("pairing".into(), &r.fit));
    if let Some(ctl) = &control {
        out.check("shift control not null", !ctl.fit.is_null(), fit_detail(&ctl.fit));
        out.tables.push(fit_table("control".into(), &ctl.fit));
    }
    Ok(out)
}

fn product_consistency(c: &config::ProductConsistency, th: &ThresholdConfig) -> Result<Output, CliError> {
    let spec = NetSpec::new(c.kind, c.m);
    let params = GevreyParams::new(c.m, c.nu.first().copied().unwrap_or(1.0), c.mu, c.s_max)?;
    let w = WeightSequence::from_exponent(c.weight_exponent.unwrap_or(1.0 / c.m))?;
    let ns = c.n.indices(c.dyadic);
    let fits = product_consistency_check(&c.phi, &c.psi, &spec, &params, &c.nu, &ns, &w, &th.ks, &th.estimator())?;
    let mut out = Output::new(&fits)?;
    for f in &fits {
        out.check(format!("product defect null at nu = {}", f.nu), f.is_null(), fit_detail(f));
        out.tables.push(fit_table(format!("nu{}", f.nu), f));
    }
    Ok(out)
}

fn circle_embed(c: &config::CircleEmbed, th: &ThresholdConfig) -> Result<Output, CliError> {
    let h = FourierSeq::from_generator(c.coefficients.clone(), c.k_max);
    let r = embed_hyperfunction(&h, &Weight::new(c.m_prime)?, c.lambda, c.n_max, &th.estimator())?;
    let limit = c.lambda * c.lambda + c.margin;
    let mut out = Output::new(&r)?;
    out.check(
        "ultra-norm within lambda^2 + margin",
        r.estimate.value <= limit,
        format!("estimate {} vs {limit}, growth {:?}", r.estimate.value, r.growth.class),
    );
    out.tables.push(window_table("windows".into(), &r.estimate.window_trace));
    Ok(out)
}

fn circle_null(c: &config::CircleNull, th: &ThresholdConfig) -> Result<Output, CliError> {
    let f = FourierSeq::from_generator(c.coefficients.clone(), c.k_max);
    let g = c.partner.clone().map(|p| FourierSeq::from_generator(p, c.k_max));
    let r = embedding_consistency_check(&f, g.as_ref(), &Weight::new(c.m_prime)?, c.lambda, c.n_max, &th.estimator())?;
    let mut out = Output::new(&r)?;
    let null = r.verdict == Verdict::Null;
    let name = if c.expect_null { "tail net null" } else { "control not null" };
    out.check(name, null == c.expect_null, format!("verdict {:?}", r.verdict));
    out.tables.push(window_table("tail-windows".into(), &r.tail.window_trace));
    if let Some(p) = &r.product {
        out.tables.push(window_table("product-windows".into(), &p.window_trace));
    }
    Ok(out)
}

fn prop_aba(c: &config::PropAba, th: &ThresholdConfig) -> Result<Output, CliError> {
    let w = Weight::new(c.m_prime)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut rows = Vec::with_capacity(c.nets);
    let mut table =
        Table::new("chain", vec!["net", "per_n", "ultra_chain", "L_q_mu", "L_qhat_lambda", "L_q_lambda", "slack"]);
    let (mut per_n_ok, mut ultra_ok) = (0usize, 0usize);
    let mut first_failure = None;
    for i in 0..c.nets {
        let net = random_laurent_net(&mut || rng.gen::<f64>(), c.k_max, c.n_max);
        match prop_aba_check(&net, c.mu, c.lambda, &w, &th.estimator()) {
            Ok(r) => {
                per_n_ok += 1;
                ultra_ok += usize::from(r.ultra_chain_holds);
                if !r.ultra_chain_holds && first_failure.is_none() {
                    first_failure = Some(format!("net {i}: ultra chain outside slack {}", r.slack));
                }
                let l = [r.q_mu.l_hat, r.qhat_lambda.l_hat, r.q_lambda.l_hat];
                table.push(vec![
                    i.to_string(),
                    "true".into(),
                    r.ultra_chain_holds.to_string(),
                    fmt(l[0]),
                    fmt(l[1]),
                    fmt(l[2]),
                    fmt(r.slack),
                ]);
                rows.push(json!({ "net": i, "per_n": true, "ultra_chain": r.ultra_chain_holds,
                    "L_hat": l, "slack": r.slack, "ln_c": r.ln_c }));
            }
            Err(Error::BoundViolated(msg)) => {
                first_failure.get_or_insert_with(|| format!("net {i}: {msg}"));
                table.push(vec![
                    i.to_string(),
                    "false".into(),
                    "false".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                    "".into(),
                ]);
                rows.push(json!({ "net": i, "per_n": false, "witness": msg }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut out = Output::new(json!({ "nets": rows }))?;
    let witness = first_failure.unwrap_or_default();
    out.check("per-n chain", per_n_ok == c.nets, format!("{per_n_ok}/{} nets; {witness}", c.nets));
    out.check("ultra-norm chain", ultra_ok == c.nets, format!("{ultra_ok}/{} nets", c.nets));
    out.tables.push(table);
    Ok(out)
}

fn lemma_min(c: &config::LemmaMin) -> Result<Output, CliError> {
    let mut out = Output::new(Value::Null)?;
    let mut results = Vec::new();
    let mut table = Table::new(
        "minimizer",
        vec!["m", "rho", "t_rho", "offset", "ln_phi", "residual", "iterations", "closed_form_rel", "shifted_margin"],
    );
    for &m in &c.m {
        for &rho in &c.rho {
            let tag = format!("m = {m}, rho = {rho}");
            match lemma_aaa_minimize(m, rho) {
                Ok(r) => {
                    let b = &r.bounds;
                    out.check(
                        format!("minimizer bounds at {tag}"),
                        b.lemma_holds() && r.residual < 1e-12 && b.closed_form_rel < 1e-10,
                        format!(
                            "t_rho {}, residual {:e}, closed-form rel {:e}",
                            r.t_rho, r.residual, b.closed_form_rel
                        ),
                    );
                    if c.assert_shifted {
                        out.check(
                            format!("shifted-point bound at {tag}"),
                            b.shifted_bound_holds(),
                            format!("margin {:e}", b.shifted_margin),
                        );
                    }
                    table.push(vec![
                        fmt(m),
                        fmt(rho),
                        fmt(r.t_rho),
                        fmt(r.offset),
                        fmt(r.ln_phi),
                        fmt(r.residual),
                        r.iterations.to_string(),
                        fmt(b.closed_form_rel),
                        fmt(b.shifted_margin),
                    ]);
                    results.push(serde_json::to_value(&r)?);
                }
                Err(e @ (Error::BoundViolated(_) | Error::NewtonStall { .. })) => {
                    out.check(format!("minimizer bounds at {tag}"), false, e.to_string());
                    results.push(json!({ "m": m, "rho": rho, "error": e.to_string() }));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.result = Value::Array(results);
    out.tables.push(table);
    Ok(out)
}

fn mollifier_certify(c: &config::MollifierCertify, cache_dir: Option<&Path>) -> Result<Output, CliError> {
    let flat = c.kind.flat();
    let to_u32 = |x: u64| u32::try_from(x).map_err(|_| CliError::ConfigInvalid(format!("index {x} too large")));
    let mut out = Output::new(Value::Null)?;
    let mut flatness = Vec::new();
    let mut table =
        Table::new("flatness", vec!["n", "order_cap", "value_at_zero", "vanishing", "first_nonzero", "leading"]);
    for n in c.n.indices(false) {
        let r = certify_flatness::<BigRational>(flat, to_u32(n)?, None, c.series_cap)?;
        out.check(
            format!("flat at n = {n}"),
            r.vanishing && r.value_at_zero == 1.0,
            format!("orders 1..={} vanish: {}, first nonzero {:?}", r.order_cap, r.vanishing, r.first_nonzero),
        );
        table.push(vec![
            n.to_string(),
            r.order_cap.to_string(),
            fmt(r.value_at_zero),
            r.vanishing.to_string(),
            r.first_nonzero.map(|j| j.to_string()).unwrap_or_default(),
            r.leading.clone().unwrap_or_default(),
        ]);
        flatness.push(r);
    }
    out.tables.push(table);
    let range = c.bound_n.unwrap_or(c.n);
    let bounds = match certify_uniform_bounds(flat, to_u32(range.start)?..=to_u32(range.end)?) {
        Ok(r) => {
            out.check("uniform bound", true, format!("max log bound {} against constant {}", r.max_log_bound, r.c));
            let mut t = Table::new("uniform-bound", vec!["n", "log_bound", "bound", "witness_x", "witness_index"])
                .plotted(0, 1);
            for e in &r.entries {
                t.push(vec![e.n.to_string(), fmt(e.log_bound), fmt(e.bound), fmt(e.witness_x), fmt(e.witness_index)]);
            }
            out.tables.push(t);
            serde_json::to_value(&r)?
        }
        Err(Error::BoundViolated(msg)) => {
            out.check("uniform bound", false, msg.clone());
            json!({ "error": msg })
        }
        Err(e) => return Err(e.into()),
    };
    let mut ladders = Vec::new();
    if !c.moments.is_empty() {
        let mut net = MollifierNet::new(c.kind, c.m, GridSpec::default());
        if let Some(dir) = cache_dir {
            net = net.with_cache(dir);
        }
        let mut t = Table::new("moments", vec!["n", "j", "quadrature", "certificate", "taylor", "dual_rel"]);
        for &n in &c.moments {
            let table = net.get(n)?;
            let checks = moment_ladder(&table, None)?;
            let ok = checks.iter().all(|m| m.within_certificate && m.dual_ok);
            let worst = checks.iter().map(|m| m.dual_rel).fold(0.0, f64::max);
            out.check(
                format!("moment ladder at n = {n}"),
                ok,
                format!("{} moments, worst dual rel {worst:e}", checks.len()),
            );
            for m in &checks {
                t.push(vec![
                    n.to_string(),
                    m.j.to_string(),
                    fmt(m.quadrature),
                    fmt(m.certificate),
                    fmt(m.taylor),
                    fmt(m.dual_rel),
                ]);
            }
            ladders.push(json!({ "n": n, "checks": checks }));
        }
        out.tables.push(t);
        out.cache = net.stats();
    }
    out.result = json!({ "flatness": flatness, "uniform_bounds": bounds, "moments": ladders });
    Ok(out)
}

fn abe_classify(c: &config::AbeClassify, th: &ThresholdConfig) -> Result<Output, CliError> {
    let seq = match (&c.coefficients, &c.sparse) {
        (Some(g), None) => FourierSeq::from_generator(g.clone(), c.k_max),
        (None, Some(entries)) => FourierSeq::sparse(c.k_max, entries)?,
        _ => return Err(CliError::ConfigInvalid("abe-classify: give exactly one of coefficients or sparse".into())),
    };
    let growth = classify_circle_object(&seq, th.tau_c)?;
    let am = classify_am(&seq, c.m, th.tau_c)?;
    let mut out = Output::new(json!({ "growth": growth, "membership": am }))?;
    if let Some(e) = c.expect {
        let got = match e {
            Expectation::Analytic => growth.class == CircleClass::Analytic,
            Expectation::Hyperfunction => growth.class == CircleClass::Hyperfunction,
            Expectation::NotHyperfunction => growth.class == CircleClass::NotHyperfunction,
            Expectation::Member => matches!(am.membership, Membership::Member { .. }),
            Expectation::NotMember => am.membership == Membership::NotMember,
            Expectation::FiniteSupport => matches!(am.membership, Membership::FiniteSupport { .. }),
        };
        out.check(
            format!("classified {e:?}"),
            got,
            format!("root test {:?} ({}), A_m {:?} ({})", growth.class, growth.estimate, am.membership, am.estimate),
        );
    }
    out.tables.push(window_table("root-test".into(), &growth.window_trace));
    out.tables.push(window_table("am-test".into(), &am.window_trace));
    Ok(out)
}

fn execute(e: &Experiment, th: &ThresholdConfig, opts: &RunOptions) -> Result<Output, CliError> {
    match e {
        Experiment::NullDecay(c) => null_decay(c, th),
        Experiment::ModerateGrowth(c) => moderate_growth(c, th),
        Experiment::WeakEquality(c) => weak_equality(c, th),
        Experiment::ProductConsistency(c) => product_consistency(c, th),
        Experiment::CircleEmbed(c) => circle_embed(c, th),
        Experiment::CircleNull(c) => circle_null(c, th),
        Experiment::PropAba(c) => prop_aba(c, th),
        Experiment::LemmaMin(c) => lemma_min(c),
        Experiment::MollifierCertify(c) => mollifier_certify(c, opts.cache_dir.as_deref()),
        Experiment::AbeClassify(c) => abe_classify(c, th),
    }
}

/// Runs every experiment in order, writes traces and `report.json` under `opts.out`.
///
/// Experiment failures land in the report; only configuration and output errors are returned.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(&opts.out)?;
    let start = Instant::now();
    let mut experiments = Vec::with_capacity(cfg.experiment.len());
    let mut seconds = Vec::with_capacity(cfg.experiment.len());
    let mut cache = NetStats::default();
    for (index, e) in cfg.experiment.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = match execute(e, &cfg.thresholds, opts) {
            Ok(o) => {
                let mut traces = Vec::new();
                for t in &o.tables {
                    traces.extend(write_table(&opts.out, &format!("{index:02}-{}-{}", e.id(), t.name), t)?);
                }
                cache.cache_hits += o.cache.cache_hits;
                cache.builds += o.cache.builds;
                cache.rebuilt_corrupt += o.cache.rebuilt_corrupt;
                let passed = o.assertions.iter().all(|a| a.passed);
                ExperimentOutcome {
                    index,
                    id: e.id().into(),
                    passed,
                    assertions: o.assertions,
                    error: None,
                    result: o.result,
                    traces,
                }
            }
            Err(CliError::ConfigInvalid(msg)) => return Err(CliError::ConfigInvalid(msg)),
            Err(err) => ExperimentOutcome {
                index,
                id: e.id().into(),
                passed: false,
                assertions: Vec::new(),
                error: Some(err.to_string()),
                result: Value::Null,
                traces: Vec::new(),
            },
        };
        seconds.push(t0.elapsed().as_secs_f64());
        experiments.push(outcome);
    }
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        thresholds: cfg.thresholds.clone(),
        config: cfg.clone(),
        passed: experiments.iter().all(|e| e.passed),
        experiments,
        cache,
        wall_clock: WallClock { total_seconds: start.elapsed().as_secs_f64(), experiment_seconds: seconds },
    };
    write_report(&opts.out, &report)?;
    Ok(report)
}
