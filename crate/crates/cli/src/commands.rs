//! Executes one parsed command against the core library.

use formavg_core::cyclic::{self, gowers_norm_pow, sol_discrete, sumfree_interval};
use formavg_core::equid::{
    min_k_threshold, phi_k_balance_report, phi_k_image_check, weyl_balance_test, KThreshold, PhiKMap,
    PolynomialOrbit,
};
use formavg_core::extremal::{
    convergence_experiment, m_discrete_exhaustive, m_discrete_fractional, m_discrete_search, m_torus_search,
    AnnealSchedule, ConvergenceOptions, SearchOptions, TorusSearchOptions,
};
use formavg_core::lattice::leibman_lattice;
use formavg_core::linsys::{complexity, LinearFormSystem};
use formavg_core::torus::{build_model, exact_trig_average, mc_average, TrigPolynomial, DEFAULT_TERM_BUDGET};
use formavg_core::{Complex64, Error, Result};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{fmt_float, Outcome, Table};
use crate::parse;

pub fn execute(command: &Command, global: &GlobalOpts) -> Result<Outcome> {
    match command {
        Command::Leibman(a) => leibman(a),
        Command::Complexity(a) => complexity_cmd(a),
        Command::SolDiscrete(a) => sol_discrete_cmd(a, global),
        Command::SolTorus(a) => sol_torus(a, global),
        Command::Gowers(a) => gowers(a),
        Command::MinK(a) => min_k(a),
        Command::Balance(BalanceMode::PhiK(a)) => phi_k(a, global),
        Command::Balance(BalanceMode::Orbit(a)) => orbit(a, global),
        Command::MDiscrete(a) => m_discrete(a, global),
        Command::MTorus(a) => m_torus(a, global),
        Command::Converge(a) => converge(a, global),
        Command::Counterexamples(a) => counterexamples(a),
        Command::Run(_) => Err(Error::InvalidParameter("run cannot be nested in a config".into())),
    }
}

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::Leibman(_) => "leibman",
        Command::Complexity(_) => "complexity",
        Command::SolDiscrete(_) => "sol-discrete",
        Command::SolTorus(_) => "sol-torus",
        Command::Gowers(_) => "gowers",
        Command::MinK(_) => "min-k",
        Command::Balance(BalanceMode::PhiK(_)) => "balance phi-k",
        Command::Balance(BalanceMode::Orbit(_)) => "balance orbit",
        Command::MDiscrete(_) => "m-discrete",
        Command::MTorus(_) => "m-torus",
        Command::Converge(_) => "converge",
        Command::Counterexamples(_) => "counterexamples",
        Command::Run(_) => "run",
    }
}

fn scalar(name: &str, value: f64) -> Outcome {
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec![json!(name), json!(value)]);
    Outcome { summary: fmt_float(value), table, failed: false }
}

fn complex_summary(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_float(z.re)
    } else {
        format!("{} {} {}i", fmt_float(z.re), if z.im < 0.0 { "-" } else { "+" }, fmt_float(z.im.abs()))
    }
}

fn leibman(a: &LeibmanArgs) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    if a.degree == 0 {
        return Err(Error::InvalidParameter("degree must be ≥ 1".into()));
    }
    let lattice = leibman_lattice(&system, a.degree);
    let mut table = Table::new(&["row", "vector"]);
    let mut lines = Vec::new();
    for (i, v) in lattice.basis().iter().enumerate() {
        let text = format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        table.push(vec![json!(i), json!(text)]);
        lines.push(text);
    }
    let summary = format!("rank {} in Z^{}\n{}", lattice.rank(), lattice.ambient_dim(), lines.join("\n"));
    Ok(Outcome { summary, table, failed: false })
}

fn complexity_cmd(a: &ComplexityArgs) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let s = complexity(&system, a.s_max)?;
    let mut table = Table::new(&["system", "complexity", "s_max"]);
    table.push(vec![json!(system.label()), s.map_or(Value::Null, |s| json!(s)), json!(a.s_max)]);
    let summary = match s {
        Some(s) => s.to_string(),
        None => format!("infinite (no s ≤ {})", a.s_max),
    };
    Ok(Outcome { summary, table, failed: false })
}

fn sol_discrete_cmd(a: &SolDiscreteArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let f = parse::cyclic(&a.f, a.n)?;
    let pattern = parse::pattern(a.pattern.as_deref())?;
    let z = sol_discrete(&f, &system, pattern.as_ref(), g.budget)?;
    let mut table = Table::new(&["re", "im"]);
    table.push(vec![json!(z.re), json!(z.im)]);
    Ok(Outcome { summary: complex_summary(z), table, failed: false })
}

fn sol_torus(a: &SolTorusArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let spec = parse::spec(&a.spec)?;
    let f = parse::trig(&a.f, spec.dim())?;
    let pattern = parse::pattern(a.pattern.as_deref())?;
    let model = build_model(&spec, &system)?;
    let mut table = Table::new(&["method", "re", "im", "stderr", "samples"]);
    let mut lines = vec![format!("subtorus dimension {}", model.dimension())];
    if matches!(a.method, TorusMethod::Exact | TorusMethod::Both) {
        let z = exact_trig_average(&f, &model, pattern.as_ref(), DEFAULT_TERM_BUDGET)?;
        table.push(vec![json!("exact"), json!(z.re), json!(z.im), json!(0.0), Value::Null]);
        lines.push(format!("exact {}", complex_summary(z)));
    }
    if matches!(a.method, TorusMethod::Mc | TorusMethod::Both) {
        let est = mc_average(&f, &model, pattern.as_ref(), a.samples, g.seed)?;
        let z = est.estimate;
        table.push(vec![json!("monte-carlo"), json!(z.re), json!(z.im), json!(est.stderr), json!(est.samples)]);
        lines.push(format!("monte-carlo {} ± {}", complex_summary(z), fmt_float(est.stderr)));
    }
    Ok(Outcome { summary: lines.join("\n"), table, failed: false })
}

fn gowers(a: &GowersArgs) -> Result<Outcome> {
    let f = parse::cyclic(&a.f, a.n)?;
    Ok(scalar(&format!("U{}^{}", a.d, 1u32 << a.d), gowers_norm_pow(&f, a.d)?))
}

fn min_k(a: &MinKArgs) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let chi = parse::character(&a.chi, system.forms(), a.d)?;
    let threshold = min_k_threshold(&chi, &system, a.domain_degree, a.target_degree)?;
    let mut table = Table::new(&["character", "min_k"]);
    let (cell, summary) = match threshold {
        KThreshold::From(k) => (json!(k), k.to_string()),
        KThreshold::NeverVanishes => (Value::Null, "never vanishes".to_string()),
    };
    table.push(vec![json!(chi.to_string()), cell]);
    Ok(Outcome { summary, table, failed: false })
}

fn phi_k(a: &PhiKArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let map = PhiKMap::new(a.k, a.d)?;
    let report = phi_k_balance_report(&map, &system, a.domain_degree, a.target_degree, a.freq)?;
    let image = phi_k_image_check(&map, &system, a.domain_degree, a.image_samples, g.seed)?;
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec![json!("k"), json!(report.k)]);
    table.push(vec![json!("enumerated"), json!(report.enumerated)]);
    table.push(vec![json!("trivial"), json!(report.trivial)]);
    table.push(vec![json!("vanishing"), json!(report.vanishing)]);
    table.push(vec![json!("violated"), json!(report.violated.len())]);
    table.push(vec![json!("max_discrepancy"), json!(report.max_discrepancy)]);
    table.push(vec![json!("image_violation"), json!(image)]);
    table.push(vec![json!("certified"), json!(report.certifies())]);
    let mut summary = format!(
        "k = {}: {} characters, {} trivial, {} vanishing, {} violated; image violation {:.2e}; {}",
        report.k,
        report.enumerated,
        report.trivial,
        report.vanishing,
        report.violated.len(),
        image,
        if report.certifies() { "balanced" } else { "not balanced" }
    );
    for chi in report.violated.iter().take(5) {
        summary.push_str(&format!("\n  violated {chi}"));
    }
    Ok(Outcome { summary, table, failed: false })
}

fn orbit(a: &OrbitArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let spec = parse::spec(&a.spec)?;
    let orbit = PolynomialOrbit::parse(a.p, &a.coeffs)?;
    let w = weyl_balance_test(&orbit, &spec, &system, a.freq, g.budget)?;
    let argmax = w.argmax.as_ref().map(|c| c.to_string());
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec![json!("max_abs"), json!(w.max_abs)]);
    table.push(vec![json!("argmax"), argmax.clone().map_or(Value::Null, Value::String)]);
    table.push(vec![json!("characters"), json!(w.characters)]);
    table.push(vec![json!("fourier_rate"), json!(w.fourier_rate)]);
    let summary = format!(
        "max |character sum| {} over {} characters{}",
        fmt_float(w.max_abs),
        w.characters,
        argmax.map(|c| format!(" at {c}")).unwrap_or_default()
    );
    Ok(Outcome { summary, table, failed: false })
}

fn search_options(s: &SearchArgs, seed: u64) -> SearchOptions {
    SearchOptions { restarts: s.restarts, steps: s.steps, seed }
}

fn torus_options(a: &AnnealArgs, seed: u64) -> TorusSearchOptions {
    TorusSearchOptions {
        q: a.q,
        samples: a.samples,
        seed,
        schedule: AnnealSchedule {
            temperatures: a.temperatures,
            proposals: a.proposals,
            sigma: a.sigma,
            ..AnnealSchedule::default()
        },
    }
}

fn m_discrete(a: &MDiscreteArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let alpha = parse::alpha(&a.alpha)?;
    let opts = search_options(&a.search, g.seed);
    let cand = match a.method {
        DiscreteMethod::Exhaustive => m_discrete_exhaustive(&system, a.p, alpha)?,
        DiscreteMethod::Search => m_discrete_search(&system, a.p, alpha, &opts)?,
        DiscreteMethod::Auto => match m_discrete_exhaustive(&system, a.p, alpha) {
            Err(Error::Budget { .. }) => m_discrete_search(&system, a.p, alpha, &opts)?,
            other => other?,
        },
    };
    let elements = cand.elements().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut table = Table::new(&["method", "value", "upper_bound", "size", "set"]);
    table.push(vec![
        json!(cand.method.as_str()),
        json!(cand.value),
        json!(cand.upper_bound),
        json!(cand.size()),
        json!(elements),
    ]);
    let kind = if cand.upper_bound { "upper bound" } else { "exact" };
    let mut summary = format!("{} ({kind}, {}) with A = {{{elements}}}", fmt_float(cand.value), cand.method);
    if let Some(q) = a.fractional_q {
        let frac = m_discrete_fractional(&system, a.p, alpha, q)?;
        let values = frac.values.iter().map(|v| fmt_float(*v)).collect::<Vec<_>>().join(" ");
        table.push(vec![json!("fractional"), json!(frac.value), json!(true), Value::Null, json!(values)]);
        summary.push_str(&format!("\nfractional q = {q}: {}", fmt_float(frac.value)));
    }
    Ok(Outcome { summary, table, failed: false })
}

fn m_torus(a: &MTorusArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let spec = parse::spec(&a.spec)?;
    let alpha = parse::alpha(&a.alpha)?;
    let cand = m_torus_search(&system, &spec, alpha, &torus_options(&a.anneal, g.seed))?;
    let mut table = Table::new(&["method", "estimate", "stderr", "mean", "upper_bound"]);
    table.push(vec![
        json!(cand.method.as_str()),
        json!(cand.estimate),
        json!(cand.stderr),
        json!(cand.mean),
        json!(cand.upper_bound),
    ]);
    let summary = format!(
        "{} ± {} ({}, mean {})",
        fmt_float(cand.estimate),
        fmt_float(cand.stderr),
        cand.method,
        fmt_float(cand.mean)
    );
    Ok(Outcome { summary, table, failed: false })
}

fn converge(a: &ConvergeArgs, g: &GlobalOpts) -> Result<Outcome> {
    let system = parse::system(&a.system)?;
    let alpha = parse::alpha(&a.alpha)?;
    let primes: Vec<usize> = parse::list("prime", &a.primes)?;
    if primes.is_empty() {
        return Err(Error::InvalidParameter("no primes given".into()));
    }
    let spec = parse::spec(&a.spec)?;
    let opts =
        ConvergenceOptions { search: search_options(&a.search, g.seed), torus: torus_options(&a.anneal, g.seed) };
    let result = convergence_experiment(&system, alpha, &primes, &spec, &opts)?;
    let mut table =
        Table::new(&["group", "alpha", "system", "method", "estimate", "stderr", "exact", "seed", "seconds"]);
    let mut lines = Vec::new();
    for r in result.rows() {
        table.push(vec![
            json!(r.group),
            json!(r.alpha),
            json!(r.system),
            json!(r.method.as_str()),
            json!(r.estimate),
            json!(r.stderr),
            json!(r.exact),
            json!(r.seed),
            json!(r.seconds),
        ]);
        lines.push(format!("{:<12} {:<12} {}", r.group, r.method, fmt_float(r.estimate)));
    }
    Ok(Outcome { summary: lines.join("\n"), table, failed: false })
}

fn is_odd_prime(p: u64) -> bool {
    p > 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn counterexamples(a: &CounterexampleArgs) -> Result<Outcome> {
    let mut table = Table::new(&["check", "expected", "observed", "status"]);
    let mut failed = false;
    let mut row = |check: String, expected: String, observed: String, pass: Option<bool>| {
        let status = match pass {
            Some(true) => "pass",
            Some(false) => {
                failed = true;
                "fail"
            }
            None => "skipped",
        };
        table.push(vec![json!(check), json!(expected), json!(observed), json!(status)]);
    };

    let p = a.p;
    if is_odd_prime(p) {
        let f = cyclic::quadratic_phase(p)?;
        let u3 = gowers_norm_pow(&f, 3)?;
        let u2 = gowers_norm_pow(&f, 2)?;
        row(format!("quadratic phase U3^8, p = {p}"), "1".into(), fmt_float(u3), Some((u3 - 1.0).abs() < 1e-9));
        let want = 1.0 / p as f64;
        row(format!("quadratic phase U2^4, p = {p}"), format!("1/{p}"), fmt_float(u2), Some((u2 - want).abs() < 1e-9));
    } else {
        row(format!("quadratic phase, p = {p}"), "-".into(), "p is not an odd prime".into(), None);
    }

    for q in parse::list::<u64>("prime", &a.sumfree_primes)? {
        let f = sumfree_interval(q)?;
        let schur = sol_discrete(&f, &LinearFormSystem::schur(), None, u64::MAX)?.re;
        let density = f.mean().re;
        row(
            format!("sum-free interval Sol = 0, p = {q}"),
            "0".into(),
            format!("{} (density {})", fmt_float(schur), fmt_float(density)),
            Some(schur.abs() < 1e-12),
        );
    }

    let cube2 = LinearFormSystem::cube(2)?;
    let ranks = [leibman_lattice(&cube2, 1).rank(), leibman_lattice(&cube2, 2).rank()];
    row("U2 Leibman ranks, degrees 1 and 2".into(), "3, 4".into(), format!("{}, {}", ranks[0], ranks[1]), Some(ranks == [3, 4]));

    let schur_model = build_model(&parse::spec("2")?, &LinearFormSystem::schur())?;
    let dim = schur_model.dimension();
    row("Schur subtorus dimension, filtration (2,)".into(), "3".into(), dim.to_string(), Some(dim == 3));
    let avg = exact_trig_average(&TrigPolynomial::raised_cosine(1, 0), &schur_model, None, DEFAULT_TERM_BUDGET)?;
    row(
        "Schur average of 1 + cos, filtration (2,)".into(),
        "0.125".into(),
        complex_summary(avg),
        Some((avg - Complex64::new(0.125, 0.0)).norm() < 1e-12),
    );

    let summary = table
        .rows
        .iter()
        .map(|r| format!("{:<8} {} (expected {}, observed {})", r[3].as_str().unwrap_or(""), cell(&r[0]), cell(&r[1]), cell(&r[2])))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { summary, table, failed })
}

fn cell(v: &Value) -> &str {
    v.as_str().unwrap_or("")
}
