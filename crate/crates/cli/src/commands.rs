use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use metastable_core::dct::{dct_inequality_check, integral_sequence, metastable_dct_search, DctError, DctSearch};
use metastable_core::formats;
use metastable_core::gen::{self, MonotoneSliceClass};
use metastable_core::henson::{approx_satisfies, gap, parse_formula, satisfies, Assignment, FiniteStructure, Value as Val};
use metastable_core::measure::{audit_integration, audit_preloeb, integrate, Report as Audit, TvMode};
use metastable_core::netcore::{
    brute_min_uniform_rate, eps_cauchy_exact, first_witness_in, metastable_witness,
    monotone_rate_bound, monotone_uniform_rate, osc_eta_exact, osc_eta_upper, osc_total_exact, uniform_rate_audit,
    AuditOutcome, MinRate, RateSet, RateSpec,
};
use metastable_core::rational::{self, Rational};
use metastable_core::Sampling;
use serde_json::{json, Value};

use crate::{
    input, AnalyzeArgs, Cli, Command, DctCommand, LogicCommand, LogicMode, MeasureCommand, RateCommand, SearchArgs,
    TvChoice,
};

pub struct Report {
    pub holds: bool,
    pub lines: Vec<String>,
    pub json: Value,
}

impl Report {
    fn new(holds: bool, lines: Vec<String>, json: Value) -> Self {
        Report { holds, lines, json }
    }

    pub fn print(&self, as_json: bool) {
        if as_json {
            println!("{}", serde_json::to_string_pretty(&self.json).expect("report serializes"));
        } else {
            for line in &self.lines {
                println!("{line}");
            }
        }
    }
}

fn q(x: &Rational) -> String {
    rational::format(x)
}

/// `{0..m}` for prefix sets, `{a, b, …}` otherwise.
pub fn show_set(e: &RateSet) -> String {
    let (Some(lo), Some(hi)) = (e.first(), e.last()) else {
        return "{}".into();
    };
    if *lo == 0 && e.len() == hi + 1 && e.len() > 2 {
        format!("{{0..{hi}}}")
    } else {
        format!("{{{}}}", e.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))
    }
}

fn eta_id(eta: &Sampling) -> String {
    eta.function().map_or_else(|| "explicit".to_owned(), |f| f.to_string())
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Rate(r) => rate(r),
        Command::Logic(l) => logic(l),
        Command::Measure(m) => measure(m),
        Command::Dct(d) => dct(d),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<Report> {
    let seq = input::sequence(&a.seq, a.period)?;
    let eps = input::rational(&a.eps)?;
    let eta = input::sampling(&a.f)?;
    let total = osc_total_exact(&seq);
    let (osc_eta, exact) = match osc_eta_exact(&seq, &eta) {
        Ok(v) => (v, true),
        Err(_) => (osc_eta_upper(&seq, &eta, a.horizon)?.value, false),
    };
    let mut lines = vec![
        format!("osc = {}", q(&total)),
        format!("osc_η = {}{}", q(&osc_eta), if exact { "" } else { " (upper bound)" }),
        format!("ε-Cauchy at ε = {}: {}", q(&eps), eps_cauchy_exact(&seq, &eps)),
    ];
    let mut report = json!({
        "eps": q(&eps),
        "F": eta_id(&eta),
        "osc": q(&total),
        "osc_eta": {"value": q(&osc_eta), "exact": exact},
        "eps_cauchy": eps_cauchy_exact(&seq, &eps),
    });
    let holds = match &a.e {
        Some(text) => {
            let e = input::rate_set(text, &eps, &eta_id(&eta))?;
            let witness = first_witness_in(&seq, &eps, &eta, &e)?;
            lines.insert(
                0,
                match witness {
                    Some(i) => format!("rate holds, witness i={i}"),
                    None => format!("rate fails: no i in E = {} has osc ≤ ε", show_set(&e)),
                },
            );
            report["E"] = json!(e);
            report["holds"] = json!(witness.is_some());
            report["witness"] = json!(witness);
            witness.is_some()
        }
        None => {
            let witness = metastable_witness(&seq, &eps, &eta, a.horizon)?;
            lines.insert(
                0,
                match witness {
                    Some(i) => format!("metastable, first witness i={i}"),
                    None => format!("no witness up to i={}", a.horizon),
                },
            );
            report["horizon"] = json!(a.horizon);
            report["holds"] = json!(witness.is_some());
            report["witness"] = json!(witness);
            witness.is_some()
        }
    };
    Ok(Report::new(holds, lines, report))
}

fn rate(r: &RateCommand) -> Result<Report> {
    match r {
        RateCommand::Monotone { eps, f } => {
            let eps = input::rational(eps)?;
            let eta = input::sampling(f)?;
            let func = eta.function().context("the monotone rate needs a sampling given by F")?;
            let bound = monotone_rate_bound(&eps, func)?;
            let e = monotone_uniform_rate(&eps, func)?;
            let json = json!({
                "eps": q(&eps),
                "F": func.to_string(),
                "bound": bound,
                "E": e,
                "rate": formats::rate_to_value(&RateSpec::single(e.clone())?),
            });
            Ok(Report::new(true, vec![format!("E={}", show_set(&e))], json))
        }
        RateCommand::Brute { seqs, eps, f, horizon } => {
            let family = input::sequences(seqs)?;
            let eps = input::rational(eps)?;
            let eta = input::sampling(f)?;
            Ok(match brute_min_uniform_rate(&family, &eps, &eta, *horizon)? {
                MinRate::Found(e) => {
                    let json = json!({
                        "eps": q(&eps),
                        "F": eta_id(&eta),
                        "outcome": "found",
                        "E": e,
                        "rate": formats::rate_to_value(&RateSpec::single(e.clone())?),
                    });
                    Report::new(true, vec![format!("E={} works for all {} sequences", show_set(&e), family.len())], json)
                }
                MinRate::Infeasible { index } => Report::new(
                    false,
                    vec![format!("infeasible: sequence {index} has no witness up to i={horizon}")],
                    json!({"eps": q(&eps), "F": eta_id(&eta), "outcome": "infeasible", "index": index, "horizon": horizon}),
                ),
            })
        }
        RateCommand::Audit { seqs, eps, f, e } => {
            let family = input::sequences(seqs)?;
            let eps = input::rational(eps)?;
            let eta = input::sampling(f)?;
            let e = input::rate_set(e, &eps, &eta_id(&eta))?;
            Ok(match uniform_rate_audit(&family, &eps, &eta, &e)? {
                AuditOutcome::AllPass => Report::new(
                    true,
                    vec![format!("all {} sequences have a witness in E={}", family.len(), show_set(&e))],
                    json!({"eps": q(&eps), "F": eta_id(&eta), "E": e, "outcome": "all_pass"}),
                ),
                AuditOutcome::Counterexample { index } => Report::new(
                    false,
                    vec![format!("counterexample: sequence {index} has no witness in E={}", show_set(&e))],
                    json!({"eps": q(&eps), "F": eta_id(&eta), "E": e, "outcome": "counterexample", "index": index}),
                ),
            })
        }
    }
}

fn assignment(m: &FiniteStructure, pairs: &[String]) -> Result<Assignment> {
    let mut a = Assignment::new();
    for p in pairs {
        let (name, value) = p.split_once('=').with_context(|| format!("`{p}` is not name=value"))?;
        let v = match m.point(value.trim()) {
            Some(v) => v,
            None => Val::Real(input::rational(value.trim())?),
        };
        a.insert(name.trim().to_owned(), v);
    }
    Ok(a)
}

fn logic(l: &LogicCommand) -> Result<Report> {
    let LogicCommand::Check {
        structure,
        formula,
        mode,
        assign,
    } = l;
    let m = input::structure(structure)?;
    let phi = parse_formula(formula, m.signature()).with_context(|| format!("cannot parse `{formula}`"))?;
    let a = assignment(&m, assign)?;
    let (holds, extra, json) = match mode {
        LogicMode::Exact => (satisfies(&m, &phi, &a)?, String::new(), json!({"mode": "exact"})),
        LogicMode::Approx => {
            let g = gap(&m, &phi, &a)?;
            (
                approx_satisfies(&m, &phi, &a)?,
                format!(" (gap {})", q(&g)),
                json!({"mode": "approx", "gap": q(&g)}),
            )
        }
    };
    let relation = match (mode, holds) {
        (LogicMode::Exact, true) => "⊨",
        (LogicMode::Exact, false) => "⊭",
        (LogicMode::Approx, true) => "⊨≈",
        (LogicMode::Approx, false) => "⊭≈",
    };
    let line = format!("M {relation} {phi}{extra}");
    let mut json = json;
    json["formula"] = json!(phi.to_string());
    json["holds"] = json!(holds);
    Ok(Report::new(holds, vec![line], json))
}

fn audit_lines(title: &str, audit: &Audit) -> Vec<String> {
    let mut lines = vec![title.to_owned()];
    for c in &audit.clauses {
        match &c.witness {
            None => lines.push(format!("  PASS {}", c.name)),
            Some(w) => lines.push(format!("  FAIL {} at {w}", c.name)),
        }
    }
    lines
}

fn measure(m: &MeasureCommand) -> Result<Report> {
    match m {
        MeasureCommand::Audit {
            structure,
            functions,
            scalars,
        } => {
            let ms = input::measure(structure)?;
            let fs = functions
                .iter()
                .map(|f| Ok(ms.function_from_json(&input::function_value(f)?)?))
                .collect::<Result<Vec<_>>>()?;
            let scalars = scalars.iter().map(|s| input::rational(s)).collect::<Result<Vec<_>>>()?;
            let pre = audit_preloeb(&ms)?;
            let int = audit_integration(&ms, &fs, &scalars)?;
            let holds = pre.all_passed() && int.all_passed();
            let mut lines = audit_lines("measure structure:", &pre);
            lines.extend(audit_lines("integration:", &int));
            lines.push(if holds { "all clauses hold".into() } else { "some clauses fail".into() });
            Ok(Report::new(holds, lines, json!({"holds": holds, "preloeb": pre, "integration": int})))
        }
        MeasureCommand::Integrate { structure, f } => {
            let ms = input::measure(structure)?;
            let f = ms.function_from_json(&input::function_value(f)?)?;
            let i = integrate(&ms, &f)?;
            let (ip, in_) = (integrate(&ms, &f.pos())?, integrate(&ms, &f.neg())?);
            let lines = vec![
                format!("I f = {}", q(&i)),
                format!("I f₊ = {}, I f₋ = {}", q(&ip), q(&in_)),
            ];
            Ok(Report::new(true, lines, json!({"integral": q(&i), "positive_part": q(&ip), "negative_part": q(&in_)})))
        }
        MeasureCommand::Tv { structure, mode } => {
            let ms = input::measure(structure)?;
            let (mode, name) = match mode {
                TvChoice::Fast => (TvMode::Fast, "fast"),
                TvChoice::Audit => (TvMode::Audit, "audit"),
            };
            let tv = ms.total_variation(mode)?;
            Ok(Report::new(true, vec![format!("‖μ‖ = {}", q(&tv))], json!({"tv": q(&tv), "mode": name})))
        }
    }
}

fn dct(d: &DctCommand) -> Result<Report> {
    match d {
        DctCommand::Check { family } => {
            let fams = input::families(std::slice::from_ref(family))?;
            let mut lines = Vec::new();
            let mut rows = Vec::new();
            let mut holds = true;
            for (k, fam) in fams.iter().enumerate() {
                let c = dct_inequality_check(fam)?;
                holds &= c.holds;
                lines.push(format!(
                    "{}osc(Iφ) = {} {} ‖μ‖·max osc(φ(ω)) = {}",
                    if fams.len() > 1 { format!("family {k}: ") } else { String::new() },
                    q(&c.lhs),
                    if c.holds { "≤" } else { ">" },
                    q(&c.rhs)
                ));
                rows.push(json!({"lhs": q(&c.lhs), "rhs": q(&c.rhs), "holds": c.holds}));
            }
            let json = if rows.len() == 1 { rows.remove(0) } else { json!({"holds": holds, "families": rows}) };
            Ok(Report::new(holds, lines, json))
        }
        DctCommand::Search(s) => search(s),
    }
}

fn search(s: &SearchArgs) -> Result<Report> {
    let r = input::rational(&s.r)?;
    let bound = input::rational(&s.s)?;
    let eta = input::sampling(&s.f)?;
    let grid = s.eps_grid.iter().map(|e| input::rational(e)).collect::<Result<Vec<_>>>()?;
    let class_gen = MonotoneSliceClass {
        levels: s.levels,
        len: s.len,
        ..MonotoneSliceClass::default()
    };
    let class = if s.monotone { class_gen.enumerate() } else { input::families(&s.class)? };
    if class.is_empty() {
        bail!("the class is empty");
    }
    let rate_r = match &s.rate_r {
        Some(text) => {
            let path = std::path::Path::new(text);
            let text = if path.is_file() { input::read(path)? } else { text.clone() };
            let v: Value = serde_json::from_str(&text).context("E^r is not valid JSON")?;
            formats::rate_from_value(v.get("rate").unwrap_or(&v))?
        }
        None => {
            let f = eta.function().context("the default E^r needs a sampling given by F")?;
            let per: BTreeMap<Rational, RateSet> = grid
                .iter()
                .filter(|e| **e > r)
                .map(|e| Ok((e.clone(), monotone_uniform_rate(e, f)?)))
                .collect::<Result<_>>()?;
            RateSpec::per_epsilon(per, r.clone())?
        }
    };
    let found = match metastable_dct_search(&class, &r, &bound, &eta, &rate_r, &grid, s.horizon) {
        Ok(found) => found,
        Err(DctError::PreconditionViolated { family, slice, reason }) => {
            let at = slice.map(|w| format!(", slice {w}")).unwrap_or_default();
            return Ok(Report::new(
                false,
                vec![format!("precondition violated by family {family}{at}: {reason}")],
                json!({"outcome": "precondition_violated", "family": family, "slice": slice, "reason": reason}),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let rate = match found {
        DctSearch::Found(rate) => rate,
        DctSearch::Infeasible { eps, family } => {
            return Ok(Report::new(
                false,
                vec![format!(
                    "infeasible at ε = {}: family {family} has no witness up to i={}",
                    q(&eps),
                    s.horizon
                )],
                json!({"outcome": "infeasible", "eps": q(&eps), "family": family, "horizon": s.horizon}),
            ))
        }
    };
    let mut lines = vec![format!("class of {} families, threshold r·s = {}", class.len(), q(rate.r()))];
    for e in rate.epsilons() {
        lines.push(format!("  ε = {}: Ẽ = {}", q(&e), show_set(rate.rate_for(&e, None).expect("listed ε"))));
    }
    let mut json = json!({"outcome": "found", "families": class.len(), "rate": formats::rate_to_value(&rate)});
    let mut holds = true;
    if s.validate > 0 {
        let seed = gen::seed_from_env(0);
        let mut rng = gen::rng(seed);
        let held_out = (0..s.validate)
            .map(|_| integral_sequence(&class_gen.sample(&mut rng)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut failures = Vec::new();
        for e in rate.epsilons() {
            let set = rate.rate_for(&e, None).expect("listed ε");
            if let AuditOutcome::Counterexample { index } = uniform_rate_audit(&held_out, &e, &eta, set)? {
                failures.push(json!({"eps": q(&e), "index": index}));
                lines.push(format!("  held-out family {index} fails at ε = {}", q(&e)));
            }
        }
        holds = failures.is_empty();
        lines.push(format!(
            "held-out validation on {} families (seed {seed}): {}",
            s.validate,
            if holds { "pass" } else { "FAIL" }
        ));
        json["validation"] = json!({"seed": seed, "size": s.validate, "passed": holds, "failures": failures});
    }
    Ok(Report::new(holds, lines, json))
}
