//! Command-line front end: sequence specs in, canonical JSON reports out.
//!
//! Exit codes: 0 success or True, 1 False or violation, 2 Unknown,
//! 3 usage, IO or parse errors.

pub mod args;
pub mod sets;
pub mod suite;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use regseq_core::axioms::{verify_ax5, verify_ax6, AxiomBudget};
use regseq_core::equation::{brute_force, solve_full, solve_nondegenerate, Budget, EquationProblem, ProblemFile};
use regseq_core::formula::{decide_str, DecideBudget, Verdict};
use regseq_core::mann::{induced_trace, parse_linear_equation, solve_homogeneous, solve_unit, MannMonoid};
use regseq_core::numstr::parse_int;
use regseq_core::syndetic::{brown_decompose, cover_check, gap_runs};
use regseq_core::{classify, profile, Error, Exec, Operator, SequenceHandle, SequenceSpec};

use args::{Cli, Command, Global, MannCmd, SyndeticCmd};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { code: EXIT_OK, report }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExhausted { .. } | Error::OutOfFragment(_) | Error::BoundedProfile { .. } => EXIT_UNKNOWN,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Sorts object keys recursively so output does not depend on map flavour.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        other => other,
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v.clone())).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn exec(g: &Global) -> Exec {
    if g.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types always serialize")
}

pub fn load_spec(path: &Path) -> CliResult<SequenceSpec> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn load_handle(path: &Path, scan: usize) -> CliResult<Arc<SequenceHandle>> {
    Ok(Arc::new(SequenceHandle::with_scan_budget(load_spec(path)?, scan)?))
}

/// Parses `[a0, a1, ...]` (brackets optional).
pub fn parse_operator(s: &str) -> CliResult<Operator> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    let coeffs = body
        .split(',')
        .map(|t| parse_int(t.trim()).map_err(|e| CliError::usage(format!("operator {s:?}: {e}"))))
        .collect::<CliResult<Vec<BigInt>>>()?;
    Ok(Operator::new(coeffs)?)
}

pub fn parse_operators(s: &str) -> CliResult<Vec<Operator>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_operator).collect()
}

fn parse_gens(s: &str) -> CliResult<MannMonoid> {
    let gens = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| CliError::usage(format!("generator {t:?}: {e}"))))
        .collect::<CliResult<Vec<i64>>>()?;
    Ok(MannMonoid::new(&gens)?)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: e.code,
            report: json!({ "error": e.message }),
        },
    }
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { seq, start, count } => {
            let h = load_handle(seq, g.scan)?;
            let values = (*start..start + count)
                .map(|n| h.eval(n).map(|v| Value::String(v.to_string())))
                .collect::<regseq_core::Result<Vec<Value>>>()?;
            Ok(Outcome::ok(json!({ "start": start, "values": values })))
        }
        Command::Classify { seq, op } => {
            let h = load_handle(seq, g.scan)?;
            let op = parse_operator(op)?;
            let class = classify(&op, &h, g.scan)?;
            Ok(Outcome::ok(json!({ "operator": to_json(&op), "classification": to_json(&class) })))
        }
        Command::Solve {
            seq,
            problem,
            oracle,
            max_offset,
            max_anchor,
        } => solve(g, seq.as_deref(), problem, *oracle, *max_offset, *max_anchor),
        Command::Decide { seq, formula, search } => {
            let h = load_handle(seq, g.scan)?;
            let src = read(formula)?;
            let budget = DecideBudget {
                scan: *search,
                equation: Budget {
                    exec: exec(g),
                    ..Budget::default()
                },
                ..DecideBudget::default()
            };
            let v = decide_str(&src, &h, &budget)?;
            let code = match v {
                Verdict::True { .. } => EXIT_OK,
                Verdict::False { .. } => EXIT_FALSE,
                Verdict::Unknown { .. } => EXIT_UNKNOWN,
            };
            Ok(Outcome {
                code,
                report: to_json(&v),
            })
        }
        Command::Periodicity { seq, modulus } => {
            let h = load_handle(seq, g.scan)?;
            Ok(Outcome::ok(to_json(&profile(&h, *modulus)?)))
        }
        Command::Syndetic(cmd) => syndetic(g, cmd),
        Command::Mann(cmd) => mann(g, cmd),
        Command::VerifyAx5 { seq, op } => {
            let h = load_handle(seq, g.scan)?;
            let op = parse_operator(op)?;
            let r = verify_ax5(&h, &op, &axiom_budget(g, 200))?;
            Ok(axiom_outcome(to_json(&r), r.holds(), r.is_violation()))
        }
        Command::VerifyAx6 { seq, ops, window } => {
            let h = load_handle(seq, g.scan)?;
            let ops = parse_operators(ops)?;
            let r = verify_ax6(&h, &ops, &axiom_budget(g, *window))?;
            Ok(axiom_outcome(to_json(&r), r.holds(), r.is_violation()))
        }
        Command::Suite => Ok(Outcome::ok(suite::run_suite(exec(g)))),
    }
}

fn axiom_budget(g: &Global, window: usize) -> AxiomBudget {
    AxiomBudget {
        scan: g.scan,
        window,
        equation: Budget {
            exec: exec(g),
            ..Budget::default()
        },
        ..AxiomBudget::default()
    }
}

fn axiom_outcome(report: Value, holds: bool, violation: bool) -> Outcome {
    let code = if holds {
        EXIT_OK
    } else if violation {
        EXIT_FALSE
    } else {
        EXIT_UNKNOWN
    };
    Outcome { code, report }
}

fn solve(
    g: &Global,
    seq: Option<&Path>,
    problem: &Path,
    oracle: Option<usize>,
    max_offset: usize,
    max_anchor: usize,
) -> CliResult<Outcome> {
    let mut raw: Value =
        serde_json::from_str(&read(problem)?).map_err(|e| CliError::usage(format!("{}: {e}", problem.display())))?;
    if let Some(p) = seq {
        let spec = serde_json::to_value(load_spec(p)?).expect("specs serialize");
        match raw.as_object_mut() {
            Some(obj) => {
                obj.insert("sequence".into(), spec);
            }
            None => return Err(CliError::usage("problem file must be a JSON object")),
        }
    }
    let file: ProblemFile =
        serde_json::from_value(raw).map_err(|e| CliError::usage(format!("{}: {e}", problem.display())))?;
    let h = Arc::new(SequenceHandle::with_scan_budget(file.sequence, g.scan)?);
    let p = EquationProblem::new(h.clone(), file.operators, file.target)?;
    let budget = Budget {
        max_offset,
        max_anchor,
        exec: exec(g),
    };
    let desc = solve_full(&p, &budget)?;
    let nondegenerate = match solve_nondegenerate(&p, &budget) {
        Ok(s) => to_json(&s),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let patterns: Vec<Value> = nondegenerate["patterns"]
        .as_array()
        .map(|ps| ps.iter().map(|p| p["offsets"].clone()).collect())
        .unwrap_or_default();
    let mut report = json!({
        "description": to_json(&desc),
        "nondegenerate": nondegenerate,
        "patterns": patterns,
    });
    let mut code = EXIT_OK;
    if let Some(n) = oracle {
        let brute: BTreeSet<Vec<usize>> = brute_force(&p, n, budget.exec)?.into_iter().map(|t| t.tuple).collect();
        let claimed = desc.instantiate(&h, n)?;
        let missing: Vec<&Vec<usize>> = brute.difference(&claimed).collect();
        let extra: Vec<&Vec<usize>> = claimed.difference(&brute).collect();
        let ok = missing.is_empty() && extra.is_empty();
        if !ok {
            code = EXIT_FALSE;
            eprintln!("oracle mismatch on [0, {n}]: missing {missing:?}, extra {extra:?}");
        }
        report["oracle"] = json!({
            "n": n,
            "status": if ok { "match" } else { "mismatch" },
            "solutions": brute.len(),
            "missing": missing,
            "extra": extra,
        });
    }
    Ok(Outcome { code, report })
}

fn syndetic(g: &Global, cmd: &SyndeticCmd) -> CliResult<Outcome> {
    let ex = exec(g);
    let report = match cmd {
        SyndeticCmd::GapRuns { set, n, d } => to_json(&gap_runs(&sets::parse_set(set, g.scan)?, *n, *d)?),
        SyndeticCmd::CoverCheck { a, d, images, n } => {
            let imgs = images
                .iter()
                .map(|s| sets::parse_set(s, g.scan))
                .collect::<CliResult<Vec<_>>>()?;
            to_json(&cover_check(*a, *d, &imgs, *n, ex)?)
        }
        SyndeticCmd::Brown { set, parts, n, d } => {
            let whole = sets::parse_set(set, g.scan)?;
            let parts = parts
                .iter()
                .map(|s| sets::parse_set(s, g.scan))
                .collect::<CliResult<Vec<_>>>()?;
            to_json(&brown_decompose(&whole, &parts, *n, *d, ex)?)
        }
    };
    Ok(Outcome::ok(report))
}

fn mann(g: &Global, cmd: &MannCmd) -> CliResult<Outcome> {
    let ex = exec(g);
    match cmd {
        MannCmd::Solve { gens, eq, exp_bound } => {
            let m = parse_gens(gens)?;
            let (a, z) = parse_linear_equation(eq)?;
            let report = if z == BigInt::from(0) {
                json!({ "kind": "homogeneous", "result": to_json(&solve_homogeneous(&a, &m, *exp_bound, ex)?) })
            } else {
                let q: Vec<BigRational> = a.iter().map(|c| BigRational::new(c.clone(), z.clone())).collect();
                json!({ "kind": "unit", "result": to_json(&solve_unit(&q, &m, *exp_bound, ex)?) })
            };
            Ok(Outcome::ok(report))
        }
        MannCmd::Trace { gens, eq, exp_bound } => {
            let m = parse_gens(gens)?;
            let (a, z) = parse_linear_equation(eq)?;
            if z != BigInt::from(0) {
                return Err(CliError::usage("trace needs a homogeneous equation"));
            }
            Ok(Outcome::ok(to_json(&induced_trace(&a, &m, *exp_bound, ex)?)))
        }
    }
}
