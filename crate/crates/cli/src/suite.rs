//! Fixed battery shared by the `suite` command and the acceptance tests.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use regseq_core::axioms::{verify_ax6, AxiomBudget};
use regseq_core::equation::{solve_nondegenerate, Budget, EquationProblem};
use regseq_core::exec::map_collect;
use regseq_core::formula::{decide_str, DecideBudget};
use regseq_core::mann::{solve_homogeneous, solve_unit, MannMonoid};
use regseq_core::sequence::Generator;
use regseq_core::syndetic::{cover_check, gap_runs, EnumerableSet};
use regseq_core::{classify, profile, Exec, Operator, SequenceHandle, SequenceSpec};

/// Thirty operators of degree at most 4 with coefficients in [-9, 9],
/// as `a_0, ..., a_d`.
pub const BATTERY: [&[i64]; 30] = [
    &[-2, 1],
    &[-3, 1],
    &[-1, -1, 1],
    &[6, -5, 1],
    &[1],
    &[0, 1],
    &[1, 1],
    &[-1, 1],
    &[2, -3, 1],
    &[-4, 0, 1],
    &[-9, 0, 1],
    &[3, -4, 1],
    &[0, -2, 1],
    &[1, -1, -1, 1],
    &[-1, -2, 0, 1],
    &[0, -1, -1, 1],
    &[-6, 11, -6, 1],
    &[5, -7, 2],
    &[2, 1],
    &[-9, 1],
    &[1, -2, 1],
    &[4, -4, 1],
    &[9, -6, 1],
    &[-1, 0, 0, 0, 1],
    &[3, -1, -3, 1],
    &[-7, 2, 5],
    &[8, -9, 0, 1],
    &[-2, -1, 2, 1],
    &[-1, -1, -1, 1],
    &[-4, 1],
];

pub fn battery() -> Vec<Operator> {
    BATTERY
        .iter()
        .map(|c| Operator::from_i64(c).expect("battery operators have nonzero leading coefficient"))
        .collect()
}

/// The five reference sequences, by name.
pub fn sequences() -> Vec<(&'static str, SequenceSpec)> {
    vec![
        ("power2", SequenceSpec::power(2)),
        ("power3", SequenceSpec::power(3)),
        ("fibonacci", SequenceSpec::fibonacci()),
        ("factorial", SequenceSpec::Factorial),
        ("sum_2n_3n", SequenceSpec::sum(vec![SequenceSpec::power(2), SequenceSpec::power(3)])),
    ]
}

/// The equations of the shift-pattern check as (name, coefficients, target).
pub fn equations() -> Vec<(&'static str, Vec<i64>, i64)> {
    vec![
        ("x1+x2-x3=0", vec![1, 1, -1], 0),
        ("x1+x2-x4-x3=0", vec![1, 1, -1, -1], 0),
        ("2x1-x2=0", vec![2, -1], 0),
        ("x1-x2=1", vec![1, -1], 1),
    ]
}

/// Scalar operators `c * r_n`.
pub fn scalar_ops(cs: &[i64]) -> Vec<Operator> {
    cs.iter()
        .map(|&c| Operator::from_i64(&[c]).expect("nonzero scalar"))
        .collect()
}

pub fn table_2n_plus_n() -> SequenceSpec {
    SequenceSpec::Table {
        values: Vec::new(),
        generator: Some("2^n + n".parse::<Generator>().expect("valid generator")),
    }
}

pub const DECIDE_EXAMPLES: [&str; 3] = [
    "Sigma{D=[(x1+x2)]}(7)",
    "Sigma{D=[(x1+x2)]}(12)",
    "E x in R. D3(x + 2) & x > 1",
];

fn handle(spec: SequenceSpec) -> Arc<SequenceHandle> {
    Arc::new(SequenceHandle::new(spec).expect("reference sequences are valid"))
}

fn json_of<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types always serialize")
}

fn err(e: regseq_core::Error) -> Value {
    json!({ "error": e.to_string() })
}

fn classify_section(exec: Exec) -> Value {
    let ops = battery();
    let rows = map_collect(exec, sequences(), |(name, spec)| {
        let h = handle(spec);
        let verdicts: Vec<Value> = ops
            .iter()
            .map(|op| match classify(op, &h, 512) {
                Ok(c) => json!({ "operator": json_of(op), "classification": json_of(&c) }),
                Err(e) => err(e),
            })
            .collect();
        (name, Value::Array(verdicts))
    });
    Value::Object(rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn periodicity_section() -> Value {
    let cases = [
        ("power2_mod_3", SequenceSpec::power(2), 3),
        ("fibonacci_mod_2", SequenceSpec::fibonacci(), 2),
        ("factorial_mod_4", SequenceSpec::Factorial, 4),
    ];
    Value::Object(
        cases
            .into_iter()
            .map(|(k, spec, m)| {
                let v = profile(&handle(spec), m).map(|p| json_of(&p)).unwrap_or_else(err);
                (k.to_string(), v)
            })
            .collect(),
    )
}

fn solve_section(exec: Exec) -> Value {
    let budget = Budget {
        exec,
        ..Budget::default()
    };
    let rows = map_collect(exec, sequences(), |(name, spec)| {
        let h = handle(spec);
        let per_eq: Vec<Value> = equations()
            .into_iter()
            .filter(|(_, cs, _)| cs.len() <= 3)
            .map(|(eq, cs, z)| {
                let v = EquationProblem::new(h.clone(), scalar_ops(&cs), BigInt::from(z))
                    .and_then(|p| solve_nondegenerate(&p, &budget))
                    .map(|s| json_of(&s))
                    .unwrap_or_else(err);
                json!({ "equation": eq, "solution": v })
            })
            .collect();
        (name, Value::Array(per_eq))
    });
    Value::Object(rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn decide_section(exec: Exec) -> Value {
    let h = handle(SequenceSpec::power(2));
    let budget = DecideBudget {
        equation: Budget {
            exec,
            ..Budget::default()
        },
        ..DecideBudget::default()
    };
    Value::Array(
        DECIDE_EXAMPLES
            .iter()
            .map(|s| {
                let v = decide_str(s, &h, &budget).map(|v| json_of(&v)).unwrap_or_else(err);
                json!({ "formula": s, "verdict": v })
            })
            .collect(),
    )
}

fn mann_section(exec: Exec) -> Value {
    let m = MannMonoid::new(&[2, 3]).expect("valid generators");
    let q = [BigRational::from_integer(1.into()), BigRational::from_integer((-1).into())];
    let unit = solve_unit(&q, &m, 30, exec).map(|u| json_of(&u)).unwrap_or_else(err);
    let a: Vec<BigInt> = [1, 1, -1].iter().map(|&c| BigInt::from(c)).collect();
    let hom = solve_homogeneous(&a, &m, 20, exec)
        .map(|s| json_of(&s))
        .unwrap_or_else(err);
    json!({ "unit_1_-1_E30": unit, "homogeneous_1_1_-1_E20": hom })
}

fn ax6_section(exec: Exec) -> Value {
    let h = handle(table_2n_plus_n());
    let f = Operator::from_i64(&[2, -3, 1]).expect("valid operator");
    let budget = AxiomBudget {
        equation: Budget {
            exec,
            ..Budget::default()
        },
        ..AxiomBudget::default()
    };
    verify_ax6(&h, &[f.clone(), f.neg()], &budget)
        .map(|r| json_of(&r))
        .unwrap_or_else(err)
}

fn syndetic_section(exec: Exec) -> Value {
    let sums = EnumerableSet::sums_of(handle(SequenceSpec::power(2)), 2);
    let runs = gap_runs(&sums, 1 << 20, 16).map(|r| json_of(&r)).unwrap_or_else(err);
    let cover = cover_check(3, 4, &[EnumerableSet::sums_of(handle(SequenceSpec::power(2)), 1)], 1000, exec)
        .map(|r| json_of(&r))
        .unwrap_or_else(err);
    json!({ "gap_runs_2a_2b": runs, "cover_check_3_4": cover })
}

/// Every section, in a fixed order, with no timing or environment data.
pub fn run_suite(exec: Exec) -> Value {
    json!({
        "classify": classify_section(exec),
        "periodicity": periodicity_section(),
        "solve": solve_section(exec),
        "decide": decide_section(exec),
        "mann": mann_section(exec),
        "verify_ax6": ax6_section(exec),
        "syndetic": syndetic_section(exec),
    })
}
