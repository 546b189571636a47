use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use regseq_core::axioms::{verify_ax5, verify_ax6, AxiomBudget, AxiomOutcome};
use regseq_core::equation::Budget;
use regseq_core::formula::{check_witness, decide_str, normalize, parse, Atom, Binder, DecideBudget, Lin, Nnf, Verdict};
use regseq_core::{Operator, SequenceHandle, SequenceSpec};

/// Sentences over the integers with at most one bounded integer variable `t`.
#[derive(Debug, Clone)]
enum G {
    Div(u64, i64, i64),
    Eq(i64, i64, i64),
    Ne(i64, i64, i64),
    InR(i64, i64),
    Not(Box<G>),
    And(Box<G>, Box<G>),
    Or(Box<G>, Box<G>),
}

/// `c + k*t`.
fn term(c: i64, k: i64) -> String {
    match k {
        0 => c.to_string(),
        k if k < 0 => format!("{c} - {}*t", -k),
        _ => format!("{c} + {k}*t"),
    }
}

fn render(g: &G) -> String {
    match g {
        G::Div(m, c, k) => format!("D{m}({})", term(*c, *k)),
        G::Eq(a, c, k) => format!("{a} = {}", term(*c, *k)),
        G::Ne(a, c, k) => format!("{a} != {}", term(*c, *k)),
        G::InR(c, k) => format!("R({})", term(*c, *k)),
        G::Not(x) => format!("~({})", render(x)),
        G::And(a, b) => format!("({}) & ({})", render(a), render(b)),
        G::Or(a, b) => format!("({}) | ({})", render(a), render(b)),
    }
}

fn power_of_two(v: &BigInt) -> bool {
    v.is_positive() && (v & (v - BigInt::one())).is_zero()
}

fn eval(g: &G, t: i64) -> bool {
    match g {
        G::Div(m, c, k) => (c + k * t).rem_euclid(*m as i64) == 0,
        G::Eq(a, c, k) => *a == c + k * t,
        G::Ne(a, c, k) => *a != c + k * t,
        G::InR(c, k) => power_of_two(&BigInt::from(c + k * t)),
        G::Not(x) => !eval(x, t),
        G::And(a, b) => eval(a, t) && eval(b, t),
        G::Or(a, b) => eval(a, t) || eval(b, t),
    }
}

fn ground() -> impl Strategy<Value = G> {
    let leaf = prop_oneof![
        (2u64..=6, -20i64..=20, -2i64..=2).prop_map(|(m, c, k)| G::Div(m, c, k)),
        (-10i64..=10, -10i64..=10, -2i64..=2).prop_map(|(a, c, k)| G::Eq(a, c, k)),
        (-10i64..=10, -10i64..=10, -2i64..=2).prop_map(|(a, c, k)| G::Ne(a, c, k)),
        (-4i64..=40, -3i64..=3).prop_map(|(c, k)| G::InR(c, k)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|g| G::Not(Box::new(g))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| G::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| G::Or(Box::new(a), Box::new(b))),
        ]
    })
}

fn lin_value(l: &Lin, env: &BTreeMap<String, BigInt>) -> BigInt {
    assert!(l.r.is_empty(), "no sequence variables in these sentences");
    l.int.iter().fold(l.constant.clone(), |acc, (v, c)| acc + c * &env[v])
}

/// Direct evaluation of a normal form over 2^n, without the decider.
fn eval_nnf(f: &Nnf, env: &mut BTreeMap<String, BigInt>) -> bool {
    match f {
        Nnf::True => true,
        Nnf::False => false,
        Nnf::Lit(pos, a) => {
            let v = match a {
                Atom::Eq(l) => lin_value(l, env).is_zero(),
                Atom::Div(m, l) => lin_value(l, env).mod_floor(&BigInt::from(*m)).is_zero(),
                Atom::InR(l) => power_of_two(&lin_value(l, env)),
                other => panic!("unexpected atom {other:?}"),
            };
            v == *pos
        }
        Nnf::And(v) => v.iter().all(|g| eval_nnf(g, env)),
        Nnf::Or(v) => v.iter().any(|g| eval_nnf(g, env)),
        Nnf::Exists(b, body) | Nnf::Forall(b, body) => {
            let Binder::Int(name, bound) = b else { panic!("no R binders here") };
            let bound: i64 = bound.try_into().unwrap();
            let exists = matches!(f, Nnf::Exists(..));
            let mut result = !exists;
            for t in -bound..=bound {
                env.insert(name.clone(), BigInt::from(t));
                let v = eval_nnf(body, env);
                if v == exists {
                    result = exists;
                    break;
                }
            }
            env.remove(name);
            result
        }
    }
}

fn pow2() -> Arc<SequenceHandle> {
    Arc::new(SequenceHandle::new(SequenceSpec::power(2)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalization_preserves_truth(g in ground(), quant in 0u8..3, bound in 0i64..=4) {
        let body = render(&g);
        let (src, truth) = match quant {
            0 => (body.replace('t', "0"), eval(&g, 0)),
            1 => (format!("E t <= {bound}. {body}"), (-bound..=bound).any(|t| eval(&g, t))),
            _ => (format!("A t <= {bound}. {body}"), (-bound..=bound).all(|t| eval(&g, t))),
        };
        let parsed = parse(&src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let nnf = normalize(&parsed);
        prop_assert_eq!(eval_nnf(&nnf, &mut BTreeMap::new()), truth, "{} ~> {}", src, nnf);
        match decide_str(&src, &pow2(), &DecideBudget::default()).unwrap() {
            Verdict::True { .. } => prop_assert!(truth, "{}", src),
            Verdict::False { .. } => prop_assert!(!truth, "{}", src),
            Verdict::Unknown { .. } => {}
        }
    }
}

/// Sentences with R quantifiers, from fixed templates.
fn r_sentence() -> impl Strategy<Value = String> {
    prop_oneof![
        (2u64..=9, -5i64..=5, 0usize..=4).prop_map(|(m, c, i)| format!("E x in R. D{m}(x + {c}) & x > {i}")),
        (2u64..=9, -5i64..=5).prop_map(|(m, c)| format!("A x in R. D{m}(S(x) + {c})")),
        (-40i64..=40).prop_map(|z| format!("E x in R. E y in R. x + y = {z}")),
        (-3i64..=3, 1i64..=3, -20i64..=20).prop_map(|(a, b, z)| format!("E x in R. f[{a}, {b}](x) = {z}")),
        (2u64..=7, 0i64..=6).prop_map(|(m, k)| format!("E x in R. R(x + {k}) & D{m}(x)")),
    ]
}

fn doubled(b: &DecideBudget) -> DecideBudget {
    DecideBudget {
        scan: b.scan * 2,
        max_stabilization: b.max_stabilization * 2,
        max_int_range: b.max_int_range * 2,
        equation: Budget {
            max_offset: b.equation.max_offset * 2,
            max_anchor: b.equation.max_anchor * 2,
            exec: b.equation.exec,
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witnesses_check_and_budgets_are_monotone(src in r_sentence(), fib in any::<bool>()) {
        let spec = if fib { SequenceSpec::fibonacci() } else { SequenceSpec::power(2) };
        let h = Arc::new(SequenceHandle::new(spec).unwrap());
        let small = DecideBudget { scan: 64, max_stabilization: 256, ..DecideBudget::default() };
        let a = decide_str(&src, &h, &small).unwrap();
        let b = decide_str(&src, &h, &doubled(&small)).unwrap();
        match &a {
            Verdict::True { witness } => {
                prop_assert!(b.is_true(), "{} flipped to {:?}", src, b);
                let nnf = normalize(&parse(&src).unwrap());
                if !src.starts_with('A') {
                    prop_assert!(check_witness(&nnf, &h, witness).unwrap(), "{} witness {:?}", src, witness);
                }
            }
            Verdict::False { .. } => prop_assert!(b.is_false(), "{} flipped to {:?}", src, b),
            Verdict::Unknown { .. } => {}
        }
    }
}

#[test]
fn ax5_constants_survive_a_fresh_window() {
    let h = SequenceHandle::new(SequenceSpec::fibonacci()).unwrap();
    for c in [&[-1i64, -1, 1][..], &[-2, 1], &[1, -3, 1], &[0, -1, 0, 1]] {
        let op = Operator::from_i64(c).unwrap();
        let report = verify_ax5(&h, &op, &AxiomBudget::default()).unwrap();
        let AxiomOutcome::Ax5Holds { c: k, certificate, .. } = report.outcome else { panic!("{c:?}: {report:?}") };
        if !certificate.is_proved() {
            continue;
        }
        let r = h.prefix(k + 200 + op.degree()).unwrap();
        let zero_at = |n: usize| op.coeffs().iter().enumerate().map(|(i, a)| a * &r[n + i]).sum::<BigInt>().is_zero();
        let first = zero_at(k);
        assert!((k..=k + 200).all(|n| zero_at(n) == first), "{c:?} from {k}");
    }
}

#[test]
fn ax6_offsets_survive_a_fresh_window() {
    let cases: Vec<(SequenceSpec, Vec<Operator>)> = vec![
        (SequenceSpec::fibonacci(), vec![Operator::from_i64(&[1]).unwrap(), Operator::from_i64(&[-1, -1]).unwrap()]),
        (SequenceSpec::power(2), vec![Operator::from_i64(&[2]).unwrap(), Operator::from_i64(&[-1]).unwrap()]),
        (SequenceSpec::power(3), vec![Operator::from_i64(&[1, 1]).unwrap(), Operator::from_i64(&[-4]).unwrap()]),
    ];
    for (spec, ops) in cases {
        let h = Arc::new(SequenceHandle::new(spec.clone()).unwrap());
        let report = verify_ax6(&h, &ops, &AxiomBudget::default()).unwrap();
        let AxiomOutcome::Ax6Holds { c, offsets, certificate, .. } = report.outcome else {
            panic!("{spec:?}: {report:?}")
        };
        assert!(certificate.is_proved(), "{spec:?}");
        let top = c + 200;
        let r = h.prefix(top + 2).unwrap();
        let f = |op: &Operator, n: usize| -> BigInt { op.coeffs().iter().enumerate().map(|(i, a)| a * &r[n + i]).sum() };
        for x in c..=top {
            for y in c..=top {
                let (u, v) = (f(&ops[0], x), f(&ops[1], y));
                if !u.is_zero() && !v.is_zero() && (&u + &v).is_zero() {
                    let k = y as i64 - x as i64;
                    assert!(offsets.contains(&vec![k]), "{spec:?}: ({x}, {y}) has offset {k}, families {offsets:?}");
                }
            }
        }
    }
}
