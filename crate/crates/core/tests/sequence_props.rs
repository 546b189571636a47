use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use regseq_core::{char_poly, KeplerLimit, SequenceHandle, SequenceSpec};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Nonnegative recurrences with a_0, a_{k-1} >= 1 and increasing initials
/// always produce strictly increasing sequences.
fn recurrence() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (1usize..=3).prop_flat_map(|k| {
        (
            proptest::collection::vec(0i64..=3, k),
            proptest::collection::vec(1i64..=5, k),
        )
            .prop_map(move |(mut a, steps)| {
                a[0] = a[0].max(1);
                a[k - 1] = a[k - 1].max(1);
                if k == 1 {
                    a[0] = a[0].max(2);
                }
                let initials = steps
                    .iter()
                    .scan(0i64, |acc, s| {
                        *acc += s;
                        Some(*acc)
                    })
                    .collect();
                (a, initials)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recurrence_fidelity((a, init) in recurrence()) {
        let h = SequenceHandle::new(SequenceSpec::recurrence(&a, &init)).unwrap();
        let k = a.len();
        let r = h.prefix(200 + k + 1).unwrap();
        for n in 0..=200 {
            let rhs: BigInt = a.iter().enumerate().map(|(i, c)| BigInt::from(*c) * &r[n + i]).sum();
            prop_assert_eq!(&r[n + k], &rhs);
        }
    }

    #[test]
    fn sum_satisfies_char_poly_recurrence(b1 in 2i64..=5, b2 in 2i64..=5, fib in any::<bool>()) {
        let mut parts = vec![SequenceSpec::power(b1)];
        if fib {
            parts.push(SequenceSpec::fibonacci());
        } else {
            parts.push(SequenceSpec::power(b2));
        }
        let spec = SequenceSpec::sum(parts);
        let Some(p) = char_poly(&spec) else { return Ok(()) };
        let rec = p.recurrence();
        let k = p.degree();
        let h = SequenceHandle::new(spec).unwrap();
        let r = h.prefix(200 + k + 1).unwrap();
        for n in 0..=200 {
            let rhs: BigInt = rec.iter().enumerate().map(|(i, c)| c * &r[n + i]).sum();
            prop_assert_eq!(&r[n + k], &rhs);
        }
    }
}

#[test]
fn evaluation_is_deterministic() {
    let specs = [
        SequenceSpec::fibonacci(),
        SequenceSpec::Factorial,
        SequenceSpec::sum(vec![SequenceSpec::power(2), SequenceSpec::power(3)]),
    ];
    for spec in specs {
        let a = SequenceHandle::new(spec.clone()).unwrap();
        let b = SequenceHandle::new(spec).unwrap();
        let forward = a.prefix(119).unwrap();
        let backward: Vec<BigInt> = (0..120).rev().map(|n| b.eval(n).unwrap()).collect();
        assert_eq!(forward, backward.into_iter().rev().collect::<Vec<_>>());
        assert_eq!(forward[77], a.eval(77).unwrap());
    }
}

#[test]
fn isolation_is_sound() {
    let eps = rat(1, 20);
    let specs = [
        SequenceSpec::fibonacci(),
        SequenceSpec::power(3),
        SequenceSpec::recurrence(&[1, 0, 1], &[1, 2, 3]),
        SequenceSpec::recurrence(&[1, 2], &[1, 3]),
        SequenceSpec::sum(vec![SequenceSpec::power(2), SequenceSpec::power(3)]),
    ];
    for spec in specs {
        let h = SequenceHandle::new(spec.clone()).unwrap();
        match h.kepler_limit(&rat(1, 1_000_000), 512) {
            KeplerLimit::AlgebraicRoot { minpoly, interval } => {
                let p = minpoly.poly();
                let (lo, hi) = (&interval.lo, &interval.hi);
                if lo == hi {
                    assert_eq!(p.sign_at(lo), 0, "{spec:?}");
                } else {
                    assert!(p.sign_at(lo) * p.sign_at(hi) < 0, "{spec:?}");
                }
                for n in 10..=100 {
                    let q = h.ratio(n).unwrap();
                    assert!(q > lo - &eps && q < hi + &eps, "{spec:?} n={n}");
                }
            }
            other => panic!("{spec:?}: expected an algebraic limit, got {other:?}"),
        }
    }
}

#[test]
fn factorial_limit_is_infinite() {
    let h = SequenceHandle::new(SequenceSpec::Factorial).unwrap();
    assert_eq!(h.kepler_limit(&rat(1, 1000), 256), KeplerLimit::Infinite);
    assert_eq!(h.eval(0).unwrap(), BigInt::from(2));
    assert_eq!(h.eval(3).unwrap(), BigInt::from(120));
}
