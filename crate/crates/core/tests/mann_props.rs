use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use regseq_core::mann::{solve_homogeneous, solve_unit, sumset_sizes, MannMonoid};
use regseq_core::Exec;

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Products of powers of the generators with every exponent at most `e`.
fn elements(gens: &[u64], e: u32) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for &g in gens {
        let powers: Vec<BigInt> = (0..=e).map(|k| BigInt::from(g).pow(k)).collect();
        out = out.iter().flat_map(|x| powers.iter().map(move |p| x * p)).collect();
    }
    out.sort();
    out.dedup();
    out
}

fn in_monoid(x: &BigInt, gens: &[u64]) -> bool {
    let mut x = x.clone();
    if x <= BigInt::zero() {
        return false;
    }
    for &g in gens {
        let g = BigInt::from(g);
        while (&x % &g).is_zero() {
            x /= &g;
        }
    }
    x.is_one()
}

fn nondegenerate(a: &[BigInt], t: &[BigInt]) -> bool {
    let s = t.len();
    (1..(1u32 << s) - 1).all(|mask| {
        let sum: BigInt = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| &a[i] * &t[i]).sum();
        !sum.is_zero()
    })
}

#[test]
fn base_solutions_verify_exactly() {
    let m = MannMonoid::new(&[2, 3]).unwrap();
    for coeffs in [&[1i64, 1, -1][..], &[1, -1], &[2, 1, -1], &[1, 1, 1, -1]] {
        let a = ints(coeffs);
        let s = solve_homogeneous(&a, &m, 8, Exec::default()).unwrap();
        for b in s.base.iter().chain(&s.outside_families) {
            let sum: BigInt = a.iter().zip(b).map(|(c, x)| c * x).sum();
            assert!(sum.is_zero(), "{coeffs:?}: {b:?}");
            assert!(nondegenerate(&a, b), "{coeffs:?}: {b:?}");
            assert!(b.iter().all(|x| in_monoid(x, &[2, 3])), "{coeffs:?}: {b:?}");
        }
    }
    let q = [BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into())];
    let u = solve_unit(&q, &m, 10, Exec::default()).unwrap();
    for t in &u.solutions {
        let sum: BigRational = q.iter().zip(t).map(|(c, x)| c * BigRational::from_integer(x.clone())).sum();
        assert!(sum.is_one(), "{t:?}");
        assert!(q.iter().zip(t).all(|(c, x)| !(c * BigRational::from_integer(x.clone())).is_zero()));
    }
}

#[test]
fn unit_scan_is_complete() {
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let e = 12;
    let q = [BigRational::from_integer(1.into()), BigRational::from_integer((-1).into())];
    let got: BTreeSet<Vec<BigInt>> = solve_unit(&q, &m, e, Exec::default()).unwrap().solutions.into_iter().collect();
    let elems = elements(&[2, 3], e);
    let mut want = BTreeSet::new();
    for x in &elems {
        for y in &elems {
            if x - y == BigInt::one() {
                want.insert(vec![x.clone(), y.clone()]);
            }
        }
    }
    assert_eq!(got, want);
}

#[test]
fn homogeneous_scan_is_complete() {
    let gens = [2u64, 3];
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let e = 5;
    let a = ints(&[1, 1, -1]);
    let s = solve_homogeneous(&a, &m, e, Exec::default()).unwrap();
    assert!(s.outside_scanned);
    let elems = elements(&gens, e);
    let explained = |t: &[BigInt]| {
        s.in_family(t)
            || s.outside_families.iter().any(|p| {
                (&t[0] % &p[0]).is_zero() && {
                    let k = &t[0] / &p[0];
                    in_monoid(&k, &gens) && t.iter().zip(p).all(|(x, y)| x == &(&k * y))
                }
            })
    };
    for x in &elems {
        for y in &elems {
            let z = x + y;
            if elems.binary_search(&z).is_ok() {
                let t = vec![x.clone(), y.clone(), z];
                assert!(explained(&t), "{t:?} is not covered");
            }
        }
    }
}

#[test]
fn sumsets_grow_strictly() {
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let sizes = sumset_sizes(&m, 10_000, 4);
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{sizes:?}");
}

#[test]
fn families_are_closed_under_multipliers() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let m = MannMonoid::new(&[2, 3]).unwrap();
    let a = ints(&[1, 1, -1]);
    let s = solve_homogeneous(&a, &m, 20, Exec::default()).unwrap();
    let mut tried = 0;
    while tried < 20 {
        let mult = BigInt::from(2).pow(rng.gen_range(0..20)) * BigInt::from(3).pow(rng.gen_range(0..13));
        if mult > BigInt::from(1_000_000) {
            continue;
        }
        tried += 1;
        for b in &s.base {
            let t: Vec<BigInt> = b.iter().map(|x| x * &mult).collect();
            let sum: BigInt = a.iter().zip(&t).map(|(c, x)| c * x).sum();
            assert!(sum.is_zero(), "{t:?}");
            assert!(nondegenerate(&a, &t), "{t:?}");
            assert!(s.in_family(&t), "{t:?}");
        }
    }
}
