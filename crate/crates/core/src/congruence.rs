//! Eventual periodicity of `r_n mod m` and of divisibility index sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::sequence::{SequenceHandle, SequenceSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceProfile {
    pub modulus: u64,
    pub preperiod: usize,
    pub period: usize,
    /// `r_n mod m` for `n < preperiod + period`.
    pub residues: Vec<u64>,
}

impl CongruenceProfile {
    /// Predicted `r_n mod m` for any `n`.
    pub fn residue(&self, n: usize) -> u64 {
        self.residues[fold(n, self.preperiod, self.period)]
    }
}

fn fold(n: usize, pre: usize, period: usize) -> usize {
    if n < pre {
        n
    } else {
        pre + (n - pre) % period
    }
}

fn red(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn addmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

/// Finite-state machine producing `r_n mod m`.
#[derive(Clone)]
enum Machine {
    Recurrence { coeffs: Vec<u64> },
    Power { base: u64 },
    Factorial,
    Sum(Vec<Machine>),
    Closed { exps: Vec<(u64, u64)>, polys: Vec<(u64, u32)> },
}

impl Machine {
    fn build(spec: &SequenceSpec, m: u64) -> Result<(Machine, Vec<u64>)> {
        Ok(match spec {
            SequenceSpec::LinearRecurrence { coeffs, initials } => (
                Machine::Recurrence {
                    coeffs: coeffs.iter().map(|c| red(c, m)).collect(),
                },
                initials.iter().map(|c| red(c, m)).collect(),
            ),
            SequenceSpec::PowerBase { base } => (Machine::Power { base: red(base, m) }, vec![1 % m]),
            SequenceSpec::Factorial => (Machine::Factorial, vec![2 % m, 2 % m]),
            SequenceSpec::SumOf { parts } => {
                let mut ms = Vec::new();
                let mut state = Vec::new();
                for p in parts {
                    let (mm, s) = Machine::build(p, m)?;
                    ms.push(mm);
                    state.extend(s);
                }
                (Machine::Sum(ms), state)
            }
            SequenceSpec::Table { values, generator } => match generator {
                None => return Err(Error::BoundedProfile { scanned: values.len() }),
                Some(g) => {
                    let exps: Vec<(u64, u64)> = g
                        .exp_terms()
                        .iter()
                        .map(|(c, b)| (red(c, m), red(b, m)))
                        .collect();
                    let polys = g.poly_terms().iter().map(|(c, p)| (red(c, m), *p)).collect();
                    let mut state: Vec<u64> = exps.iter().map(|_| 1 % m).collect();
                    state.push(0);
                    (Machine::Closed { exps, polys }, state)
                }
            },
        })
    }

    fn width(&self) -> usize {
        match self {
            Machine::Recurrence { coeffs } => coeffs.len(),
            Machine::Power { .. } => 1,
            Machine::Factorial => 2,
            Machine::Sum(ms) => ms.iter().map(|x| x.width()).sum(),
            Machine::Closed { exps, .. } => exps.len() + 1,
        }
    }

    fn step(&self, s: &[u64], m: u64) -> Vec<u64> {
        match self {
            Machine::Recurrence { coeffs } => {
                let next = coeffs
                    .iter()
                    .zip(s)
                    .fold(0, |acc, (a, r)| addmod(acc, mulmod(*a, *r, m), m));
                let mut v = s[1..].to_vec();
                v.push(next);
                v
            }
            Machine::Power { base } => vec![mulmod(s[0], *base, m)],
            Machine::Factorial => {
                let k = addmod(s[1], 1, m);
                vec![mulmod(s[0], k, m), k]
            }
            Machine::Sum(ms) => {
                let mut out = Vec::with_capacity(s.len());
                let mut at = 0;
                for mm in ms {
                    let w = mm.width();
                    out.extend(mm.step(&s[at..at + w], m));
                    at += w;
                }
                out
            }
            Machine::Closed { exps, .. } => {
                let mut v: Vec<u64> = exps.iter().zip(s).map(|((_, b), x)| mulmod(*x, *b, m)).collect();
                v.push(addmod(s[exps.len()], 1, m));
                v
            }
        }
    }

    fn output(&self, s: &[u64], m: u64) -> u64 {
        match self {
            Machine::Recurrence { .. } | Machine::Power { .. } | Machine::Factorial => s[0],
            Machine::Sum(ms) => {
                let mut at = 0;
                let mut acc = 0;
                for mm in ms {
                    let w = mm.width();
                    acc = addmod(acc, mm.output(&s[at..at + w], m), m);
                    at += w;
                }
                acc
            }
            Machine::Closed { exps, polys } => {
                let n = s[exps.len()];
                let mut acc = exps
                    .iter()
                    .zip(s)
                    .fold(0, |acc, ((c, _), x)| addmod(acc, mulmod(*c, *x, m), m));
                for (c, p) in polys {
                    let mut t = *c;
                    for _ in 0..*p {
                        t = mulmod(t, n, m);
                    }
                    acc = addmod(acc, t, m);
                }
                acc
            }
        }
    }
}

/// Floyd cycle detection on the state sequence; returns `(mu, lambda)`.
fn cycle(machine: &Machine, start: &[u64], m: u64) -> (usize, usize) {
    let f = |s: &[u64]| machine.step(s, m);
    let mut tortoise = f(start);
    let mut hare = f(&tortoise);
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&f(&hare));
    }
    let mut mu = 0;
    tortoise = start.to_vec();
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    let mut lambda = 1;
    hare = f(&tortoise);
    while tortoise != hare {
        hare = f(&hare);
        lambda += 1;
    }
    (mu, lambda)
}

/// Minimal period and preperiod of a sequence known to be periodic with
/// period `lambda` from index `mu`; `vals` must cover `[0, mu + 2 lambda)`.
fn minimize(vals: &[u64], mu: usize, lambda: usize) -> (usize, usize) {
    let mut p = lambda;
    for d in divisors(lambda) {
        if (mu..mu + lambda).all(|n| vals[n] == vals[n + d]) {
            p = d;
            break;
        }
    }
    let mut rho = mu;
    while rho > 0 && vals[rho - 1] == vals[rho - 1 + p] {
        rho -= 1;
    }
    (rho, p)
}

fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Eventual periodicity of `r_n mod m`, cached per modulus on the handle.
pub fn profile(h: &SequenceHandle, m: u64) -> Result<CongruenceProfile> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    if let Some(p) = h.profiles.lock().unwrap().get(&m) {
        return Ok(p.clone());
    }
    let p = compute_profile(h.spec(), m)?;
    h.profiles.lock().unwrap().insert(m, p.clone());
    Ok(p)
}

fn compute_profile(spec: &SequenceSpec, m: u64) -> Result<CongruenceProfile> {
    let (machine, start) = Machine::build(spec, m)?;
    let (mu, lambda) = cycle(&machine, &start, m);
    let mut vals = Vec::with_capacity(mu + 2 * lambda);
    let mut s = start;
    for _ in 0..mu + 2 * lambda {
        vals.push(machine.output(&s, m));
        s = machine.step(&s, m);
    }
    let (rho, p) = minimize(&vals, mu, lambda);
    vals.truncate(rho + p);
    Ok(CongruenceProfile {
        modulus: m,
        preperiod: rho,
        period: p,
        residues: vals,
    })
}

/// Eventually periodic set of naturals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicIndexSet {
    pub preperiod: usize,
    pub period: usize,
    /// Residues `n mod period` accepted for `n >= preperiod`.
    pub accepted: BTreeSet<usize>,
    /// Members below the preperiod.
    pub exceptions: BTreeSet<usize>,
}

impl PeriodicIndexSet {
    pub fn all() -> Self {
        Self::from_fn(0, 1, |_| true)
    }

    pub fn empty() -> Self {
        Self::from_fn(0, 1, |_| false)
    }

    /// Builds the set from a predicate that is periodic with `period` from
    /// `preperiod` on, then minimizes the description.
    pub fn from_fn(preperiod: usize, period: usize, pred: impl Fn(usize) -> bool) -> Self {
        let period = period.max(1);
        let bits: Vec<u64> = (0..preperiod + 2 * period).map(|n| pred(n) as u64).collect();
        let (rho, p) = minimize(&bits, preperiod, period);
        PeriodicIndexSet {
            preperiod: rho,
            period: p,
            accepted: (0..p)
                .filter(|&r| {
                    // smallest n >= rho with n mod p == r
                    let n = rho + (r + p - rho % p) % p;
                    bits[n] == 1
                })
                .collect(),
            exceptions: (0..rho).filter(|&n| bits[n] == 1).collect(),
        }
    }

    pub fn contains(&self, n: usize) -> bool {
        if n < self.preperiod {
            self.exceptions.contains(&n)
        } else {
            self.accepted.contains(&(n % self.period))
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        let pre = self.preperiod.max(other.preperiod);
        let per = self.period.lcm(&other.period);
        Self::from_fn(pre, per, |n| f(self.contains(n), other.contains(n)))
    }

    pub fn and(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn not(&self) -> Self {
        Self::from_fn(self.preperiod, self.period, |n| !self.contains(n))
    }

    pub fn is_empty(&self) -> bool {
        self.exceptions.is_empty() && self.accepted.is_empty()
    }

    pub fn is_cofinite(&self) -> bool {
        self.accepted.len() == self.period
    }

    /// Smallest member, if any.
    pub fn min(&self) -> Option<usize> {
        self.exceptions
            .iter()
            .next()
            .copied()
            .or_else(|| (self.preperiod..self.preperiod + self.period).find(|&n| self.contains(n)))
    }
}

/// `{ n : m | f(n) + k }`.
pub fn divisibility_set(h: &SequenceHandle, op: &Operator, k: &BigInt, m: u64) -> Result<PeriodicIndexSet> {
    let prof = profile(h, m)?;
    let coeffs: Vec<u64> = op.coeffs().iter().map(|a| red(a, m)).collect();
    let kr = red(k, m);
    Ok(PeriodicIndexSet::from_fn(prof.preperiod, prof.period, |n| {
        let v = coeffs
            .iter()
            .enumerate()
            .fold(kr, |acc, (i, a)| addmod(acc, mulmod(*a, prof.residue(n + i), m), m));
        v.is_zero()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::apply;

    fn h(spec: SequenceSpec) -> SequenceHandle {
        SequenceHandle::new(spec).unwrap()
    }

    #[test]
    fn profile_examples() {
        let p = profile(&h(SequenceSpec::power(2)), 3).unwrap();
        assert_eq!((p.preperiod, p.period, p.residues.clone()), (0, 2, vec![1, 2]));
        let p = profile(&h(SequenceSpec::Factorial), 4).unwrap();
        assert_eq!((p.preperiod, p.period, p.residues.clone()), (2, 1, vec![2, 2, 0]));
        let p = profile(&h(SequenceSpec::fibonacci()), 2).unwrap();
        assert_eq!((p.preperiod, p.period, p.residues.clone()), (0, 3, vec![1, 0, 1]));
        assert_eq!(profile(&h(SequenceSpec::power(2)), 1), Err(Error::BadModulus(1)));
        let t = h(SequenceSpec::Table {
            values: vec![BigInt::from(1), BigInt::from(5)],
            generator: None,
        });
        assert_eq!(profile(&t, 3), Err(Error::BoundedProfile { scanned: 2 }));
    }

    #[test]
    fn profiles_match_direct_evaluation() {
        let specs = vec![
            SequenceSpec::fibonacci(),
            SequenceSpec::Factorial,
            SequenceSpec::sum(vec![SequenceSpec::power(2), SequenceSpec::power(3)]),
            SequenceSpec::generated("2^n + n".parse().unwrap()),
            SequenceSpec::recurrence(&[1, 0, 1], &[1, 2, 3]),
        ];
        for spec in specs {
            let hd = h(spec);
            for m in [2u64, 3, 4, 6, 7, 12, 30] {
                let p = profile(&hd, m).unwrap();
                for n in 0..=p.preperiod + 5 * p.period {
                    assert_eq!(p.residue(n), red(&hd.eval(n).unwrap(), m), "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn divisibility_examples() {
        let p2 = h(SequenceSpec::power(2));
        let id = Operator::from_i64(&[1]).unwrap();
        let s = divisibility_set(&p2, &id, &BigInt::from(2), 3).unwrap();
        for n in 0..=10 {
            assert_eq!(s.contains(n), n % 2 == 0);
        }
        let p4 = h(SequenceSpec::power(4));
        let any = Operator::from_i64(&[3, -1, 5]).unwrap();
        let s = divisibility_set(&p4, &any, &BigInt::zero(), 2).unwrap();
        // 4^0 = 1 is odd, so n = 0 is the only possible exception.
        for n in 1..20 {
            assert!(s.contains(n));
        }
        let fib = h(SequenceSpec::fibonacci());
        let s = divisibility_set(&fib, &id, &BigInt::zero(), 2).unwrap();
        for n in 0..30 {
            assert_eq!(s.contains(n), n % 3 == 1);
        }
    }

    #[test]
    fn divisibility_matches_direct() {
        let fib = h(SequenceSpec::fibonacci());
        let op = Operator::from_i64(&[2, -1, 3]).unwrap();
        for m in [5u64, 8, 9] {
            for k in [-3i64, 0, 4] {
                let s = divisibility_set(&fib, &op, &BigInt::from(k), m).unwrap();
                for n in 0..=s.preperiod + 5 * s.period {
                    let v = apply(&op, &fib, n).unwrap() + k;
                    assert_eq!(s.contains(n), red(&v, m) == 0);
                }
            }
        }
    }

    #[test]
    fn set_algebra() {
        let even = PeriodicIndexSet::from_fn(0, 2, |n| n % 2 == 0);
        let three = PeriodicIndexSet::from_fn(0, 3, |n| n % 3 == 0);
        let both = even.and(&three);
        assert_eq!(both.period, 6);
        assert_eq!(both.min(), Some(0));
        assert!(even.and(&even.not()).is_empty());
        assert!(even.or(&even.not()).is_cofinite());
        let late = PeriodicIndexSet::from_fn(5, 1, |n| n >= 5);
        assert_eq!(late.preperiod, 5);
        assert_eq!(late.min(), Some(5));
    }
}
