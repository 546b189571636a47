//! Linear equations over a finitely generated multiplicative monoid.
//!
//! Solutions are searched over monoid elements whose generator exponents
//! are at most `E`, so every completeness claim is `BoundedCheck(E)`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::exec::{map_collect, Exec};
use crate::numstr;

pub const DEFAULT_EXPONENT_BOUND: u32 = 64;

const OUTSIDE_SCAN_CAP: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MannMonoid {
    generators: Vec<i64>,
}

impl MannMonoid {
    pub fn new(generators: &[i64]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &g in generators {
            if g.unsigned_abs() < 2 {
                return Err(Error::Invalid(format!("generator {g} must have absolute value at least 2")));
            }
            if !seen.insert(g) {
                return Err(Error::Invalid(format!("generator {g} listed twice")));
            }
        }
        Ok(MannMonoid {
            generators: generators.to_vec(),
        })
    }

    pub fn generators(&self) -> &[i64] {
        &self.generators
    }

    /// Sorted elements with absolute value at most `bound`.
    pub fn enumerate(&self, bound: &BigInt) -> Vec<BigInt> {
        let mut out: BTreeSet<BigInt> = BTreeSet::new();
        if bound < &BigInt::one() {
            return Vec::new();
        }
        let mut frontier = vec![BigInt::one()];
        out.insert(BigInt::one());
        while let Some(x) = frontier.pop() {
            for &g in &self.generators {
                let y = &x * g;
                if y.abs() <= *bound && out.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Distinct elements `prod g_i^{e_i}` with every `e_i <= e`, sorted.
    pub fn elements_with_exponents(&self, e: u32) -> Vec<BigInt> {
        let mut acc: BTreeSet<BigInt> = [BigInt::one()].into();
        for &g in &self.generators {
            let powers: Vec<BigInt> = (0..=e).map(|k| BigInt::from(g).pow(k)).collect();
            acc = acc.iter().flat_map(|x| powers.iter().map(move |p| x * p)).collect();
        }
        acc.into_iter().collect()
    }
}

impl fmt::Display for MannMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", g.join(","))
    }
}

/// No nonempty proper subset of the terms sums to zero.
fn nondegenerate(terms: &[BigRational]) -> bool {
    let n = terms.len();
    if n >= 20 {
        return false;
    }
    (1..(1u32 << n) - 1).all(|mask| {
        let s: BigRational = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &terms[i]).sum();
        !s.is_zero()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitSolutions {
    #[serde(with = "numstr::big_vecs")]
    pub solutions: Vec<Vec<BigInt>>,
    pub certificate: Certificate,
}

/// Non-degenerate solutions of `sum q_i x_i = 1` over elements with
/// exponents at most `e`.
pub fn solve_unit(q: &[BigRational], m: &MannMonoid, e: u32, exec: Exec) -> Result<UnitSolutions> {
    if q.is_empty() || q.iter().any(|c| c.is_zero()) {
        return Err(Error::Invalid("coefficients must be nonzero and nonempty".into()));
    }
    let elems = m.elements_with_exponents(e);
    let set: HashSet<&BigInt> = elems.iter().collect();
    let n = q.len();
    let one = BigRational::one();
    let solve_last = |partial: &BigRational| -> Option<BigInt> {
        let x = (&one - partial) / &q[n - 1];
        (x.is_integer() && set.contains(x.numer())).then(|| x.numer().clone())
    };
    let mut found: Vec<Vec<BigInt>> = if n == 1 {
        solve_last(&BigRational::zero()).into_iter().map(|x| vec![x]).collect()
    } else {
        let firsts: Vec<&BigInt> = elems.iter().collect();
        map_collect(exec, firsts, |x0| {
            let mut out = Vec::new();
            let mut prefix = vec![x0.clone()];
            let partial = &q[0] * BigRational::from_integer(x0.clone());
            walk(&elems, q, 1, &mut prefix, partial, &solve_last, &mut out);
            out
        })
        .into_iter()
        .flatten()
        .collect()
    };
    found.retain(|t| {
        let terms: Vec<BigRational> = t.iter().zip(q).map(|(x, c)| c * BigRational::from_integer(x.clone())).collect();
        nondegenerate(&terms)
    });
    found.sort();
    found.dedup();
    Ok(UnitSolutions {
        solutions: found,
        certificate: Certificate::bounded(e as usize),
    })
}

fn walk(
    elems: &[BigInt],
    q: &[BigRational],
    depth: usize,
    prefix: &mut Vec<BigInt>,
    partial: BigRational,
    last: &dyn Fn(&BigRational) -> Option<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    if depth == q.len() - 1 {
        if let Some(x) = last(&partial) {
            let mut t = prefix.clone();
            t.push(x);
            out.push(t);
        }
        return;
    }
    for x in elems {
        prefix.push(x.clone());
        let p = &partial + &q[depth] * BigRational::from_integer(x.clone());
        walk(elems, q, depth + 1, prefix, p, last, out);
        prefix.pop();
    }
}

/// Solutions of a sub-equation on `blocks[i]`, for a split of the variables
/// into vanishing sub-sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerateSplit {
    pub blocks: Vec<Vec<usize>>,
    /// Base solutions of each block's own equation (first slot 1).
    pub bases: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MannSolutionSet {
    #[serde(with = "numstr::big_vec")]
    pub coefficients: Vec<BigInt>,
    pub monoid: MannMonoid,
    /// Non-degenerate solutions with first slot 1; each spans the family `base * M`.
    #[serde(with = "numstr::big_vecs")]
    pub base: Vec<Vec<BigInt>>,
    /// Non-degenerate solutions in `M^n` with first slot not 1 that are not a
    /// monoid multiple of a base tuple (their normalization leaves `M`).
    #[serde(with = "numstr::big_vecs")]
    pub outside_families: Vec<Vec<BigInt>>,
    /// Whether `outside_families` was computed (small arity and element count only).
    pub outside_scanned: bool,
    pub degenerate: Vec<DegenerateSplit>,
    pub exponent_bound: u32,
    pub certificate: Certificate,
}

impl MannSolutionSet {
    /// Whether `t` is `m * b` for a base tuple `b` and some `m` (any integer).
    pub fn in_family(&self, t: &[BigInt]) -> bool {
        self.base.iter().any(|b| t.iter().zip(b).all(|(x, y)| x == &(&t[0] * y)))
    }
}

/// Solutions of `sum a_i x_i = 0` with `x_i` in the monoid.
pub fn solve_homogeneous(a: &[BigInt], m: &MannMonoid, e: u32, exec: Exec) -> Result<MannSolutionSet> {
    if a.len() < 2 || a.iter().any(|c| c.is_zero()) {
        return Err(Error::Invalid("need at least two nonzero coefficients".into()));
    }
    let a1 = BigRational::from_integer(a[0].clone());
    let q: Vec<BigRational> = a[1..].iter().map(|c| -BigRational::from_integer(c.clone()) / &a1).collect();
    let unit = solve_unit(&q, m, e, exec)?;
    let base: Vec<Vec<BigInt>> = unit
        .solutions
        .into_iter()
        .map(|t| std::iter::once(BigInt::one()).chain(t).collect())
        .collect();

    // Tuples with a non-unit first slot: scan x_1 over the bounded elements,
    // the rest as a unit equation scaled by x_1.
    let elems = m.elements_with_exponents(e);
    let set: HashSet<&BigInt> = elems.iter().collect();
    let mut outside = Vec::new();
    let outside_scanned = a.len() <= 3 && elems.len() <= OUTSIDE_SCAN_CAP;
    if outside_scanned {
        for x1 in elems.iter().filter(|x| !x.is_one()) {
            let scaled: Vec<BigRational> = q.iter().map(|c| c / BigRational::from_integer(x1.clone())).collect();
            for t in solve_unit(&scaled, m, e, Exec::Sequential)?.solutions {
                let full: Vec<BigInt> = std::iter::once(x1.clone()).chain(t).collect();
                let reduces = base.iter().any(|b| full.iter().zip(b).all(|(x, y)| x == &(x1 * y)));
                if !reduces && full.iter().all(|x| set.contains(x)) && is_primitive(&full, &outside, m) {
                    outside.push(full);
                }
            }
        }
    }
    outside.sort();

    let mut degenerate = Vec::new();
    let n = a.len();
    for rgs in crate::equation::set_partitions(n) {
        let blocks = crate::equation::blocks_of(&rgs);
        if blocks.len() < 2 || blocks.iter().any(|b| b.len() < 2) {
            continue;
        }
        let mut bases = Vec::new();
        for b in &blocks {
            let sub: Vec<BigInt> = b.iter().map(|&i| a[i].clone()).collect();
            let s = solve_homogeneous(&sub, m, e, exec)?;
            bases.push(s.base.iter().map(|t| t.iter().map(|x| x.to_string()).collect()).collect::<Vec<_>>());
        }
        if bases.iter().all(|b: &Vec<Vec<String>>| !b.is_empty()) {
            degenerate.push(DegenerateSplit { blocks, bases });
        }
    }
    Ok(MannSolutionSet {
        coefficients: a.to_vec(),
        monoid: m.clone(),
        base,
        outside_families: outside,
        outside_scanned,
        degenerate,
        exponent_bound: e,
        certificate: Certificate::bounded(e as usize),
    })
}

/// Not a monoid multiple (by a non-unit) of an already listed tuple.
fn is_primitive(t: &[BigInt], listed: &[Vec<BigInt>], m: &MannMonoid) -> bool {
    !listed.iter().any(|p| {
        if !(&t[0] % &p[0]).is_zero() {
            return false;
        }
        let k = &t[0] / &p[0];
        !k.is_one() && divides_into_monoid(&k, m) && t.iter().zip(p).all(|(x, y)| x == &(&k * y))
    })
}

fn divides_into_monoid(k: &BigInt, m: &MannMonoid) -> bool {
    let mut k = k.clone();
    if k.is_one() {
        return true;
    }
    let mut changed = true;
    while changed && !k.is_one() {
        changed = false;
        for &g in m.generators() {
            let g = BigInt::from(g);
            if (&k % &g).is_zero() {
                k /= g;
                changed = true;
            }
        }
    }
    k.is_one()
}

/// The solution families as atoms `x_j = s_g(x_1)` of the unary-function
/// language, where `s_g` is multiplication by `g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InducedTrace {
    pub families: Vec<String>,
    /// Every non-degenerate tuple found by enumeration with `x_1` in the
    /// bounded monoid part lies in a family, and conversely.
    pub round_trip: bool,
}

pub fn induced_trace(a: &[BigInt], m: &MannMonoid, e: u32, exec: Exec) -> Result<InducedTrace> {
    let s = solve_homogeneous(a, m, e, exec)?;
    let families = s
        .base
        .iter()
        .map(|b| {
            let mut atoms = vec!["x1 in M".to_string()];
            for (j, g) in b.iter().enumerate().skip(1) {
                atoms.push(format!("x{} = s_{}(x1)", j + 1, g));
            }
            atoms.join(" & ")
        })
        .collect();
    // Round trip on the normalized slice x_1 = 1 (families restricted there
    // are exactly the base tuples).
    let elems = m.elements_with_exponents(e);
    let set: HashSet<&BigInt> = elems.iter().collect();
    let mut ok = s.base.iter().all(|b| {
        let sum: BigInt = b.iter().zip(a).map(|(x, c)| x * c).sum();
        sum.is_zero() && b.iter().all(|x| set.contains(x))
    });
    if ok && a.len() == 2 {
        let want: BTreeSet<Vec<BigInt>> = elems
            .iter()
            .filter(|x| (&a[0] + &a[1] * *x).is_zero())
            .map(|x| vec![BigInt::one(), x.clone()])
            .collect();
        ok = want == s.base.iter().cloned().collect();
    }
    Ok(InducedTrace { families, round_trip: ok })
}

/// Sizes of `M^{+k} ∩ [0, bound]` for `k = 1..=kmax`, over positive elements.
pub fn sumset_sizes(m: &MannMonoid, bound: u64, kmax: usize) -> Vec<usize> {
    let elems: Vec<u64> = m
        .enumerate(&BigInt::from(bound))
        .into_iter()
        .filter(|x| x.is_positive())
        .filter_map(|x| u64::try_from(x).ok())
        .collect();
    let mut cur: BTreeSet<u64> = [0].into();
    let mut out = Vec::new();
    for _ in 0..kmax {
        let mut next = BTreeSet::new();
        for &s in &cur {
            for &x in &elems {
                if s + x > bound {
                    break;
                }
                next.insert(s + x);
            }
        }
        out.push(next.len());
        cur = next;
    }
    out
}

/// Parses `"2*x1 + x2 - 3x3 = 5"` into coefficients (by variable index) and
/// the right-hand side.
pub fn parse_linear_equation(s: &str) -> Result<(Vec<BigInt>, BigInt)> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| Error::Invalid(format!("missing '=' in {s:?}")))?;
    let rhs = numstr::parse_int(rhs).map_err(Error::Invalid)?;
    let mut coeffs: Vec<BigInt> = Vec::new();
    let cleaned = lhs.replace(' ', "").replace('-', "+-");
    for term in cleaned.split('+').filter(|t| !t.is_empty()) {
        let (c, v) = match term.find('x') {
            Some(p) => (&term[..p], &term[p + 1..]),
            None => return Err(Error::Invalid(format!("term {term:?} has no variable"))),
        };
        let c = c.trim_end_matches('*');
        let c: BigInt = match c {
            "" => BigInt::one(),
            "-" => -BigInt::one(),
            c => numstr::parse_int(c).map_err(Error::Invalid)?,
        };
        let idx: usize = v
            .parse()
            .ok()
            .filter(|i| *i >= 1)
            .ok_or_else(|| Error::Invalid(format!("bad variable in {term:?}")))?;
        if coeffs.len() < idx {
            coeffs.resize(idx, BigInt::zero());
        }
        coeffs[idx - 1] += c;
    }
    if coeffs.is_empty() {
        return Err(Error::Invalid("no variables".into()));
    }
    Ok((coeffs, rhs))
}
