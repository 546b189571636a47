//! Three-valued decision procedure for sentences.
//!
//! Quantifiers over R are settled exactly when every atom mentioning the
//! bound variable has a certified eventually periodic truth pattern; the
//! body is then checked on one preperiod plus one period. Otherwise the
//! search is bounded and a negative outcome is reported as unknown.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::ast::{Binder, SigmaDef};
use super::normalize::{normalize, Atom, Lin, Nnf};
use super::parser::parse;
use crate::certificate::{Certificate, ProofReason};
use crate::congruence::{divisibility_set, PeriodicIndexSet};
use crate::equation::{solve_full, Budget, EquationProblem, Validity};
use crate::error::{Error, Result};
use crate::operator::{classify, solve_inhomogeneous, identity, Operator, OperatorClass};
use crate::sequence::SequenceHandle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// Values of the existential variables (R variables by index).
    True { witness: BTreeMap<String, String> },
    False { certificate: Certificate },
    /// Nothing was decided beyond index `beyond`.
    Unknown { beyond: usize, reason: String },
}

impl Verdict {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True { .. })
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Verdict::False { .. })
    }
}

#[derive(Debug, Clone)]
pub struct DecideBudget {
    /// Indices tried by a bounded search over R.
    pub scan: usize,
    /// Largest preperiod plus period accepted for an exhaustive check.
    pub max_stabilization: usize,
    /// Largest range of a bounded integer quantifier.
    pub max_int_range: usize,
    pub equation: Budget,
}

impl Default for DecideBudget {
    fn default() -> Self {
        DecideBudget {
            scan: 256,
            max_stabilization: 4096,
            max_int_range: 100_000,
            equation: Budget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Val {
    Idx(usize),
    Int(BigInt),
}

type Witness = Vec<(String, String)>;

#[derive(Debug, Clone)]
enum K {
    T(Witness),
    F(Certificate),
    U(usize, String),
}

fn proved() -> Certificate {
    Certificate::proved(ProofReason::ExhaustiveBelowBound)
}

fn soften(e: Error) -> Result<K> {
    match e {
        Error::OutOfTable { index, .. } => Ok(K::U(index, "sequence table exhausted".into())),
        Error::BoundedProfile { scanned } => Ok(K::U(scanned, "residues of a bare table are not certified".into())),
        Error::BudgetExhausted { verified } => Ok(K::U(verified, "budget exhausted".into())),
        Error::NotFinitelySolvable { target } => Ok(K::U(0, format!("equation with target {target} not finitely solvable"))),
        e => Err(e),
    }
}

/// Parses, normalizes and decides a sentence.
pub fn decide_str(src: &str, h: &Arc<SequenceHandle>, budget: &DecideBudget) -> Result<Verdict> {
    decide(&normalize(&parse(src)?), h, budget)
}

pub fn decide(f: &Nnf, h: &Arc<SequenceHandle>, budget: &DecideBudget) -> Result<Verdict> {
    let free = f.free_vars();
    if let Some(v) = free.iter().next() {
        return Err(Error::OutOfFragment(format!("free variable {v}; only sentences can be decided")));
    }
    let d = Decider { h, budget };
    Ok(match d.eval(f, &mut BTreeMap::new())? {
        K::T(w) => Verdict::True {
            witness: w.into_iter().collect(),
        },
        K::F(certificate) => Verdict::False { certificate },
        K::U(beyond, reason) => Verdict::Unknown { beyond, reason },
    })
}

struct Decider<'a> {
    h: &'a Arc<SequenceHandle>,
    budget: &'a DecideBudget,
}

fn op_of(coeffs: &[BigInt]) -> Option<Operator> {
    Operator::new(coeffs.to_vec()).ok()
}

impl Decider<'_> {
    fn apply_at(&self, op: &[BigInt], n: usize) -> Result<BigInt> {
        let mut s = BigInt::zero();
        for (i, c) in op.iter().enumerate() {
            if !c.is_zero() {
                s += c * self.h.eval(n + i)?;
            }
        }
        Ok(s)
    }

    /// Value of `lin`, skipping the variable `skip`.
    fn value(&self, lin: &Lin, env: &BTreeMap<String, Val>, skip: Option<&str>) -> Result<BigInt> {
        let mut s = lin.constant.clone();
        for (v, op) in &lin.r {
            if Some(v.as_str()) == skip {
                continue;
            }
            match env.get(v) {
                Some(Val::Idx(n)) => s += self.apply_at(op, *n)?,
                _ => return Err(Error::Invalid(format!("unassigned R variable {v}"))),
            }
        }
        for (v, c) in &lin.int {
            if Some(v.as_str()) == skip {
                continue;
            }
            match env.get(v) {
                Some(Val::Int(x)) => s += c * x,
                _ => return Err(Error::Invalid(format!("unassigned integer variable {v}"))),
            }
        }
        Ok(s)
    }

    fn in_r(&self, v: &BigInt) -> Result<bool> {
        let mut n = 0;
        loop {
            let r = self.h.eval(n)?;
            if &r == v {
                return Ok(true);
            }
            if &r > v {
                return Ok(false);
            }
            n += 1;
        }
    }

    fn atom(&self, a: &Atom, env: &BTreeMap<String, Val>) -> Result<K> {
        let b = |t: bool| if t { K::T(Vec::new()) } else { K::F(proved()) };
        let r = (|| -> Result<K> {
            Ok(match a {
                Atom::Eq(l) => b(self.value(l, env, None)?.is_zero()),
                Atom::Div(m, l) => b(self.value(l, env, None)?.is_multiple_of(&BigInt::from(*m))),
                Atom::InR(l) => b(self.in_r(&self.value(l, env, None)?)?),
                Atom::IdxEq(v, i) => match env.get(v) {
                    Some(Val::Idx(n)) => b(n == i),
                    _ => return Err(Error::Invalid(format!("unassigned R variable {v}"))),
                },
                Atom::Sigma(d, args) => {
                    let z: Vec<BigInt> = args.iter().map(|l| self.value(l, env, None)).collect::<Result<_>>()?;
                    self.sigma(d, &z)?
                }
            })
        })();
        r.or_else(soften)
    }

    fn eval(&self, f: &Nnf, env: &mut BTreeMap<String, Val>) -> Result<K> {
        match f {
            Nnf::True => Ok(K::T(Vec::new())),
            Nnf::False => Ok(K::F(proved())),
            Nnf::Lit(pos, a) => {
                let k = self.atom(a, env)?;
                Ok(if *pos {
                    k
                } else {
                    match k {
                        K::T(_) => K::F(proved()),
                        K::F(_) => K::T(Vec::new()),
                        u => u,
                    }
                })
            }
            Nnf::And(v) => {
                let mut w = Vec::new();
                let mut unknown = None;
                for x in v {
                    match self.eval(x, env)? {
                        K::F(c) => return Ok(K::F(c)),
                        K::U(n, r) => {
                            unknown.get_or_insert((n, r));
                        }
                        K::T(x) => w.extend(x),
                    }
                }
                Ok(match unknown {
                    Some((n, r)) => K::U(n, r),
                    None => K::T(w),
                })
            }
            Nnf::Or(v) => {
                let mut certs = Vec::new();
                let mut unknown = None;
                for x in v {
                    match self.eval(x, env)? {
                        K::T(w) => return Ok(K::T(w)),
                        K::U(n, r) => {
                            unknown.get_or_insert((n, r));
                        }
                        K::F(c) => certs.push(c),
                    }
                }
                Ok(match unknown {
                    Some((n, r)) => K::U(n, r),
                    None => K::F(certs.into_iter().fold(proved(), Certificate::weakest)),
                })
            }
            Nnf::Exists(b, body) | Nnf::Forall(b, body) => {
                let exists = matches!(f, Nnf::Exists(..));
                let saved = env.get(b.name()).cloned();
                let out = match b {
                    Binder::Int(v, bound) => self.int_quant(exists, v, bound, body, env),
                    Binder::R(v) => self.r_quant(exists, v, body, env),
                };
                match saved {
                    Some(s) => {
                        env.insert(b.name().to_string(), s);
                    }
                    None => {
                        env.remove(b.name());
                    }
                }
                out
            }
        }
    }

    fn int_quant(&self, exists: bool, v: &str, bound: &BigInt, body: &Nnf, env: &mut BTreeMap<String, Val>) -> Result<K> {
        let b = bound
            .to_usize()
            .filter(|b| b.saturating_mul(2) < self.budget.max_int_range)
            .ok_or_else(|| Error::OutOfFragment(format!("integer quantifier bound {bound} exceeds the configured range")))?;
        let values = std::iter::once(BigInt::zero())
            .chain((1..=b).flat_map(|i| [BigInt::from(i), -BigInt::from(i)]));
        let mut unknown = None;
        for t in values {
            env.insert(v.to_string(), Val::Int(t.clone()));
            match (self.eval(body, env)?, exists) {
                (K::T(mut w), true) => {
                    w.push((v.to_string(), t.to_string()));
                    return Ok(K::T(w));
                }
                (K::F(c), false) => return Ok(K::F(c)),
                (K::U(n, r), _) => {
                    unknown.get_or_insert((n, r));
                }
                _ => {}
            }
        }
        Ok(match unknown {
            Some((n, r)) => K::U(n, r),
            None if exists => K::F(proved()),
            None => K::T(Vec::new()),
        })
    }

    fn r_quant(&self, exists: bool, x: &str, body: &Nnf, env: &mut BTreeMap<String, Val>) -> Result<K> {
        let (atoms, coupled) = body.atoms_with(x);
        let mut limit = None;
        if !coupled {
            let mut pre = 0usize;
            let mut period = 1usize;
            let mut ok = true;
            for a in atoms {
                match self.stabilization(a, x, env)? {
                    Some((p, q)) => {
                        pre = pre.max(p);
                        period = period.lcm(&q);
                        if pre.saturating_add(period) > self.budget.max_stabilization {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                limit = Some(pre + period);
            }
        }
        let exhaustive = limit.is_some();
        let n_max = limit.unwrap_or(self.budget.scan);
        let mut unknown = None;
        for n in 0..n_max {
            env.insert(x.to_string(), Val::Idx(n));
            match (self.eval(body, env)?, exists) {
                (K::T(mut w), true) => {
                    w.push((x.to_string(), n.to_string()));
                    return Ok(K::T(w));
                }
                (K::F(c), false) => return Ok(K::F(c)),
                (K::U(b, r), _) => {
                    unknown.get_or_insert((b, r));
                }
                _ => {}
            }
        }
        Ok(match unknown {
            Some((b, r)) => K::U(b, r),
            None if !exhaustive => K::U(
                n_max,
                format!(
                    "no {} below index {n_max} and the tail is not certified",
                    if exists { "witness" } else { "counterexample" }
                ),
            ),
            None if exists => K::F(proved()),
            None => K::T(Vec::new()),
        })
    }

    /// Index beyond which the truth of `a` as a function of `x` is periodic,
    /// with its period; `None` if that is not certified.
    fn stabilization(&self, a: &Atom, x: &str, env: &BTreeMap<String, Val>) -> Result<Option<(usize, usize)>> {
        let split = |l: &Lin| -> Result<Option<(Operator, BigInt)>> {
            let Some(op) = l.r.get(x).and_then(|c| op_of(c)) else {
                return Ok(None);
            };
            Ok(Some((op, self.value(l, env, Some(x))?)))
        };
        let budget = self.h.scan_budget();
        let r = (|| -> Result<Option<(usize, usize)>> {
            Ok(match a {
                Atom::IdxEq(_, i) => Some((i + 1, 1)),
                Atom::Sigma(..) => None,
                Atom::Eq(l) => {
                    let Some((op, c)) = split(l)? else { return Ok(Some((0, 1))) };
                    if c.is_zero() {
                        match classify(&op, self.h, budget)? {
                            OperatorClass::FiniteRoots {
                                roots,
                                cutoff,
                                certificate,
                            } if certificate.is_proved() => {
                                Some((cutoff.max(roots.last().map_or(0, |r| r + 1)) + 1, 1))
                            }
                            OperatorClass::CofiniteZero {
                                exceptions,
                                certificate,
                            } if certificate.is_proved() => Some((exceptions.last().map_or(0, |e| e + 1), 1)),
                            _ => None,
                        }
                    } else {
                        let (hits, cert) = solve_inhomogeneous(&op, self.h, &-c, budget)?;
                        cert.is_proved().then(|| (hits.last().map_or(0, |e| e + 1), 1))
                    }
                }
                Atom::Div(m, l) => {
                    let Some((op, c)) = split(l)? else { return Ok(Some((0, 1))) };
                    let s = divisibility_set(self.h, &op, &c, *m)?;
                    Some((s.preperiod, s.period.max(1)))
                }
                Atom::InR(l) => {
                    let Some((op, c)) = split(l)? else { return Ok(Some((0, 1))) };
                    let problem = EquationProblem::new(self.h.clone(), vec![op, identity().neg()], -c)?;
                    let desc = solve_full(&problem, &self.budget.equation)?;
                    if !desc.certificate.is_proved() {
                        return Ok(None);
                    }
                    let mut b = 0;
                    for case in &desc.cases {
                        for comp in &case.components {
                            let top = comp.solution.patterns.iter().flat_map(|p| p.offsets.iter()).max().copied().unwrap_or(0);
                            b = b.max(comp.solution.anchor_bound + top + 1);
                        }
                    }
                    Some((b, 1))
                }
            })
        })();
        match r {
            Ok(x) => Ok(x),
            Err(e) => soften(e).map(|_| None),
        }
    }

    /// Conditions of `d` on variable `j` as an index set.
    fn cond_set(&self, d: &SigmaDef, j: usize) -> Result<PeriodicIndexSet> {
        let mut s = PeriodicIndexSet::all();
        for c in d.conds.iter().filter(|c| c.var == j) {
            let set = match op_of(&c.op) {
                Some(op) => divisibility_set(self.h, &op, &c.k, c.modulus)?,
                None if c.k.is_multiple_of(&BigInt::from(c.modulus)) => PeriodicIndexSet::all(),
                None => PeriodicIndexSet::empty(),
            };
            s = s.and(&set);
        }
        Ok(s)
    }

    fn sigma(&self, d: &SigmaDef, z: &[BigInt]) -> Result<K> {
        let m = d.vars.len();
        let sets: Vec<PeriodicIndexSet> = (0..m).map(|j| self.cond_set(d, j)).collect::<Result<_>>()?;
        if d.rows.len() != 1 {
            return self.sigma_bounded(d, z, &sets);
        }
        let row = &d.rows[0];
        let used: Vec<usize> = (0..m).filter(|&j| row[j].iter().any(|c| !c.is_zero())).collect();
        let mut w: Witness = Vec::new();
        for j in (0..m).filter(|j| !used.contains(j)) {
            match sets[j].min() {
                Some(n) => w.push((d.vars[j].clone(), n.to_string())),
                None => return Ok(K::F(proved())),
            }
        }
        if used.is_empty() {
            return Ok(if z[0].is_zero() { K::T(w) } else { K::F(proved()) });
        }
        let ops: Vec<Operator> = used.iter().map(|&j| op_of(&row[j]).unwrap()).collect();
        let problem = EquationProblem::new(self.h.clone(), ops, z[0].clone())?;
        let desc = solve_full(&problem, &self.budget.equation)?;
        for case in &desc.cases {
            // Index set each block's common value must lie in.
            let block_sets: Vec<PeriodicIndexSet> = case
                .partition
                .iter()
                .map(|b| b.iter().fold(PeriodicIndexSet::all(), |acc, &p| acc.and(&sets[used[p]])))
                .collect();
            let mut y = vec![0usize; case.partition.len()];
            let mut all = true;
            for comp in &case.components {
                let bs: Vec<&PeriodicIndexSet> = comp.blocks.iter().map(|&b| &block_sets[b]).collect();
                match self.component_point(&comp.solution, &bs) {
                    Some(t) => {
                        for (b, v) in comp.blocks.iter().zip(t) {
                            y[*b] = v;
                        }
                    }
                    None => {
                        all = false;
                        break;
                    }
                }
            }
            if all {
                for (b, block) in case.partition.iter().enumerate() {
                    for &p in block {
                        w.push((d.vars[used[p]].clone(), y[b].to_string()));
                    }
                }
                w.sort();
                return Ok(K::T(w));
            }
        }
        Ok(if desc.certificate.is_proved() {
            K::F(desc.certificate)
        } else {
            let n = match desc.certificate {
                Certificate::BoundedCheck { checked_up_to } => checked_up_to,
                _ => 0,
            };
            K::U(n, "equation solved only up to a bound".into())
        })
    }

    /// A tuple of the component solution whose entries lie in `sets`.
    fn component_point(&self, sol: &crate::equation::NondegenerateSolution, sets: &[&PeriodicIndexSet]) -> Option<Vec<usize>> {
        let fits = |t: &[usize]| t.iter().zip(sets).all(|(v, s)| s.contains(*v));
        if let Some(t) = sol.sporadic.iter().find(|t| fits(t)) {
            return Some(t.clone());
        }
        let pre = sets.iter().map(|s| s.preperiod).max().unwrap_or(0);
        let period = sets.iter().fold(1usize, |acc, s| acc.lcm(&s.period.max(1)));
        for p in &sol.patterns {
            let anchors: Box<dyn Iterator<Item = usize>> = match &p.validity {
                Validity::FiniteBases { anchors } => Box::new(anchors.clone().into_iter()),
                Validity::CofiniteFrom { .. } => Box::new(0..sol.anchor_bound + pre + period),
            };
            for l in anchors {
                let t: Vec<usize> = p.offsets.iter().map(|o| l + o).collect();
                if p.valid_anchor(l) && fits(&t) {
                    return Some(t);
                }
            }
        }
        None
    }

    fn sigma_bounded(&self, d: &SigmaDef, z: &[BigInt], sets: &[PeriodicIndexSet]) -> Result<K> {
        let m = d.vars.len().max(1);
        let mut n = self.budget.scan.max(1);
        while n > 1 && (n as f64).powi(m as i32) > 1e6 {
            n -= 1;
        }
        let mut y = vec![0usize; d.vars.len()];
        loop {
            if y.iter().zip(sets).all(|(v, s)| s.contains(*v)) {
                let mut ok = true;
                for (row, zi) in d.rows.iter().zip(z) {
                    let mut s = BigInt::zero();
                    for (j, op) in row.iter().enumerate() {
                        s += self.apply_at(op, y[j])?;
                    }
                    if &s != zi {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    let w = d.vars.iter().cloned().zip(y.iter().map(|v| v.to_string())).collect();
                    return Ok(K::T(w));
                }
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == y.len() {
                    return Ok(K::U(n - 1, format!("several Sigma rows: searched indices below {n}")));
                }
                y[i] += 1;
                if y[i] < n {
                    break;
                }
                y[i] = 0;
                i += 1;
            }
        }
    }
}

/// Checks a witness of `E x1 ... E xk. body` for a prenex existential
/// sentence by evaluating the quantifier-free matrix.
pub fn check_witness(f: &Nnf, h: &Arc<SequenceHandle>, witness: &BTreeMap<String, String>) -> Result<bool> {
    let mut env = BTreeMap::new();
    let mut g = f;
    while let Nnf::Exists(b, body) = g {
        let Some(v) = witness.get(b.name()) else { return Ok(false) };
        let val = match b {
            Binder::R(_) => Val::Idx(v.parse().map_err(|_| Error::Invalid(format!("bad index {v}")))?),
            Binder::Int(..) => Val::Int(v.parse().map_err(|_| Error::Invalid(format!("bad integer {v}")))?),
        };
        env.insert(b.name().to_string(), val);
        g = body;
    }
    let d = Decider {
        h,
        budget: &DecideBudget::default(),
    };
    Ok(matches!(d.eval(g, &mut env)?, K::T(_)))
}

/// Checks that `witness` gives a point of the Sigma predicate at `z`.
pub fn check_sigma_witness(d: &SigmaDef, h: &SequenceHandle, z: &[BigInt], witness: &BTreeMap<String, String>) -> Result<bool> {
    let y: Vec<usize> = d
        .vars
        .iter()
        .map(|v| witness.get(v).and_then(|s| s.parse().ok()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Invalid("witness misses a Sigma variable".into()))?;
    let val = |op: &[BigInt], n: usize| -> Result<BigInt> {
        let mut s = BigInt::zero();
        for (i, c) in op.iter().enumerate() {
            s += c * h.eval(n + i)?;
        }
        Ok(s)
    };
    for c in &d.conds {
        let v = val(&c.op, y[c.var])? + &c.k;
        if !v.is_multiple_of(&BigInt::from(c.modulus)) {
            return Ok(false);
        }
    }
    for (row, zi) in d.rows.iter().zip(z) {
        let mut s = BigInt::zero();
        for (j, op) in row.iter().enumerate() {
            s += val(op, y[j])?;
        }
        if &s != zi {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceSpec;

    fn pow2() -> Arc<SequenceHandle> {
        Arc::new(SequenceHandle::new(SequenceSpec::power(2)).unwrap())
    }

    fn run(s: &str, h: &Arc<SequenceHandle>) -> Verdict {
        decide_str(s, h, &DecideBudget::default()).unwrap()
    }

    #[test]
    fn sums_of_two_powers() {
        let h = pow2();
        match run("Sigma{D=[(x1+x2)]}(7)", &h) {
            Verdict::False { certificate } => assert!(certificate.is_proved()),
            v => panic!("{v:?}"),
        }
        let f = parse("Sigma{D=[(x1+x2)]}(12)").unwrap();
        let Formula::Sigma(d, _) = &f.formula else { panic!() };
        match run("Sigma{D=[(x1+x2)]}(12)", &h) {
            Verdict::True { witness } => {
                assert!(check_sigma_witness(d, &h, &[BigInt::from(12)], &witness).unwrap());
                let mut idx: Vec<usize> = witness.values().map(|v| v.parse().unwrap()).collect();
                idx.sort();
                assert_eq!(idx, vec![2, 3]);
            }
            v => panic!("{v:?}"),
        }
    }

    use super::super::ast::Formula;

    #[test]
    fn divisibility_with_index_bound() {
        let h = pow2();
        let s = "E x in R. D3(x + 2) & x > 1";
        match run(s, &h) {
            Verdict::True { witness } => {
                assert_eq!(witness["x"], "2");
                assert!(check_witness(&normalize(&parse(s).unwrap()), &h, &witness).unwrap());
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn exhaustive_negatives() {
        let h = pow2();
        // 2^n + 1 is never divisible by 3 for even n, and 2^n is never 0 mod 3.
        assert!(run("E x in R. D3(x)", &h).is_false());
        assert!(run("A x in R. D2(S(x))", &h).is_true());
        assert!(run("A x in R. D2(x)", &h).is_false());
        // f = S - 2 vanishes everywhere on powers of two.
        assert!(run("A x in R. f[-2, 1](x) = 0", &h).is_true());
        assert!(run("E x in R. f[-1, 1](x) = 1", &h).is_true());
        assert!(run("E x in R. f[-1, 1](x) = 3", &h).is_false());
        assert!(run("E x in R. R(x + 2) & x != 2", &h).is_false());
        assert!(run("E x in R. R(f[0, 0, 1](x) - x) & x = #0", &h).is_false());
    }

    #[test]
    fn bounded_integer_quantifier() {
        let h = pow2();
        match run("E t <= 20. Sigma{D=[(x1+x2)]}(t) & D5(t)", &h) {
            Verdict::True { witness } => {
                let t: i64 = witness["t"].parse().unwrap();
                assert_eq!(t % 5, 0);
            }
            v => panic!("{v:?}"),
        }
        assert!(run("A t <= 3. D2(t) | D2(t + 1)", &h).is_true());
    }

    #[test]
    fn sigma_with_conditions() {
        let h = pow2();
        // 2^a + 2^b = 10 forces {a, b} = {1, 3}; requiring 2^a = 1 mod 7 picks a = 3.
        match run("Sigma{C=[D7(x1 + 6)]; D=[(x1+x2)]}(10)", &h) {
            Verdict::True { witness } => assert_eq!(witness["x1"], "3"),
            v => panic!("{v:?}"),
        }
        assert!(run("Sigma{C=[D7(x1 + 1)]; D=[(x1+x2)]}(10)", &h).is_false());
    }

    #[test]
    fn uncertified_tail_is_unknown() {
        let table = Arc::new(
            SequenceHandle::new(SequenceSpec::Table {
                values: (0..20).map(|i| BigInt::from(i * i + 1)).collect(),
                generator: None,
            })
            .unwrap(),
        );
        match run("E x in R. D7(x)", &table) {
            Verdict::Unknown { .. } => {}
            v => panic!("{v:?}"),
        }
        assert!(run("E x in R. D5(x)", &table).is_true());
    }

    #[test]
    fn free_variables_rejected() {
        let h = pow2();
        assert!(matches!(
            decide_str("D3(f[1](x) + 2)", &h, &DecideBudget::default()),
            Err(Error::OutOfFragment(_))
        ));
    }
}
