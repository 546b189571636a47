//! Linear equations `f_1(n_1) + ... + f_s(n_s) = z` over a regular sequence.
//!
//! Non-degenerate solutions (distinct indices, no vanishing proper sub-sum)
//! fall into finitely many shift patterns. Completeness is certified by a
//! search over index configurations read from the largest index down: once
//! the gap below a cluster of top indices exceeds a computable bound, the
//! cluster dominates everything beneath it, which confines the remaining
//! solutions to a finite region that is searched exhaustively.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ProofReason};
use crate::error::{Error, Result};
use crate::exec::{map_collect, map_range, Exec};
use crate::numstr;
use crate::operator::{self, apply, apply_range, classify_full, Combined, Operator, OperatorClass};
use crate::sequence::{SequenceHandle, SequenceSpec};

/// Upper bound on the number of partial tuples enumerated by exhaustive
/// searches.
const REGION_CAP: f64 = 3.0e7;

#[derive(Debug, Clone)]
pub struct EquationProblem {
    pub handle: Arc<SequenceHandle>,
    pub operators: Vec<Operator>,
    pub target: BigInt,
}

/// On-disk form of a problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub sequence: SequenceSpec,
    pub operators: Vec<Operator>,
    #[serde(with = "numstr::big")]
    pub target: BigInt,
}

impl EquationProblem {
    pub fn new(handle: Arc<SequenceHandle>, operators: Vec<Operator>, target: BigInt) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Invalid("an equation needs at least one operator".into()));
        }
        Ok(EquationProblem {
            handle,
            operators,
            target,
        })
    }

    pub fn from_file(file: ProblemFile) -> Result<Self> {
        Self::new(Arc::new(SequenceHandle::new(file.sequence)?), file.operators, file.target)
    }

    pub fn arity(&self) -> usize {
        self.operators.len()
    }

    fn combined(&self) -> Vec<Combined> {
        self.operators.iter().cloned().map(Combined::Op).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest index offset within a pattern.
    pub max_offset: usize,
    /// Largest anchor scanned exhaustively (also the bounded window).
    pub max_anchor: usize,
    pub exec: Exec,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_offset: 64,
            max_anchor: 512,
            exec: Exec::default(),
        }
    }
}

/// Why a brute-force solution is or is not non-degenerate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum Tag {
    NonDegenerate,
    /// Two variables share an index (positions, 0-based).
    Collision { first: usize, second: usize },
    /// A proper sub-sum vanishes (positions, 0-based).
    VanishingSubsum { positions: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TaggedTuple {
    pub tuple: Vec<usize>,
    #[serde(flatten)]
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Validity {
    /// Every anchor except the listed ones.
    CofiniteFrom { exceptions: BTreeSet<usize> },
    FiniteBases { anchors: BTreeSet<usize> },
}

/// `n_j = l + offsets[j]` for valid anchors `l`; the anchor is the variable
/// with offset 0 (the smallest index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftPattern {
    pub offsets: Vec<usize>,
    pub validity: Validity,
}

impl ShiftPattern {
    pub fn valid_anchor(&self, l: usize) -> bool {
        match &self.validity {
            Validity::CofiniteFrom { exceptions } => !exceptions.contains(&l),
            Validity::FiniteBases { anchors } => anchors.contains(&l),
        }
    }

    fn tuple(&self, l: usize) -> Vec<usize> {
        self.offsets.iter().map(|m| l + m).collect()
    }

    /// Tuples with every index at most `n`.
    pub fn instantiate(&self, n: usize) -> Vec<Vec<usize>> {
        let top = *self.offsets.iter().max().unwrap();
        if top > n {
            return Vec::new();
        }
        (0..=n - top).filter(|&l| self.valid_anchor(l)).map(|l| self.tuple(l)).collect()
    }

    pub fn matches(&self, t: &[usize]) -> bool {
        let l = *t.iter().min().unwrap();
        t.iter().zip(&self.offsets).all(|(x, m)| *x == l + m) && self.valid_anchor(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NondegenerateSolution {
    pub patterns: Vec<ShiftPattern>,
    pub sporadic: BTreeSet<Vec<usize>>,
    pub certificate: Certificate,
    /// Every solution outside the patterns has all indices below this bound,
    /// and every pattern exception is below it.
    pub anchor_bound: usize,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl NondegenerateSolution {
    fn empty() -> Self {
        NondegenerateSolution {
            patterns: Vec::new(),
            sporadic: BTreeSet::new(),
            certificate: Certificate::proved(ProofReason::ExhaustiveBelowBound),
            anchor_bound: 0,
            note: String::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty() && self.sporadic.is_empty()
    }

    pub fn instantiate(&self, n: usize) -> BTreeSet<Vec<usize>> {
        let mut out: BTreeSet<Vec<usize>> = self
            .sporadic
            .iter()
            .filter(|t| t.iter().all(|&x| x <= n))
            .cloned()
            .collect();
        for p in &self.patterns {
            out.extend(p.instantiate(n));
        }
        out
    }
}

fn eval_comb(c: &Combined, h: &SequenceHandle, n: usize) -> Result<BigInt> {
    match c {
        Combined::Op(o) => apply(o, h, n),
        Combined::Zero => Ok(BigInt::zero()),
    }
}

/// `l -> sum_j c_j(l + m_j)`, skipping zero markers.
pub(crate) fn combine(ops: &[Combined], offsets: &[usize]) -> Result<Combined> {
    let (o, m): (Vec<Operator>, Vec<usize>) = ops
        .iter()
        .zip(offsets)
        .filter_map(|(c, &m)| c.as_op().map(|o| (o.clone(), m)))
        .unzip();
    if o.is_empty() {
        return Ok(Combined::Zero);
    }
    operator::shift_combine(&o, &m)
}

/// Tag for values `v_j = f_j(n_j)` at indices `t`.
fn tag_of(t: &[usize], v: &[BigInt]) -> Tag {
    let s = t.len();
    for i in 0..s {
        for j in i + 1..s {
            if t[i] == t[j] {
                return Tag::Collision { first: i, second: j };
            }
        }
    }
    if let Some(mask) = vanishing_subset(v) {
        return Tag::VanishingSubsum {
            positions: (0..s).filter(|i| mask >> i & 1 == 1).collect(),
        };
    }
    Tag::NonDegenerate
}

/// First proper nonempty subset (as a bit mask) with zero sum.
fn vanishing_subset(v: &[BigInt]) -> Option<u64> {
    let s = v.len();
    let full = (1u64 << s) - 1;
    (1..full).find(|mask| {
        (0..s)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &v[i])
            .sum::<BigInt>()
            .is_zero()
    })
}

fn distinct(t: &[usize]) -> bool {
    let set: BTreeSet<_> = t.iter().collect();
    set.len() == t.len()
}

/// All tuples in `[0, n]^s` solving the equation, tagged.
pub fn brute_force(problem: &EquationProblem, n: usize, exec: Exec) -> Result<Vec<TaggedTuple>> {
    brute_force_ops(&problem.handle, &problem.combined(), &problem.target, n, exec)
}

fn value_table(h: &SequenceHandle, ops: &[Combined], n: usize) -> Result<Vec<Vec<BigInt>>> {
    ops.iter()
        .map(|c| match c {
            Combined::Op(o) => apply_range(o, h, n + 1),
            Combined::Zero => Ok(vec![BigInt::zero(); n + 1]),
        })
        .collect()
}

fn brute_force_ops(h: &SequenceHandle, ops: &[Combined], z: &BigInt, n: usize, exec: Exec) -> Result<Vec<TaggedTuple>> {
    let s = ops.len();
    let vals = value_table(h, ops, n)?;
    let mut last: HashMap<&BigInt, Vec<usize>> = HashMap::new();
    for (i, v) in vals[s - 1].iter().enumerate() {
        last.entry(v).or_default().push(i);
    }
    let emit = |prefix: &[usize], partial: &BigInt, out: &mut Vec<TaggedTuple>| {
        let need = z - partial;
        if let Some(idx) = last.get(&need) {
            for &k in idx {
                let mut t = prefix.to_vec();
                t.push(k);
                let v: Vec<BigInt> = t.iter().enumerate().map(|(j, &x)| vals[j][x].clone()).collect();
                out.push(TaggedTuple {
                    tag: tag_of(&t, &v),
                    tuple: t,
                });
            }
        }
    };
    let mut out: Vec<TaggedTuple> = if s == 1 {
        let mut o = Vec::new();
        emit(&[], &BigInt::zero(), &mut o);
        o
    } else {
        map_range(exec, 0..n + 1, |first| {
            let mut o = Vec::new();
            let mut prefix = vec![first];
            let mut partial = vals[0][first].clone();
            odometer(&vals, 1, s - 1, n, &mut prefix, &mut partial, &mut |p, sum| emit(p, sum, &mut o));
            o
        })
        .into_iter()
        .flatten()
        .collect()
    };
    out.sort();
    Ok(out)
}

/// Enumerates coordinates `depth..stop` over `[0, n]` keeping a running sum.
fn odometer(
    vals: &[Vec<BigInt>],
    depth: usize,
    stop: usize,
    n: usize,
    prefix: &mut Vec<usize>,
    partial: &mut BigInt,
    f: &mut impl FnMut(&[usize], &BigInt),
) {
    if depth == stop {
        f(prefix, partial);
        return;
    }
    for x in 0..=n {
        prefix.push(x);
        *partial += &vals[depth][x];
        odometer(vals, depth + 1, stop, n, prefix, partial, f);
        *partial -= &vals[depth][x];
        prefix.pop();
    }
}

/// Largest window whose exhaustive search stays under the cap.
fn bounded_window(s: usize, h: &SequenceHandle, ops: &[Combined], budget: &Budget) -> usize {
    let mut n = budget.max_anchor;
    if s >= 2 {
        let per = REGION_CAP.powf(1.0 / (s - 1) as f64).floor() as usize;
        n = n.min(per.saturating_sub(1));
    }
    if let Some(len) = h.available() {
        let d = ops
            .iter()
            .filter_map(|c| c.as_op().map(|o| o.degree()))
            .max()
            .unwrap_or(0);
        n = n.min(len.saturating_sub(d + 1));
    }
    n
}

enum Fail {
    Bounded(String),
    Hard(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Hard(e)
    }
}

type Step<T> = std::result::Result<T, Fail>;

struct Search<'a> {
    h: &'a SequenceHandle,
    ops: Vec<Operator>,
    z: &'a BigInt,
    budget: Budget,
    k_r: usize,
    rho_min: BigRational,
}

#[derive(Default)]
struct Explored {
    /// Largest index of a solution not captured by a leaf.
    mmax: Option<usize>,
    leaves: Vec<Vec<usize>>,
}

impl Explored {
    fn bump(&mut self, m: usize) {
        self.mmax = Some(self.mmax.map_or(m, |x| x.max(m)));
    }
}

enum Candidates {
    Cofinite(BTreeSet<usize>),
    Finite(BTreeSet<usize>),
}

#[derive(Default)]
struct LeafOut {
    family: Option<ShiftPattern>,
    finite: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn r(&self, n: usize) -> Result<BigRational> {
        Ok(BigRational::from_integer(self.h.eval(n)?))
    }

    fn proved(&self, op: &Operator) -> Step<operator::Classified> {
        let c = classify_full(op, self.h, self.budget.max_anchor)?;
        if !c.class.certificate().is_proved() {
            return Err(Fail::Bounded(format!("classification of {op} is only bounded")));
        }
        Ok(c)
    }

    /// `order` lists variables by decreasing index, `down[i]` is the distance
    /// of `order[i]` below the top index.
    fn explore(&self, order: &mut Vec<usize>, down: &mut Vec<usize>, out: &mut Explored) -> Step<()> {
        let s = self.ops.len();
        let span = *down.last().unwrap();
        let offsets: Vec<usize> = down.iter().map(|d| span - d).collect();
        if order.len() == s {
            let mut m = vec![0; s];
            for (v, o) in order.iter().zip(&offsets) {
                m[*v] = *o;
            }
            out.leaves.push(m);
            return Ok(());
        }
        let ops_t: Vec<Combined> = order.iter().map(|&v| Combined::Op(self.ops[v].clone())).collect();
        // A proper sub-sum vanishing identically makes every such tuple degenerate.
        let Combined::Op(op) = combine(&ops_t, &offsets)? else {
            return Ok(());
        };
        let c = classify_full(&op, self.h, self.budget.max_anchor)?;
        if let OperatorClass::CofiniteZero {
            exceptions,
            certificate,
        } = &c.class
        {
            if certificate.is_proved() {
                // The cluster sum must be nonzero, so its anchor is an exception.
                if let Some(e) = exceptions.iter().next_back() {
                    out.bump(e + span);
                }
                return Ok(());
            }
        }
        let g = match (&c.growth, c.class.certificate().is_proved()) {
            (Some(g), true) => g.clone(),
            _ => return Err(Fail::Bounded(format!("no proved growth bound for cluster operator {op}"))),
        };
        let rest: Vec<usize> = (0..s).filter(|v| !order.contains(v)).collect();
        let w_r: BigInt = rest.iter().map(|&v| self.ops[v].abs_sum()).sum();
        let d_r = rest.iter().map(|&v| self.ops[v].degree()).max().unwrap();

        // t*: kappa * rho_min^t > 2 W_R.
        let two_w = BigRational::from_integer(BigInt::from(2) * &w_r);
        let mut t = 0usize;
        let mut p = g.factor.clone();
        while p <= two_w {
            p *= &self.rho_min;
            t += 1;
            if t > self.budget.max_offset + d_r + g.shift + 1 {
                return Err(Fail::Bounded(format!("gap bound for {op} exceeds the offset budget")));
            }
        }
        let gap = (t + d_r).saturating_sub(g.shift + 1);

        // Beyond L the cluster outweighs the rest whenever the gap exceeds `gap`.
        let za = BigRational::from_integer(self.z.abs());
        let small_rest = BigRational::from_integer(w_r.clone()) * self.r(self.k_r + d_r)?;
        let mut l = g.from;
        loop {
            let v = &g.factor * self.r(l + g.shift)?;
            if v > &za * BigRational::from_integer(BigInt::from(2)) && v > &za + &small_rest {
                break;
            }
            l += 1;
            if l > self.budget.max_anchor {
                return Err(Fail::Bounded(format!("base bound for {op} exceeds the anchor budget")));
            }
        }
        if l > 0 {
            out.bump(l - 1 + span);
        }
        for gp in 1..=gap {
            if span + gp > self.budget.max_offset {
                return Err(Fail::Bounded("pattern span exceeds the offset budget".into()));
            }
            for &v in &rest {
                order.push(v);
                down.push(span + gp);
                let r = self.explore(order, down, out);
                order.pop();
                down.pop();
                r?;
            }
        }
        Ok(())
    }

    fn values_at(&self, t: &[usize]) -> Result<Vec<BigInt>> {
        t.iter().zip(&self.ops).map(|(&n, o)| apply(o, self.h, n)).collect()
    }

    fn is_solution(&self, t: &[usize]) -> Result<bool> {
        let v = self.values_at(t)?;
        Ok(v.iter().sum::<BigInt>() == *self.z && distinct(t) && vanishing_subset(&v).is_none())
    }

    fn leaf(&self, m: &[usize]) -> Step<LeafOut> {
        let s = m.len();
        let all: Vec<Combined> = self.ops.iter().cloned().map(Combined::Op).collect();
        let cand = match combine(&all, m)? {
            Combined::Zero => {
                if self.z.is_zero() {
                    Candidates::Cofinite(BTreeSet::new())
                } else {
                    Candidates::Finite(BTreeSet::new())
                }
            }
            Combined::Op(op) => {
                let c = self.proved(&op)?;
                match c.class {
                    OperatorClass::CofiniteZero { exceptions, .. } => {
                        if self.z.is_zero() {
                            Candidates::Cofinite(exceptions)
                        } else {
                            let mut hits = BTreeSet::new();
                            for l in exceptions {
                                if apply(&op, self.h, l)? == *self.z {
                                    hits.insert(l);
                                }
                            }
                            Candidates::Finite(hits)
                        }
                    }
                    OperatorClass::FiniteRoots { roots, .. } => {
                        if self.z.is_zero() {
                            Candidates::Finite(roots)
                        } else {
                            match operator::solve_inhomogeneous(&op, self.h, self.z, self.budget.max_anchor) {
                                Ok((hits, cert)) if cert.is_proved() => Candidates::Finite(hits),
                                Ok(_) => return Err(Fail::Bounded(format!("{op} = {} only bounded", self.z))),
                                Err(Error::NotFinitelySolvable { .. }) => {
                                    return Err(Fail::Bounded(format!("{op} = {} on a cofinal window", self.z)))
                                }
                                Err(e) => return Err(e.into()),
                            }
                        }
                    }
                }
            }
        };
        let mut out = LeafOut::default();
        let tuple = |l: usize| -> Vec<usize> { m.iter().map(|x| l + x).collect() };
        match cand {
            Candidates::Finite(anchors) => {
                for l in anchors {
                    let t = tuple(l);
                    if self.is_solution(&t)? {
                        out.finite.push(t);
                    }
                }
            }
            Candidates::Cofinite(mut exceptions) => {
                let full = (1u64 << s) - 1;
                let mut restrict: Option<BTreeSet<usize>> = None;
                for mask in 1..full {
                    let idx: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
                    let mu = idx.iter().map(|&i| m[i]).min().unwrap();
                    let sub_ops: Vec<Combined> = idx.iter().map(|&i| all[i].clone()).collect();
                    let sub_off: Vec<usize> = idx.iter().map(|&i| m[i] - mu).collect();
                    let Combined::Op(fi) = combine(&sub_ops, &sub_off)? else {
                        return Ok(LeafOut::default());
                    };
                    match self.proved(&fi)?.class {
                        OperatorClass::FiniteRoots { roots, .. } => {
                            exceptions.extend(roots.into_iter().filter(|&r| r >= mu).map(|r| r - mu));
                        }
                        OperatorClass::CofiniteZero { exceptions: e, .. } => {
                            let allowed: BTreeSet<usize> = e.into_iter().filter(|&x| x >= mu).map(|x| x - mu).collect();
                            restrict = Some(match restrict {
                                None => allowed,
                                Some(r) => r.intersection(&allowed).copied().collect(),
                            });
                        }
                    }
                }
                match restrict {
                    Some(anchors) => {
                        for l in anchors {
                            let t = tuple(l);
                            if self.is_solution(&t)? {
                                out.finite.push(t);
                            }
                        }
                    }
                    None => {
                        out.family = Some(ShiftPattern {
                            offsets: m.to_vec(),
                            validity: Validity::CofiniteFrom { exceptions },
                        })
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Non-degenerate solutions without the triviality precondition.
pub(crate) fn solve_core(h: &SequenceHandle, ops: &[Combined], z: &BigInt, budget: &Budget) -> Result<NondegenerateSolution> {
    let s = ops.len();
    if ops.iter().any(|c| matches!(c, Combined::Zero)) {
        // A zero operator is its own vanishing sub-sum unless it stands alone.
        if s == 1 && z.is_zero() {
            return Ok(NondegenerateSolution {
                patterns: vec![ShiftPattern {
                    offsets: vec![0],
                    validity: Validity::CofiniteFrom {
                        exceptions: BTreeSet::new(),
                    },
                }],
                ..NondegenerateSolution::empty()
            });
        }
        return Ok(NondegenerateSolution::empty());
    }
    match certified(h, ops, z, budget)? {
        Ok(sol) => Ok(sol),
        Err(reason) => {
            let n = bounded_window(s, h, ops, budget);
            let found = brute_force_ops(h, ops, z, n, budget.exec)?;
            Ok(NondegenerateSolution {
                patterns: Vec::new(),
                sporadic: found
                    .into_iter()
                    .filter(|t| t.tag == Tag::NonDegenerate)
                    .map(|t| t.tuple)
                    .collect(),
                certificate: Certificate::bounded(n),
                anchor_bound: n + 1,
                note: reason,
            })
        }
    }
}

fn certified(
    h: &SequenceHandle,
    ops: &[Combined],
    z: &BigInt,
    budget: &Budget,
) -> Result<std::result::Result<NondegenerateSolution, String>> {
    let s = ops.len();
    if h.is_table() {
        return Ok(Err("table sequences only admit bounded search".into()));
    }
    let Some(window) = h.ratio_window() else {
        return Ok(Err("no ratio window; dominance cannot be certified".into()));
    };
    let Some(rho_min) = h.ratio_floor(window.start) else {
        return Ok(Err("no certified ratio floor".into()));
    };
    let search = Search {
        h,
        ops: ops.iter().map(|c| c.as_op().unwrap().clone()).collect(),
        z,
        budget: *budget,
        k_r: window.start,
        rho_min,
    };
    let roots: Vec<usize> = (0..s).collect();
    let explored: Vec<Step<Explored>> = map_collect(budget.exec, roots, |v| {
        let mut out = Explored::default();
        search.explore(&mut vec![v], &mut vec![0], &mut out)?;
        Ok(out)
    });
    let mut mmax: Option<usize> = None;
    let mut leaves = Vec::new();
    for e in explored {
        match e {
            Ok(ex) => {
                if let Some(m) = ex.mmax {
                    mmax = Some(mmax.map_or(m, |x| x.max(m)));
                }
                leaves.extend(ex.leaves);
            }
            Err(Fail::Bounded(r)) => return Ok(Err(r)),
            Err(Fail::Hard(e)) => return Err(e),
        }
    }
    leaves.sort();
    leaves.dedup();
    let outs: Vec<Step<LeafOut>> = map_collect(budget.exec, leaves, |m| search.leaf(&m));
    let mut patterns = Vec::new();
    let mut sporadic = BTreeSet::new();
    for o in outs {
        match o {
            Ok(lo) => {
                patterns.extend(lo.family);
                sporadic.extend(lo.finite);
            }
            Err(Fail::Bounded(r)) => return Ok(Err(r)),
            Err(Fail::Hard(e)) => return Err(e),
        }
    }
    let mut anchor_bound = 0;
    if let Some(m) = mmax {
        if m > budget.max_anchor {
            return Ok(Err(format!("region bound {m} exceeds the anchor budget")));
        }
        if s >= 2 && ((m + 1) as f64).powi(s as i32 - 1) > REGION_CAP {
            return Ok(Err(format!("region bound {m} too large for exhaustive search")));
        }
        let region = brute_force_ops(h, ops, z, m, budget.exec)?;
        sporadic.extend(region.into_iter().filter(|t| t.tag == Tag::NonDegenerate).map(|t| t.tuple));
        anchor_bound = m + 1;
    }
    sporadic.retain(|t| !patterns.iter().any(|p: &ShiftPattern| p.matches(t)));
    for p in &patterns {
        if let Validity::CofiniteFrom { exceptions } = &p.validity {
            if let Some(e) = exceptions.iter().next_back() {
                anchor_bound = anchor_bound.max(e + 1);
            }
        }
    }
    for t in &sporadic {
        anchor_bound = anchor_bound.max(t.iter().max().unwrap() + 1);
    }
    patterns.sort_by(|a, b| a.offsets.cmp(&b.offsets));
    debug_assert!(z.is_zero() || patterns.is_empty(), "z != 0 admits finitely many solutions");
    Ok(Ok(NondegenerateSolution {
        patterns,
        sporadic,
        certificate: Certificate::proved(ProofReason::ExhaustiveBelowBound),
        anchor_bound,
        note: String::new(),
    }))
}

/// Non-degenerate solutions. Trivial operators must be reduced first.
pub fn solve_nondegenerate(problem: &EquationProblem, budget: &Budget) -> Result<NondegenerateSolution> {
    for (i, op) in problem.operators.iter().enumerate() {
        if operator::is_trivial(op, &problem.handle, budget.max_anchor)?.trivial {
            return Err(Error::TrivialOperatorPresent { position: i });
        }
    }
    solve_core(&problem.handle, &problem.combined(), &problem.target, budget)
}

/// One group of collapsed variables forming a non-degenerate solution of
/// its own sub-equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Indices into the case's partition blocks.
    pub blocks: Vec<usize>,
    #[serde(with = "numstr::big")]
    pub target: BigInt,
    pub solution: NondegenerateSolution,
}

/// Solutions whose equal variables are exactly the partition blocks and
/// whose canonical decomposition into non-degenerate pieces is `components`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Case {
    pub partition: Vec<Vec<usize>>,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionDescription {
    pub arity: usize,
    pub operators: Vec<Operator>,
    #[serde(with = "numstr::big")]
    pub target: BigInt,
    pub cases: Vec<Case>,
    pub certificate: Certificate,
}

/// Set partitions of `0..n` as restricted growth strings, in lexicographic order.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    fn rec(i: usize, max: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for v in 0..=max + 1 {
            a[i] = v;
            rec(i + 1, max.max(v), a, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    rec(1, 0, &mut a, &mut out);
    out
}

pub(crate) fn blocks_of(rgs: &[usize]) -> Vec<Vec<usize>> {
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut b = vec![Vec::new(); k];
    for (i, &g) in rgs.iter().enumerate() {
        b[g].push(i);
    }
    b
}

/// First grouping (in restricted-growth order) of the block values into
/// non-degenerate pieces summing to 0, with one piece summing to `z` when
/// `z != 0`.
fn canonical_grouping(v: &[BigInt], z: &BigInt, groupings: &[Vec<usize>]) -> Option<usize> {
    groupings.iter().position(|rgs| {
        blocks_of(rgs).iter().all(|comp| {
            let vals: Vec<BigInt> = comp.iter().map(|&b| v[b].clone()).collect();
            let sum: BigInt = vals.iter().sum();
            (sum.is_zero() || sum == *z) && vanishing_subset(&vals).is_none()
        })
    })
}

type Memo = Mutex<HashMap<(Vec<Combined>, BigInt), NondegenerateSolution>>;

/// All solutions, organized by which variables coincide.
pub fn solve_full(problem: &EquationProblem, budget: &Budget) -> Result<SolutionDescription> {
    let h = &problem.handle;
    let s = problem.arity();
    let z = &problem.target;
    let ops = problem.combined();
    let memo: Memo = Mutex::new(HashMap::new());
    let solve = |c: Vec<Combined>, t: BigInt| -> Result<NondegenerateSolution> {
        let key = (c, t);
        if let Some(s) = memo.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let sol = solve_core(h, &key.0, &key.1, budget)?;
        memo.lock().unwrap().insert(key, sol.clone());
        Ok(sol)
    };
    let partitions = set_partitions(s);
    let per_partition: Vec<Result<Vec<Case>>> = map_collect(budget.exec, partitions, |rgs| {
        let blocks = blocks_of(&rgs);
        let collapsed: Vec<Combined> = blocks
            .iter()
            .map(|b| {
                let bo: Vec<Combined> = b.iter().map(|&i| ops[i].clone()).collect();
                combine(&bo, &vec![0; b.len()])
            })
            .collect::<Result<_>>()?;
        let mut cases = Vec::new();
        for grouping in set_partitions(blocks.len()) {
            let comps = blocks_of(&grouping);
            let carriers: Vec<Option<usize>> = if z.is_zero() {
                vec![None]
            } else {
                (0..comps.len()).map(Some).collect()
            };
            'carrier: for carrier in carriers {
                let mut components = Vec::new();
                for (ci, comp) in comps.iter().enumerate() {
                    let target = if carrier == Some(ci) { z.clone() } else { BigInt::zero() };
                    let c: Vec<Combined> = comp.iter().map(|&b| collapsed[b].clone()).collect();
                    let sol = solve(c, target.clone())?;
                    if sol.is_empty() {
                        continue 'carrier;
                    }
                    components.push(Component {
                        blocks: comp.clone(),
                        target,
                        solution: sol,
                    });
                }
                cases.push(Case {
                    partition: blocks.clone(),
                    components,
                });
            }
        }
        Ok(cases)
    });
    let mut cases = Vec::new();
    for p in per_partition {
        cases.extend(p?);
    }
    let certificate = cases
        .iter()
        .flat_map(|c| c.components.iter().map(|k| k.solution.certificate))
        .fold(Certificate::proved(ProofReason::ExhaustiveBelowBound), Certificate::weakest);
    Ok(SolutionDescription {
        arity: s,
        operators: problem.operators.clone(),
        target: z.clone(),
        cases,
        certificate,
    })
}

impl SolutionDescription {
    /// Every described tuple with all indices at most `n`.
    pub fn instantiate(&self, h: &SequenceHandle, n: usize) -> Result<BTreeSet<Vec<usize>>> {
        let mut all = BTreeSet::new();
        for case in &self.cases {
            all.extend(self.instantiate_case(case, h, n)?);
        }
        Ok(all)
    }

    /// Tuples of one case, keeping only those whose canonical decomposition
    /// is this case's, so distinct cases never share a tuple.
    pub fn instantiate_case(&self, case: &Case, h: &SequenceHandle, n: usize) -> Result<BTreeSet<Vec<usize>>> {
        let nb = case.partition.len();
        let collapsed: Vec<Combined> = case
            .partition
            .iter()
            .map(|b| {
                let bo: Vec<Combined> = b.iter().map(|&i| Combined::Op(self.operators[i].clone())).collect();
                combine(&bo, &vec![0; b.len()])
            })
            .collect::<Result<_>>()?;
        let groupings = set_partitions(nb);
        let mut my_rgs = vec![0; nb];
        for (ci, c) in case.components.iter().enumerate() {
            for &b in &c.blocks {
                my_rgs[b] = ci;
            }
        }
        let mine = groupings.iter().position(|g| *g == my_rgs);
        let per_comp: Vec<Vec<Vec<usize>>> = case
            .components
            .iter()
            .map(|c| c.solution.instantiate(n).into_iter().collect())
            .collect();
        let mut out = BTreeSet::new();
        let mut y = vec![0usize; nb];
        let mut stack = vec![0usize; per_comp.len()];
        // Cartesian product over components.
        fn product(
            k: usize,
            case: &Case,
            per: &[Vec<Vec<usize>>],
            y: &mut Vec<usize>,
            stack: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]) -> Result<()>,
        ) -> Result<()> {
            if k == per.len() {
                return f(y);
            }
            for (i, t) in per[k].iter().enumerate() {
                stack[k] = i;
                for (b, v) in case.components[k].blocks.iter().zip(t) {
                    y[*b] = *v;
                }
                product(k + 1, case, per, y, stack, f)?;
            }
            Ok(())
        }
        product(0, case, &per_comp, &mut y, &mut stack, &mut |y| {
            if !distinct(y) {
                return Ok(());
            }
            let v: Vec<BigInt> = y
                .iter()
                .zip(&collapsed)
                .map(|(&x, c)| eval_comb(c, h, x))
                .collect::<Result<_>>()?;
            if canonical_grouping(&v, &self.target, &groupings) != mine {
                return Ok(());
            }
            let mut t = vec![0; self.arity];
            for (b, block) in case.partition.iter().enumerate() {
                for &i in block {
                    t[i] = y[b];
                }
            }
            out.insert(t);
            Ok(())
        })?;
        Ok(out)
    }
}

/// Term of the successor structure: `S^k(x_v)` or the numeral `S^c(0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuccTerm {
    Iter { var: usize, k: usize },
    Numeral(usize),
}

impl SuccTerm {
    fn value(&self, a: &[usize]) -> usize {
        match self {
            SuccTerm::Iter { var, k } => a[*var] + k,
            SuccTerm::Numeral(c) => *c,
        }
    }
}

impl fmt::Display for SuccTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuccTerm::Iter { var, k } => {
                for _ in 0..*k {
                    write!(f, "S(")?;
                }
                write!(f, "x{}", var + 1)?;
                for _ in 0..*k {
                    write!(f, ")")?;
                }
                Ok(())
            }
            SuccTerm::Numeral(c) => write!(f, "{c}"),
        }
    }
}

/// Quantifier-free formula over `(N, S, =)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuccFormula {
    True,
    False,
    Eq(SuccTerm, SuccTerm),
    Neq(SuccTerm, SuccTerm),
    And(Vec<SuccFormula>),
    Or(Vec<SuccFormula>),
}

impl SuccFormula {
    pub fn eval(&self, a: &[usize]) -> bool {
        match self {
            SuccFormula::True => true,
            SuccFormula::False => false,
            SuccFormula::Eq(x, y) => x.value(a) == y.value(a),
            SuccFormula::Neq(x, y) => x.value(a) != y.value(a),
            SuccFormula::And(v) => v.iter().all(|f| f.eval(a)),
            SuccFormula::Or(v) => v.iter().any(|f| f.eval(a)),
        }
    }

    fn and(mut v: Vec<SuccFormula>) -> SuccFormula {
        v.retain(|f| *f != SuccFormula::True);
        if v.contains(&SuccFormula::False) {
            return SuccFormula::False;
        }
        match v.len() {
            0 => SuccFormula::True,
            1 => v.pop().unwrap(),
            _ => SuccFormula::And(v),
        }
    }

    fn or(mut v: Vec<SuccFormula>) -> SuccFormula {
        v.retain(|f| *f != SuccFormula::False);
        if v.contains(&SuccFormula::True) {
            return SuccFormula::True;
        }
        match v.len() {
            0 => SuccFormula::False,
            1 => v.pop().unwrap(),
            _ => SuccFormula::Or(v),
        }
    }
}

impl fmt::Display for SuccFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[SuccFormula], sep: &str| -> fmt::Result {
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                match x {
                    SuccFormula::And(_) | SuccFormula::Or(_) => write!(f, "({x})")?,
                    _ => write!(f, "{x}")?,
                }
            }
            Ok(())
        };
        match self {
            SuccFormula::True => write!(f, "⊤"),
            SuccFormula::False => write!(f, "⊥"),
            SuccFormula::Eq(a, b) => write!(f, "{a} = {b}"),
            SuccFormula::Neq(a, b) => write!(f, "{a} ≠ {b}"),
            SuccFormula::And(v) => join(f, v, "∧"),
            SuccFormula::Or(v) => join(f, v, "∨"),
        }
    }
}

/// Definition of the solution set in the successor structure: one disjunct
/// per case, patterns as successor iterates of the anchor, finite sets as
/// numeral equalities and inequations.
pub fn interpret_in_successor(desc: &SolutionDescription) -> SuccFormula {
    let mut cases = Vec::new();
    for case in &desc.cases {
        let reps: Vec<usize> = case.partition.iter().map(|b| b[0]).collect();
        let mut conj = Vec::new();
        for b in &case.partition {
            for &i in &b[1..] {
                conj.push(SuccFormula::Eq(
                    SuccTerm::Iter { var: i, k: 0 },
                    SuccTerm::Iter { var: b[0], k: 0 },
                ));
            }
        }
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                conj.push(SuccFormula::Neq(
                    SuccTerm::Iter { var: reps[i], k: 0 },
                    SuccTerm::Iter { var: reps[j], k: 0 },
                ));
            }
        }
        for comp in &case.components {
            let vars: Vec<usize> = comp.blocks.iter().map(|&b| reps[b]).collect();
            let mut alts = Vec::new();
            for p in &comp.solution.patterns {
                let a = p.offsets.iter().position(|&m| m == 0).unwrap();
                let mut c = Vec::new();
                for (v, &m) in vars.iter().zip(&p.offsets) {
                    if *v != vars[a] {
                        c.push(SuccFormula::Eq(
                            SuccTerm::Iter { var: *v, k: 0 },
                            SuccTerm::Iter { var: vars[a], k: m },
                        ));
                    }
                }
                match &p.validity {
                    Validity::CofiniteFrom { exceptions } => {
                        for &e in exceptions {
                            c.push(SuccFormula::Neq(SuccTerm::Iter { var: vars[a], k: 0 }, SuccTerm::Numeral(e)));
                        }
                    }
                    Validity::FiniteBases { anchors } => {
                        c.push(SuccFormula::or(
                            anchors
                                .iter()
                                .map(|&e| SuccFormula::Eq(SuccTerm::Iter { var: vars[a], k: 0 }, SuccTerm::Numeral(e)))
                                .collect(),
                        ));
                    }
                }
                alts.push(SuccFormula::and(c));
            }
            for t in &comp.solution.sporadic {
                alts.push(SuccFormula::and(
                    vars.iter()
                        .zip(t)
                        .map(|(v, &c)| SuccFormula::Eq(SuccTerm::Iter { var: *v, k: 0 }, SuccTerm::Numeral(c)))
                        .collect(),
                ));
            }
            conj.push(SuccFormula::or(alts));
        }
        cases.push(SuccFormula::and(conj));
    }
    SuccFormula::or(cases)
}
