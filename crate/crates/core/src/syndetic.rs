//! Gap statistics for sets of naturals, covering checks for progressions
//! and an empirical analogue of Brown's lemma.
//!
//! Everything here is desk-scale evidence on a finite window; nothing is
//! proved about the whole set.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_collect, Exec};
use crate::mann::MannMonoid;
use crate::operator::{apply, Operator};
use crate::sequence::SequenceHandle;

/// Residue condition on one index of an image set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexClass {
    pub modulus: usize,
    pub residue: usize,
}

#[derive(Debug, Clone)]
pub enum EnumerableSet {
    /// `a + d N`.
    Progression { a: u64, d: u64 },
    Explicit(Vec<u64>),
    /// `{z + f_1(n_1) + ... + f_k(n_k)}`; each `f_i` must be nonnegative and
    /// nondecreasing on the indices visited.
    Image {
        handle: Arc<SequenceHandle>,
        ops: Vec<Operator>,
        z: BigInt,
        /// Only tuples with `n_1 <= n_2 <= ... <= n_k`.
        ordered: bool,
        classes: Vec<Option<IndexClass>>,
    },
    Monoid(MannMonoid),
}

impl EnumerableSet {
    /// Sums of `k` elements of the sequence (unordered, repetition allowed).
    pub fn sums_of(handle: Arc<SequenceHandle>, k: usize) -> Self {
        EnumerableSet::Image {
            handle,
            ops: vec![crate::operator::identity(); k],
            z: BigInt::from(0),
            ordered: true,
            classes: vec![None; k],
        }
    }

    /// Sorted, duplicate-free elements in `[0, n]`.
    pub fn elements(&self, n: u64) -> Result<Vec<u64>> {
        Ok(match self {
            EnumerableSet::Progression { a, d } => {
                if *d == 0 {
                    if a <= &n {
                        vec![*a]
                    } else {
                        vec![]
                    }
                } else {
                    (0..).map(|i| a + i * d).take_while(|x| *x <= n).collect()
                }
            }
            EnumerableSet::Explicit(v) => {
                let s: BTreeSet<u64> = v.iter().copied().filter(|x| *x <= n).collect();
                s.into_iter().collect()
            }
            EnumerableSet::Monoid(m) => m
                .enumerate(&BigInt::from(n))
                .into_iter()
                .filter(|x| !x.is_negative())
                .filter_map(|x| x.to_u64())
                .collect(),
            EnumerableSet::Image {
                handle,
                ops,
                z,
                ordered,
                classes,
            } => image_elements(handle, ops, z, *ordered, classes, n)?,
        })
    }
}

/// Best-first enumeration over index tuples by value.
fn image_elements(
    h: &SequenceHandle,
    ops: &[Operator],
    z: &BigInt,
    ordered: bool,
    classes: &[Option<IndexClass>],
    n: u64,
) -> Result<Vec<u64>> {
    let k = ops.len();
    if k == 0 {
        return Ok(z.to_u64().filter(|v| *v <= n).into_iter().collect());
    }
    // Per-coordinate values (position = index) with the residue filter,
    // until the value alone exceeds n.
    let limit = BigInt::from(n) - z;
    let mut cols: Vec<Vec<(BigInt, bool)>> = Vec::with_capacity(k);
    for (i, f) in ops.iter().enumerate() {
        let mut col: Vec<(BigInt, bool)> = Vec::new();
        for idx in 0.. {
            let v = apply(f, h, idx)?;
            let prev = col.last().map(|c| &c.0);
            if v.is_negative() || prev.is_some_and(|p| &v < p) {
                return Err(Error::Invalid(format!(
                    "operator {f} is not nonnegative and nondecreasing at index {idx}"
                )));
            }
            if v > limit {
                break;
            }
            if idx > 4096 && prev == Some(&v) {
                return Err(Error::Invalid(format!("operator {f} is eventually constant")));
            }
            let ok = classes.get(i).copied().flatten().is_none_or(|c| idx % c.modulus == c.residue);
            col.push((v, ok));
        }
        cols.push(col);
    }
    if cols.iter().any(|c| c.is_empty()) {
        return Ok(Vec::new());
    }
    let value = |pos: &[usize]| -> BigInt { z + pos.iter().enumerate().map(|(i, &p)| &cols[i][p].0).sum::<BigInt>() };
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let start = vec![0usize; k];
    heap.push(Reverse((value(&start), start.clone())));
    seen.insert(start);
    let mut out: Vec<u64> = Vec::new();
    let nb = BigInt::from(n);
    while let Some(Reverse((v, pos))) = heap.pop() {
        if v > nb {
            break;
        }
        if pos.iter().enumerate().all(|(i, &p)| cols[i][p].1) && !v.is_negative() {
            let x = v.to_u64().unwrap();
            if out.last() != Some(&x) {
                out.push(x);
            }
        }
        for i in 0..k {
            let mut next = pos.clone();
            next[i] += 1;
            if next[i] >= cols[i].len() {
                continue;
            }
            if ordered && i + 1 < k && next[i] > next[i + 1] {
                continue;
            }
            if seen.insert(next.clone()) {
                heap.push(Reverse((value(&next), next)));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapRunReport {
    pub d: u64,
    pub horizon: u64,
    pub count: usize,
    /// Number of elements in the longest run with consecutive gaps at most `d`.
    pub longest_run: usize,
    /// First and last element of that run.
    pub run_location: Option<(u64, u64)>,
    /// `count / (horizon + 1)`, reduced, as "p/q".
    pub density: String,
    pub note: &'static str,
}

const EMPIRICAL: &str = "empirical: finite window only";

/// Longest run of consecutive elements (in sorted order) with gaps `<= d`.
pub fn gap_runs_of(sorted: &[u64], horizon: u64, d: u64) -> GapRunReport {
    let mut best = (0usize, None);
    let mut start = 0;
    for i in 0..sorted.len() {
        if i > 0 && sorted[i] - sorted[i - 1] > d {
            start = i;
        }
        let len = i - start + 1;
        if len > best.0 {
            best = (len, Some((sorted[start], sorted[i])));
        }
    }
    let count = sorted.len() as u64;
    let g = count.gcd(&(horizon + 1)).max(1);
    GapRunReport {
        d,
        horizon,
        count: sorted.len(),
        longest_run: best.0,
        run_location: best.1,
        density: format!("{}/{}", count / g, (horizon + 1) / g),
        note: EMPIRICAL,
    }
}

pub fn gap_runs(set: &EnumerableSet, n: u64, d: u64) -> Result<GapRunReport> {
    Ok(gap_runs_of(&set.elements(n)?, n, d))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum CoverReport {
    /// Smallest element of `a + dN` in the window missed by every image.
    Witness { witness: u64, horizon: u64 },
    /// The window is covered; this does not contradict non-coverability.
    Covered { horizon: u64, note: &'static str },
}

pub fn cover_check(a: u64, d: u64, images: &[EnumerableSet], n: u64, exec: Exec) -> Result<CoverReport> {
    let sets: Vec<Result<HashSet<u64>>> = map_collect(exec, images.iter().collect(), |s| {
        s.elements(n).map(|v| v.into_iter().collect())
    });
    let sets: Vec<HashSet<u64>> = sets.into_iter().collect::<Result<_>>()?;
    let step = d.max(1);
    let mut x = a;
    while x <= n {
        if !sets.iter().any(|s| s.contains(&x)) {
            return Ok(CoverReport::Witness { witness: x, horizon: n });
        }
        if d == 0 {
            break;
        }
        x += step;
    }
    Ok(CoverReport::Covered {
        horizon: n,
        note: "a covered window says nothing about larger horizons",
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrownReport {
    /// Part with the longest `d`-bounded run (lowest index on ties).
    pub index: usize,
    pub parts: Vec<GapRunReport>,
    pub note: &'static str,
}

pub fn brown_decompose(set: &EnumerableSet, parts: &[EnumerableSet], n: u64, d: u64, exec: Exec) -> Result<BrownReport> {
    if parts.is_empty() {
        return Err(Error::NotAPartition("no parts".into()));
    }
    let whole = set.elements(n)?;
    let elems: Vec<Result<Vec<u64>>> = map_collect(exec, parts.iter().collect(), |p| p.elements(n));
    let elems: Vec<Vec<u64>> = elems.into_iter().collect::<Result<_>>()?;
    let mut union: Vec<u64> = Vec::with_capacity(whole.len());
    for e in &elems {
        union.extend(e);
    }
    union.sort_unstable();
    if let Some(w) = union.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::NotAPartition(format!("{} lies in two parts", w[0])));
    }
    if union != whole {
        let ws: HashSet<u64> = whole.iter().copied().collect();
        let us: HashSet<u64> = union.iter().copied().collect();
        let missing = whole.iter().find(|x| !us.contains(x));
        let extra = union.iter().find(|x| !ws.contains(x));
        return Err(Error::NotAPartition(match (missing, extra) {
            (Some(m), _) => format!("{m} is in the set but in no part"),
            (_, Some(e)) => format!("{e} is in a part but not in the set"),
            _ => "parts differ from the set".into(),
        }));
    }
    let reports: Vec<GapRunReport> = elems.iter().map(|e| gap_runs_of(e, n, d)).collect();
    let mut index = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.longest_run > reports[index].longest_run {
            index = i;
        }
    }
    Ok(BrownReport {
        index,
        parts: reports,
        note: EMPIRICAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceSpec;

    fn pow2() -> Arc<SequenceHandle> {
        Arc::new(SequenceHandle::new(SequenceSpec::power(2)).unwrap())
    }

    /// Naive: all 2^a + 2^b below the horizon.
    fn pair_sums(n: u64) -> Vec<u64> {
        let mut s = BTreeSet::new();
        for a in 0..64 {
            for b in a..64 {
                let v = (1u128 << a) + (1u128 << b);
                if v <= n as u128 {
                    s.insert(v as u64);
                }
            }
        }
        s.into_iter().collect()
    }

    #[test]
    fn progression_is_one_run() {
        let r = gap_runs(&EnumerableSet::Progression { a: 3, d: 5 }, 1000, 5).unwrap();
        assert_eq!(r.longest_run, r.count);
        assert_eq!(r.count, 200);
        assert_eq!(r.run_location, Some((3, 998)));
    }

    #[test]
    fn image_enumeration_matches_naive() {
        let s = EnumerableSet::sums_of(pow2(), 2);
        assert_eq!(s.elements(1 << 12).unwrap(), pair_sums(1 << 12));
        let single = EnumerableSet::sums_of(pow2(), 1);
        assert_eq!(single.elements(100).unwrap(), vec![1, 2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn pair_sums_runs_are_recomputable() {
        let n = 1 << 20;
        let r = gap_runs(&EnumerableSet::sums_of(pow2(), 2), n, 16).unwrap();
        let naive = pair_sums(n);
        assert_eq!(r.count, naive.len());
        let mut best = 1;
        let mut cur = 1;
        for w in naive.windows(2) {
            cur = if w[1] - w[0] <= 16 { cur + 1 } else { 1 };
            best = best.max(cur);
        }
        assert_eq!(r.longest_run, best);
    }

    #[test]
    fn factorial_runs() {
        let fact: Vec<u64> = (1..=10u64).scan(1u64, |acc, i| {
            *acc *= i;
            Some(*acc)
        }).collect();
        let s = EnumerableSet::Explicit(fact.clone());
        let r = gap_runs(&s, 1_000_000, 100).unwrap();
        // 1, 2, 6, 24, 120 then a gap of 600.
        assert_eq!(r.longest_run, 5);
        assert_eq!(r.run_location, Some((1, 120)));
    }

    #[test]
    fn covering() {
        let p2 = EnumerableSet::sums_of(pow2(), 1);
        assert_eq!(
            cover_check(1, 2, std::slice::from_ref(&p2), 1000, Exec::Sequential).unwrap(),
            CoverReport::Witness { witness: 3, horizon: 1000 }
        );
        assert_eq!(
            cover_check(3, 4, &[p2], 1000, Exec::Parallel).unwrap(),
            CoverReport::Witness { witness: 3, horizon: 1000 }
        );
        let three_plus = EnumerableSet::Image {
            handle: pow2(),
            ops: vec![crate::operator::identity()],
            z: BigInt::from(3),
            ordered: false,
            classes: vec![None],
        };
        let r = cover_check(0, 1, &[EnumerableSet::sums_of(pow2(), 2), three_plus], 100, Exec::Parallel).unwrap();
        // 0 and 1 are neither a sum of two powers of two nor 3 + 2^a.
        assert_eq!(r, CoverReport::Witness { witness: 0, horizon: 100 });
        let fives = EnumerableSet::Explicit((0..=200).map(|i| 5 * i).collect());
        assert!(matches!(
            cover_check(0, 5, &[fives], 1000, Exec::Sequential).unwrap(),
            CoverReport::Covered { .. }
        ));
    }

    #[test]
    fn brown() {
        let nat = EnumerableSet::Progression { a: 0, d: 1 };
        let parts = [EnumerableSet::Progression { a: 0, d: 2 }, EnumerableSet::Progression { a: 1, d: 2 }];
        let r = brown_decompose(&nat, &parts, 1000, 2, Exec::Sequential).unwrap();
        assert_eq!(r.index, 0);
        assert_eq!(r.parts[0].longest_run, r.parts[1].longest_run + 1);

        let s = EnumerableSet::Progression { a: 3, d: 5 };
        let parts = [EnumerableSet::Progression { a: 8, d: 10 }, EnumerableSet::Progression { a: 3, d: 10 }];
        let r = brown_decompose(&s, &parts, 10_000, 10, Exec::Parallel).unwrap();
        // Both residues are equally dense: tie broken low.
        assert_eq!(r.index, 0);
        assert_eq!(r.parts[0].longest_run, r.parts[1].longest_run);
        let thin = [EnumerableSet::Progression { a: 3, d: 20 }, EnumerableSet::Progression { a: 8, d: 10 }, EnumerableSet::Progression { a: 13, d: 20 }];
        assert_eq!(brown_decompose(&s, &thin, 10_000, 10, Exec::Parallel).unwrap().index, 1);

        let bad = [EnumerableSet::Progression { a: 0, d: 2 }];
        assert!(matches!(
            brown_decompose(&nat, &bad, 100, 2, Exec::Sequential),
            Err(Error::NotAPartition(_))
        ));
    }

    #[test]
    fn brown_on_pair_sums_by_parity_of_smaller_exponent() {
        let h = pow2();
        let part = |r| EnumerableSet::Image {
            handle: h.clone(),
            ops: vec![crate::operator::identity(); 2],
            z: BigInt::from(0),
            ordered: true,
            classes: vec![Some(IndexClass { modulus: 2, residue: r }), None],
        };
        let set = EnumerableSet::sums_of(h.clone(), 2);
        let r = brown_decompose(&set, &[part(0), part(1)], 1 << 16, 16, Exec::Parallel).unwrap();
        assert!(r.index < 2);
    }

    #[test]
    fn runs_monotone_in_window_and_gap() {
        let s = EnumerableSet::sums_of(pow2(), 2);
        let mut prev = 0;
        for n in [1u64 << 8, 1 << 12, 1 << 16] {
            for d in [2, 8, 32] {
                let r = gap_runs(&s, n, d).unwrap();
                let smaller = gap_runs(&s, n, d / 2).unwrap();
                assert!(r.longest_run >= smaller.longest_run);
                if d == 8 {
                    assert!(r.longest_run >= prev);
                    prev = r.longest_run;
                }
            }
        }
    }
}
