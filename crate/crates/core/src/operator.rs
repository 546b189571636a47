//! Operators `f(n) = a_0 r_n + ... + a_d r_{n+d}` and the finite/cofinite
//! root dichotomy.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ProofReason};
use crate::error::{Error, Result};
use crate::numstr;
use crate::poly::{self, IntPoly};
use crate::sequence::{char_poly, CutoffMode, SequenceHandle, SequenceSpec, Theta};

/// Integer operator with nonzero trailing coefficient. Leading zeros are
/// allowed, so `(0, 1)` is the shift `n -> r_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct Operator {
    coeffs: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct OperatorRepr(#[serde(with = "numstr::big_vec")] Vec<BigInt>);

impl TryFrom<OperatorRepr> for Operator {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        Operator::new(r.0)
    }
}

impl From<Operator> for OperatorRepr {
    fn from(op: Operator) -> Self {
        OperatorRepr(op.coeffs)
    }
}

impl Operator {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::InvalidOperator("empty operator".into())),
            Some(c) if c.is_zero() => Err(Error::InvalidOperator(
                "trailing coefficient must be nonzero".into(),
            )),
            Some(_) => Ok(Operator { coeffs }),
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_0 + a_1 X + ... + a_d X^d`.
    pub fn poly(&self) -> IntPoly {
        IntPoly::new(self.coeffs.clone())
    }

    pub fn abs_sum(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn neg(&self) -> Operator {
        Operator {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Coefficient shifted right by `m`: `g(n) = f(n + m)`.
    pub fn shifted(&self, m: usize) -> Operator {
        let mut c = vec![BigInt::zero(); m];
        c.extend(self.coeffs.iter().cloned());
        Operator { coeffs: c }
    }

    /// Index of the first nonzero coefficient.
    pub fn low_index(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap()
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Result of [`shift_combine`]: either an operator or the distinguished
/// zero marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Combined {
    Op(Operator),
    Zero,
}

impl Combined {
    pub fn as_op(&self) -> Option<&Operator> {
        match self {
            Combined::Op(o) => Some(o),
            Combined::Zero => None,
        }
    }
}

/// `l -> sum_j f_j(l + m_j)` as a single operator.
pub fn shift_combine(ops: &[Operator], offsets: &[usize]) -> Result<Combined> {
    if ops.len() != offsets.len() || ops.is_empty() {
        return Err(Error::InvalidOperator(
            "shift_combine needs one offset per operator".into(),
        ));
    }
    let len = ops
        .iter()
        .zip(offsets)
        .map(|(o, m)| m + o.coeffs.len())
        .max()
        .unwrap();
    let mut c = vec![BigInt::zero(); len];
    for (o, &m) in ops.iter().zip(offsets) {
        for (i, a) in o.coeffs.iter().enumerate() {
            c[m + i] += a;
        }
    }
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    Ok(if c.is_empty() {
        Combined::Zero
    } else {
        Combined::Op(Operator { coeffs: c })
    })
}

/// Exact `sum a_i r_{n+i}`.
pub fn apply(op: &Operator, h: &SequenceHandle, n: usize) -> Result<BigInt> {
    let mut s = BigInt::zero();
    for (i, a) in op.coeffs.iter().enumerate() {
        if !a.is_zero() {
            s += a * h.eval(n + i)?;
        }
    }
    Ok(s)
}

/// `f(0), ..., f(n - 1)` from one prefix evaluation.
pub fn apply_range(op: &Operator, h: &SequenceHandle, n: usize) -> Result<Vec<BigInt>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let r = h.prefix(n - 1 + op.degree())?;
    Ok((0..n)
        .map(|l| {
            op.coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(i, a)| a * &r[l + i])
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum OperatorClass {
    FiniteRoots {
        roots: BTreeSet<usize>,
        cutoff: usize,
        certificate: Certificate,
    },
    CofiniteZero {
        exceptions: BTreeSet<usize>,
        certificate: Certificate,
    },
}

impl OperatorClass {
    pub fn certificate(&self) -> Certificate {
        match self {
            OperatorClass::FiniteRoots { certificate, .. } | OperatorClass::CofiniteZero { certificate, .. } => {
                *certificate
            }
        }
    }

    pub fn is_cofinite_zero(&self) -> bool {
        matches!(self, OperatorClass::CofiniteZero { .. })
    }
}

/// `|f(n)| >= factor * r_{n + shift}` for every `n >= from`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthBound {
    pub from: usize,
    pub factor: BigRational,
    pub shift: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Classified {
    pub class: OperatorClass,
    /// Present only for proved finite-root verdicts relative to the handle's
    /// own sequence.
    pub growth: Option<GrowthBound>,
    /// For sums: indices of parts on which the operator vanishes identically.
    /// When nonempty, the verdict was computed on the sum of the other parts.
    pub vanishing_parts: Vec<usize>,
}

pub fn classify(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<OperatorClass> {
    Ok(classify_full(op, h, budget)?.class)
}

pub(crate) fn classify_full(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<Classified> {
    let key = (op.coeffs.clone(), budget);
    if let Some(c) = h.classified.lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let c = classify_uncached(op, h, budget)?;
    h.classified.lock().unwrap().insert(key, c.clone());
    Ok(c)
}

fn roots_below(op: &Operator, h: &SequenceHandle, n: usize) -> Result<BTreeSet<usize>> {
    Ok(apply_range(op, h, n)?
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_zero())
        .map(|(i, _)| i)
        .collect())
}

fn finite(op: &Operator, h: &SequenceHandle, growth: GrowthBound, reason: ProofReason) -> Result<Classified> {
    let roots = roots_below(op, h, growth.from)?;
    Ok(Classified {
        class: OperatorClass::FiniteRoots {
            roots,
            cutoff: growth.from,
            certificate: Certificate::proved(reason),
        },
        growth: Some(growth),
        vanishing_parts: Vec::new(),
    })
}

fn classify_uncached(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<Classified> {
    let d = op.degree();
    let nonzero: Vec<usize> = (0..=d).filter(|&i| !op.coeffs[i].is_zero()).collect();

    // A single term a_j r_{n+j} never vanishes on a positive sequence.
    if nonzero.len() == 1 {
        return finite(
            op,
            h,
            GrowthBound {
                from: 0,
                factor: BigRational::from_integer(op.coeffs[d].abs()),
                shift: d,
            },
            ProofReason::NonvanishingAtTheta,
        );
    }

    if h.is_table() {
        return bounded(op, h, budget);
    }

    // (iii) The characteristic polynomial divides the operator polynomial:
    // f vanishes identically since the recurrence holds from n = 0.
    let a = op.poly();
    if let Some(cp) = char_poly(h.spec()) {
        if a.divisible_by_monic(cp.poly()) {
            return Ok(Classified {
                class: OperatorClass::CofiniteZero {
                    exceptions: BTreeSet::new(),
                    certificate: Certificate::proved(ProofReason::MinpolyDivides),
                },
                growth: None,
                vanishing_parts: Vec::new(),
            });
        }
    }

    // Sums: drop the parts killed by the operator and classify on the rest.
    if let SequenceSpec::SumOf { parts } = h.spec() {
        let vanishing: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| char_poly(p).is_some_and(|cp| a.divisible_by_monic(cp.poly())))
            .map(|(i, _)| i)
            .collect();
        if !vanishing.is_empty() {
            let rest: Vec<SequenceSpec> = parts
                .iter()
                .enumerate()
                .filter(|(i, _)| !vanishing.contains(i))
                .map(|(_, p)| p.clone())
                .collect();
            let sub = reduced_handle(rest, h.scan_budget())?;
            let mut c = classify_full(op, &sub, budget)?;
            c.growth = None;
            c.vanishing_parts = vanishing;
            return Ok(c);
        }
    }

    let an = h.analysis();
    if an.certified && an.window.is_some() {
        match &an.theta {
            // (i) r_{n+1}/r_n -> infinity: the top term dominates once
            // r_{n+d}/r_{n+d-1} > 2S/|a_d|, giving |f(n)| > |a_d|/2 r_{n+d}.
            Theta::Infinite => {
                let ad = op.coeffs[d].abs();
                let s: BigInt = op.coeffs[..d].iter().map(|c| c.abs()).sum();
                let eps = BigRational::new(ad.clone(), BigInt::from(2) * &s);
                if let Ok(cut) = h.dominance_cutoff(&eps, 1, CutoffMode::Certified) {
                    let from = cut.k.saturating_sub(d - 1);
                    return finite(
                        op,
                        h,
                        GrowthBound {
                            from,
                            factor: BigRational::new(ad, BigInt::from(2)),
                            shift: d,
                        },
                        ProofReason::ThetaInfiniteDominance,
                    );
                }
            }
            // (ii) A(theta) != 0: with eps = u / (2 sum |a_i|) and
            // |r_{n+i} - theta^i r_n| < eps r_n we get |f(n)| > u/2 r_n.
            Theta::Algebraic { minpoly, interval } => {
                if let Some((_, u, _)) = poly::sign_at_root(minpoly, &a, interval, 512) {
                    let eps = &u / BigRational::from_integer(BigInt::from(2) * op.abs_sum());
                    if let Ok(cut) = h.dominance_cutoff(&eps, d, CutoffMode::Certified) {
                        return finite(
                            op,
                            h,
                            GrowthBound {
                                from: cut.k,
                                factor: u / BigRational::from_integer(BigInt::from(2)),
                                shift: 0,
                            },
                            ProofReason::NonvanishingAtTheta,
                        );
                    }
                }
            }
            Theta::Empirical { .. } => {}
        }
    }
    bounded(op, h, budget)
}

pub(crate) fn reduced_handle(mut parts: Vec<SequenceSpec>, scan_budget: usize) -> Result<SequenceHandle> {
    let spec = if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        SequenceSpec::SumOf { parts }
    };
    SequenceHandle::with_scan_budget(spec, scan_budget)
}

/// (iv) Scan `f` on `[0, budget)`. A zero run covering the last quarter is
/// read as cofinite vanishing; both verdicts carry a bounded certificate.
fn bounded(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<Classified> {
    let n = scan_len(op, h, budget)?;
    let vals = apply_range(op, h, n)?;
    let zeros: BTreeSet<usize> = (0..n).filter(|&i| vals[i].is_zero()).collect();
    let tail = (n / 4).max(1);
    let class = if n > 0 && (n - tail..n).all(|i| vals[i].is_zero()) {
        OperatorClass::CofiniteZero {
            exceptions: (0..n).filter(|i| !zeros.contains(i)).collect(),
            certificate: Certificate::bounded(n.saturating_sub(1)),
        }
    } else {
        OperatorClass::FiniteRoots {
            cutoff: zeros.iter().next_back().map_or(0, |r| r + 1),
            roots: zeros,
            certificate: Certificate::bounded(n.saturating_sub(1)),
        }
    };
    Ok(Classified {
        class,
        growth: None,
        vanishing_parts: Vec::new(),
    })
}

/// Number of indices `n` with `f(n)` computable, capped at `budget`.
fn scan_len(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<usize> {
    Ok(match h.available() {
        Some(len) => budget.min((len + 1).saturating_sub(op.coeffs.len())),
        None => budget,
    })
}

/// All `n` with `f(n) = z`, for `z != 0`.
pub fn solve_inhomogeneous(
    op: &Operator,
    h: &SequenceHandle,
    z: &BigInt,
    budget: usize,
) -> Result<(BTreeSet<usize>, Certificate)> {
    if z.is_zero() {
        return Err(Error::Invalid("target must be nonzero; use classify for f(n) = 0".into()));
    }
    let c = classify_full(op, h, budget)?;
    match &c.class {
        OperatorClass::CofiniteZero {
            exceptions,
            certificate,
        } if certificate.is_proved() => {
            let top = exceptions.iter().next_back().map_or(0, |e| e + 1);
            let hits = hits_below(op, h, z, top)?;
            return Ok((hits, *certificate));
        }
        _ => {}
    }
    if let Some(limit) = inhomogeneous_limit(op, h, z, &c)? {
        return Ok((hits_below(op, h, z, limit)?, c.class.certificate()));
    }
    // Bounded: scan and refuse if f(n) = z holds throughout the tail.
    let n = scan_len(op, h, budget)?;
    let vals = apply_range(op, h, n)?;
    let tail = (n / 4).max(1);
    if n > 0 && (n - tail..n).all(|i| vals[i] == *z) {
        return Err(Error::NotFinitelySolvable { target: z.to_string() });
    }
    let hits = (0..n).filter(|&i| vals[i] == *z).collect();
    Ok((hits, Certificate::bounded(n.saturating_sub(1))))
}

fn hits_below(op: &Operator, h: &SequenceHandle, z: &BigInt, n: usize) -> Result<BTreeSet<usize>> {
    Ok(apply_range(op, h, n)?
        .iter()
        .enumerate()
        .filter(|(_, v)| *v == z)
        .map(|(i, _)| i)
        .collect())
}

/// Index beyond which `|f(n)| > |z|`, from a proved growth bound (possibly
/// on the reduced sum when some parts vanish).
fn inhomogeneous_limit(op: &Operator, h: &SequenceHandle, z: &BigInt, c: &Classified) -> Result<Option<usize>> {
    if !c.class.certificate().is_proved() {
        return Ok(None);
    }
    if !c.vanishing_parts.is_empty() {
        let SequenceSpec::SumOf { parts } = h.spec() else {
            return Ok(None);
        };
        let rest: Vec<SequenceSpec> = parts
            .iter()
            .enumerate()
            .filter(|(i, _)| !c.vanishing_parts.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        let sub = reduced_handle(rest, h.scan_budget())?;
        let sc = classify_full(op, &sub, h.scan_budget())?;
        return inhomogeneous_limit(op, &sub, z, &sc);
    }
    let Some(g) = &c.growth else {
        return Ok(None);
    };
    let za = BigRational::from_integer(z.abs());
    let mut l = g.from;
    loop {
        let r = BigRational::from_integer(h.eval(l + g.shift)?);
        if &g.factor * r > za {
            return Ok(Some(l.max(g.from)));
        }
        l += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Triviality {
    pub trivial: bool,
    /// `f(n) = 0` for every `n > cutoff` (trivial operators only).
    pub cutoff: Option<usize>,
    pub certificate: Certificate,
}

/// Whether `f` vanishes beyond some constant.
pub fn is_trivial(op: &Operator, h: &SequenceHandle, budget: usize) -> Result<Triviality> {
    Ok(match classify(op, h, budget)? {
        OperatorClass::CofiniteZero {
            exceptions,
            certificate,
        } => Triviality {
            trivial: true,
            cutoff: Some(exceptions.iter().next_back().copied().unwrap_or(0)),
            certificate,
        },
        OperatorClass::FiniteRoots { certificate, .. } => Triviality {
            trivial: false,
            cutoff: None,
            certificate,
        },
    })
}

/// `1` as an operator (`f(n) = r_n`).
pub fn identity() -> Operator {
    Operator {
        coeffs: vec![BigInt::one()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(c: &[i64]) -> Operator {
        Operator::from_i64(c).unwrap()
    }

    fn h(spec: SequenceSpec) -> SequenceHandle {
        SequenceHandle::new(spec).unwrap()
    }

    fn two_three() -> SequenceHandle {
        h(SequenceSpec::sum(vec![SequenceSpec::power(2), SequenceSpec::power(3)]))
    }

    fn pow2_plus_n() -> SequenceHandle {
        h(SequenceSpec::generated("2^n + n".parse().unwrap()))
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply(&op(&[-2, 1]), &h(SequenceSpec::power(2)), 5).unwrap(), BigInt::zero());
        assert_eq!(apply(&op(&[-1, 1]), &h(SequenceSpec::Factorial), 0).unwrap(), BigInt::from(4));
        assert_eq!(apply(&op(&[2, -3, 1]), &pow2_plus_n(), 0).unwrap(), BigInt::from(-1));
    }

    #[test]
    fn operator_validation() {
        assert!(Operator::from_i64(&[]).is_err());
        assert!(Operator::from_i64(&[1, 0]).is_err());
        assert!(Operator::from_i64(&[0, 1]).is_ok());
    }

    #[test]
    fn classify_examples() {
        let fib = h(SequenceSpec::fibonacci());
        assert_eq!(
            classify(&op(&[-1, -1, 1]), &fib, 64).unwrap(),
            OperatorClass::CofiniteZero {
                exceptions: BTreeSet::new(),
                certificate: Certificate::proved(ProofReason::MinpolyDivides)
            }
        );
        match classify(&op(&[-1, 1]), &h(SequenceSpec::Factorial), 64).unwrap() {
            OperatorClass::FiniteRoots { roots, certificate, .. } => {
                assert!(roots.is_empty());
                assert_eq!(certificate, Certificate::proved(ProofReason::ThetaInfiniteDominance));
            }
            other => panic!("{other:?}"),
        }
        assert!(classify(&op(&[6, -5, 1]), &two_three(), 64).unwrap().is_cofinite_zero());
        match classify(&op(&[-3, 1]), &two_three(), 64).unwrap() {
            OperatorClass::FiniteRoots { roots, certificate, .. } => {
                assert!(roots.is_empty());
                assert!(certificate.is_proved());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonvanishing_case_on_fibonacci() {
        // r_{n+1} - r_n = r_{n-1} > 0; A(phi) = phi - 1 != 0.
        let fib = h(SequenceSpec::fibonacci());
        match classify(&op(&[-1, 1]), &fib, 64).unwrap() {
            OperatorClass::FiniteRoots { roots, certificate, .. } => {
                assert!(roots.is_empty());
                assert_eq!(certificate, Certificate::proved(ProofReason::NonvanishingAtTheta));
            }
            other => panic!("{other:?}"),
        }
        // r_{n+1} - 2 r_n = r_{n-1} - r_n... vanishes at n = 0: 2 - 2*1 = 0.
        match classify(&op(&[-2, 1]), &fib, 64).unwrap() {
            OperatorClass::FiniteRoots { roots, .. } => assert_eq!(roots, BTreeSet::from([0])),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inhomogeneous_examples() {
        let p2 = h(SequenceSpec::power(2));
        let (s, c) = solve_inhomogeneous(&op(&[-1, 1]), &p2, &BigInt::from(1), 64).unwrap();
        assert_eq!(s, BTreeSet::from([0]));
        assert!(c.is_proved());
        let (s, _) = solve_inhomogeneous(&op(&[1]), &p2, &BigInt::from(8), 64).unwrap();
        assert_eq!(s, BTreeSet::from([3]));
        assert_eq!(
            solve_inhomogeneous(&op(&[2, -3, 1]), &pow2_plus_n(), &BigInt::from(-1), 64),
            Err(Error::NotFinitelySolvable { target: "-1".into() })
        );
        // Reduced sum: f = -2^n on 2^n + 3^n, so f(n) = -4 only at n = 2.
        let (s, c) = solve_inhomogeneous(&op(&[-3, 1]), &two_three(), &BigInt::from(-4), 64).unwrap();
        assert_eq!(s, BTreeSet::from([2]));
        assert!(c.is_proved());
        assert!(solve_inhomogeneous(&op(&[1]), &p2, &BigInt::zero(), 64).is_err());
    }

    #[test]
    fn triviality() {
        let t = is_trivial(&op(&[6, -5, 1]), &two_three(), 64).unwrap();
        assert!(t.trivial);
        assert_eq!(t.cutoff, Some(0));
        assert!(!is_trivial(&op(&[-3, 1]), &two_three(), 64).unwrap().trivial);
    }

    #[test]
    fn shift_combine_examples() {
        let ops = [op(&[1]), op(&[1]), op(&[-1])];
        assert_eq!(shift_combine(&ops, &[0, 0, 1]).unwrap(), Combined::Op(op(&[2, -1])));
        assert_eq!(shift_combine(&ops, &[0, 1, 2]).unwrap(), Combined::Op(op(&[1, 1, -1])));
        assert_eq!(
            shift_combine(&[op(&[-1, 1]), op(&[1, -1])], &[0, 0]).unwrap(),
            Combined::Zero
        );
    }

    #[test]
    fn json_shape() {
        let o = op(&[2, -3, 1]);
        assert_eq!(serde_json::to_string(&o).unwrap(), r#"["2","-3","1"]"#);
        let back: Operator = serde_json::from_str(r#"["2",-3,"1"]"#).unwrap();
        assert_eq!(back, o);
        assert!(serde_json::from_str::<Operator>(r#"["1","0"]"#).is_err());
    }
}
