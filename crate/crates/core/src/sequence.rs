//! Regular sequences: declarative specs, a memoized exact evaluator, the
//! characteristic polynomial, Kepler limits and growth-dominance cutoffs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, ProofReason};
use crate::error::{Error, Result};
use crate::numstr;
use crate::poly::{self, IntPoly, Irreducibility, RootInterval};

/// Default number of terms scanned when analysing ratios.
pub const DEFAULT_SCAN_BUDGET: usize = 512;

/// Declarative description of an integer sequence `r_0, r_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SequenceSpec {
    /// `r_{n+k} = sum a_i r_{n+i}` with the given initial terms.
    #[serde(rename = "recurrence")]
    LinearRecurrence {
        #[serde(with = "numstr::big_vec")]
        coeffs: Vec<BigInt>,
        #[serde(with = "numstr::big_vec")]
        initials: Vec<BigInt>,
    },
    /// `r_n = base^n`.
    #[serde(rename = "power")]
    PowerBase {
        #[serde(with = "numstr::big")]
        base: BigInt,
    },
    /// `r_n = (n + 2)!`, shifted so the sequence is strictly increasing.
    #[serde(rename = "factorial")]
    Factorial,
    /// Pointwise sum of the parts.
    #[serde(rename = "sum")]
    SumOf { parts: Vec<SequenceSpec> },
    /// Explicit values, optionally extended by a closed-form generator.
    /// These are not assumed regular; every certificate on them is bounded.
    #[serde(rename = "table")]
    Table {
        #[serde(with = "numstr::big_vec", default)]
        values: Vec<BigInt>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<Generator>,
    },
}

impl SequenceSpec {
    pub fn power(base: i64) -> Self {
        SequenceSpec::PowerBase {
            base: BigInt::from(base),
        }
    }

    pub fn recurrence(coeffs: &[i64], initials: &[i64]) -> Self {
        SequenceSpec::LinearRecurrence {
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            initials: initials.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    /// The Fibonacci-style sequence 1, 2, 3, 5, 8, ...
    pub fn fibonacci() -> Self {
        Self::recurrence(&[1, 1], &[1, 2])
    }

    pub fn sum(parts: Vec<SequenceSpec>) -> Self {
        SequenceSpec::SumOf { parts }
    }

    pub fn generated(generator: Generator) -> Self {
        SequenceSpec::Table {
            values: Vec::new(),
            generator: Some(generator),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::LinearRecurrence { coeffs, initials } => {
                if coeffs.is_empty() || coeffs.len() != initials.len() {
                    return Err(Error::InvalidSpec(format!(
                        "recurrence needs k >= 1 coefficients and k initial terms (got {} and {})",
                        coeffs.len(),
                        initials.len()
                    )));
                }
                check_increasing(initials)
            }
            SequenceSpec::PowerBase { base } => {
                if *base < BigInt::from(2) {
                    return Err(Error::InvalidSpec(format!("power base must be >= 2, got {base}")));
                }
                Ok(())
            }
            SequenceSpec::Factorial => Ok(()),
            SequenceSpec::SumOf { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("sum needs at least one part".into()));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
            SequenceSpec::Table { values, generator } => {
                if values.is_empty() && generator.is_none() {
                    return Err(Error::InvalidSpec("table needs values or a generator".into()));
                }
                check_increasing(values)?;
                if let Some(g) = generator {
                    for (n, v) in values.iter().enumerate() {
                        if g.eval(n) != *v {
                            return Err(Error::InvalidSpec(format!(
                                "table value at {n} disagrees with generator {g}"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_increasing(values: &[BigInt]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        let ok = if i == 0 { v.is_positive() } else { *v > values[i - 1] };
        if !ok {
            return Err(Error::NotMonotone { index: i });
        }
    }
    Ok(())
}

/// Closed form `sum c_j * b_j^n + sum c_k * n^p_k`, written like `2^n + n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Generator {
    terms: Vec<GenTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum GenTerm {
    Exp { coeff: BigInt, base: BigInt },
    Poly { coeff: BigInt, power: u32 },
}

impl Generator {
    pub fn eval(&self, n: usize) -> BigInt {
        let nb = BigInt::from(n);
        self.terms
            .iter()
            .map(|t| match t {
                GenTerm::Exp { coeff, base } => coeff * num_traits::pow(base.clone(), n),
                GenTerm::Poly { coeff, power } => coeff * num_traits::pow(nb.clone(), *power as usize),
            })
            .sum()
    }

    pub(crate) fn exp_terms(&self) -> Vec<(BigInt, BigInt)> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                GenTerm::Exp { coeff, base } => Some((coeff.clone(), base.clone())),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn poly_terms(&self) -> Vec<(BigInt, u32)> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                GenTerm::Poly { coeff, power } => Some((coeff.clone(), *power)),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let (coeff, body) = match t {
                GenTerm::Exp { coeff, base } => (coeff, format!("{base}^n")),
                GenTerm::Poly { coeff, power } => (
                    coeff,
                    match power {
                        0 => String::new(),
                        1 => "n".to_string(),
                        p => format!("n^{p}"),
                    },
                ),
            };
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if body.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{body}")?;
            } else {
                write!(f, "{mag}*{body}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidSpec(format!("generator {s:?}: {msg}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut terms = Vec::new();
        let bytes = compact.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut neg = false;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                neg = bytes[i] == b'-';
                i += 1;
            } else if i != 0 {
                return Err(bad("expected + or -"));
            }
            let start = i;
            while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                i += 1;
            }
            let tok = &compact[start..i];
            if tok.is_empty() {
                return Err(bad("empty term"));
            }
            let (coeff_str, body) = match tok.split_once('*') {
                Some((c, b)) => (Some(c), b),
                None => (None, tok),
            };
            let mut coeff = match coeff_str {
                Some(c) => numstr::parse_int(c).map_err(|e| bad(&e))?,
                None => BigInt::one(),
            };
            if neg {
                coeff = -coeff;
            }
            let term = if let Some(base) = body.strip_suffix("^n") {
                GenTerm::Exp {
                    coeff,
                    base: numstr::parse_int(base).map_err(|e| bad(&e))?,
                }
            } else if body == "n" {
                GenTerm::Poly { coeff, power: 1 }
            } else if let Some(p) = body.strip_prefix("n^") {
                GenTerm::Poly {
                    coeff,
                    power: p.parse().map_err(|_| bad("bad exponent"))?,
                }
            } else if coeff_str.is_none() {
                let c = numstr::parse_int(body).map_err(|e| bad(&e))?;
                GenTerm::Poly {
                    coeff: if neg { -c } else { c },
                    power: 0,
                }
            } else {
                return Err(bad("unrecognized term"));
            };
            terms.push(term);
        }
        Ok(Generator { terms })
    }
}

impl TryFrom<String> for Generator {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Generator> for String {
    fn from(g: Generator) -> String {
        g.to_string()
    }
}

/// Monic characteristic polynomial `X^k - sum a_i X^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharPoly(IntPoly);

impl CharPoly {
    pub fn new(p: IntPoly) -> Option<Self> {
        (p.is_monic() && p.degree().unwrap_or(0) >= 1).then_some(CharPoly(p))
    }

    pub fn poly(&self) -> &IntPoly {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.degree().unwrap()
    }

    /// Recurrence coefficients `a_0..a_{k-1}` with `r_{n+k} = sum a_i r_{n+i}`.
    pub fn recurrence(&self) -> Vec<BigInt> {
        let c = self.0.coeffs();
        c[..c.len() - 1].iter().map(|x| -x).collect()
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for CharPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Characteristic polynomial of the spec, when it has one.
pub fn char_poly(spec: &SequenceSpec) -> Option<CharPoly> {
    match spec {
        SequenceSpec::LinearRecurrence { coeffs, .. } => {
            let mut c: Vec<BigInt> = coeffs.iter().map(|a| -a).collect();
            c.push(BigInt::one());
            CharPoly::new(IntPoly::new(c))
        }
        SequenceSpec::PowerBase { base } => CharPoly::new(IntPoly::linear_monic(base)),
        SequenceSpec::Factorial | SequenceSpec::Table { .. } => None,
        SequenceSpec::SumOf { parts } => {
            let mut acc: Option<IntPoly> = None;
            for p in parts {
                let cp = char_poly(p)?;
                acc = Some(match acc {
                    None => cp.0,
                    Some(a) => a.lcm_monic(&cp.0),
                });
            }
            acc.and_then(CharPoly::new)
        }
    }
}

/// Limit of consecutive ratios `r_{n+1}/r_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum KeplerLimit {
    Infinite,
    AlgebraicRoot {
        minpoly: CharPoly,
        interval: RootInterval,
    },
    EmpiricalInterval {
        lo: BigRational,
        hi: BigRational,
        checked_up_to: usize,
        /// Set when the ratio range failed to shrink over the scan.
        non_convergent: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub kepler: KeplerLimit,
    pub recurrence_certified: bool,
    pub notes: String,
}

/// Internal view of the Kepler limit used by the dominance machinery.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Theta {
    Infinite,
    Algebraic { minpoly: IntPoly, interval: RootInterval },
    Empirical { lo: BigRational, hi: BigRational },
}

impl Theta {
    fn interval(&self) -> Option<(BigRational, BigRational)> {
        match self {
            Theta::Infinite => None,
            Theta::Algebraic { interval, .. } => Some((interval.lo.clone(), interval.hi.clone())),
            Theta::Empirical { lo, hi } => Some((lo.clone(), hi.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    /// Ratios are monotone from the window start.
    Monotone,
    /// Ratios alternate around the limit with shrinking steps.
    Alternating,
}

/// Index range on which the ratio sequence was verified to be monotone or
/// alternating with shrinking amplitude. Under that shape every later ratio
/// lies in the hull of two consecutive ratios and the limit interval, and
/// those hulls are nested.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioWindow {
    pub start: usize,
    pub shape: WindowShape,
    pub verified_to: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Analysis {
    pub theta: Theta,
    pub certified: bool,
    pub window: Option<RatioWindow>,
    /// Largest index evaluated during the scan.
    pub scanned: usize,
    pub non_convergent: bool,
    pub notes: String,
}

/// How to obtain a dominance cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffMode {
    /// Require the ratio window; fails if it cannot be established.
    Certified,
    /// Scan the evaluated prefix only.
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutoff {
    pub k: usize,
    pub certificate: Certificate,
}

/// Memoized evaluator for a validated [`SequenceSpec`].
///
/// Readers can run concurrently; extending the cache takes the write lock.
pub struct SequenceHandle {
    spec: SequenceSpec,
    parts: Vec<SequenceHandle>,
    cache: RwLock<Vec<BigInt>>,
    scan_budget: usize,
    analysis: OnceLock<Analysis>,
    pub(crate) profiles: Mutex<HashMap<u64, crate::congruence::CongruenceProfile>>,
    pub(crate) classified: Mutex<HashMap<(Vec<BigInt>, usize), crate::operator::Classified>>,
}

impl fmt::Debug for SequenceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceHandle")
            .field("spec", &self.spec)
            .field("cached", &self.cache.read().unwrap().len())
            .finish()
    }
}

impl SequenceHandle {
    pub fn new(spec: SequenceSpec) -> Result<Self> {
        Self::with_scan_budget(spec, DEFAULT_SCAN_BUDGET)
    }

    pub fn with_scan_budget(spec: SequenceSpec, scan_budget: usize) -> Result<Self> {
        spec.validate()?;
        let parts = match &spec {
            SequenceSpec::SumOf { parts } => parts
                .iter()
                .map(|p| SequenceHandle::with_scan_budget(p.clone(), scan_budget))
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        Ok(SequenceHandle {
            spec,
            parts,
            cache: RwLock::new(Vec::new()),
            scan_budget: scan_budget.max(8),
            analysis: OnceLock::new(),
            profiles: Mutex::new(HashMap::new()),
            classified: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn scan_budget(&self) -> usize {
        self.scan_budget
    }

    /// Whether the sequence comes from an explicit table (never certified).
    pub fn is_table(&self) -> bool {
        matches!(self.spec, SequenceSpec::Table { .. })
    }

    /// Exact `r_n`.
    pub fn eval(&self, n: usize) -> Result<BigInt> {
        {
            let cache = self.cache.read().unwrap();
            if let Some(v) = cache.get(n) {
                return Ok(v.clone());
            }
        }
        self.extend_to(n)?;
        Ok(self.cache.read().unwrap()[n].clone())
    }

    /// `r_0, ..., r_n`.
    pub fn prefix(&self, n: usize) -> Result<Vec<BigInt>> {
        self.extend_to(n)?;
        Ok(self.cache.read().unwrap()[..=n].to_vec())
    }

    /// Number of terms that can be evaluated (bounded only for bare tables).
    pub fn available(&self) -> Option<usize> {
        match &self.spec {
            SequenceSpec::Table {
                values,
                generator: None,
            } => Some(values.len()),
            _ => None,
        }
    }

    fn extend_to(&self, n: usize) -> Result<()> {
        if self.cache.read().unwrap().len() > n {
            return Ok(());
        }
        let mut cache = self.cache.write().unwrap();
        while cache.len() <= n {
            let i = cache.len();
            let next = self.compute_next(&cache, i)?;
            let ok = if i == 0 { next.is_positive() } else { next > cache[i - 1] };
            if !ok {
                return Err(Error::NotMonotone { index: i });
            }
            cache.push(next);
        }
        Ok(())
    }

    fn compute_next(&self, cache: &[BigInt], i: usize) -> Result<BigInt> {
        Ok(match &self.spec {
            SequenceSpec::LinearRecurrence { coeffs, initials } => {
                let k = coeffs.len();
                if i < k {
                    initials[i].clone()
                } else {
                    coeffs
                        .iter()
                        .zip(&cache[i - k..i])
                        .map(|(a, r)| a * r)
                        .sum()
                }
            }
            SequenceSpec::PowerBase { base } => {
                if i == 0 {
                    BigInt::one()
                } else {
                    &cache[i - 1] * base
                }
            }
            SequenceSpec::Factorial => {
                if i == 0 {
                    BigInt::from(2)
                } else {
                    &cache[i - 1] * BigInt::from(i + 2)
                }
            }
            SequenceSpec::SumOf { .. } => {
                let mut s = BigInt::zero();
                for p in &self.parts {
                    s += p.eval(i)?;
                }
                s
            }
            SequenceSpec::Table { values, generator } => match values.get(i) {
                Some(v) => v.clone(),
                None => match generator {
                    Some(g) => g.eval(i),
                    None => {
                        return Err(Error::OutOfTable {
                            index: i,
                            len: values.len(),
                        })
                    }
                },
            },
        })
    }

    /// `r_{n+1} / r_n`.
    pub fn ratio(&self, n: usize) -> Result<BigRational> {
        Ok(BigRational::new(self.eval(n + 1)?, self.eval(n)?))
    }

    pub(crate) fn analysis(&self) -> &Analysis {
        self.analysis.get_or_init(|| self.analyze(self.scan_budget))
    }

    /// Whether the sequence carries certified Kepler data (regular in the
    /// strong sense: irreducible minimal polynomial or infinite limit).
    pub fn is_certified(&self) -> bool {
        self.analysis().certified
    }

    pub fn ratio_window(&self) -> Option<RatioWindow> {
        self.analysis().window.clone()
    }

    fn analyze(&self, budget: usize) -> Analysis {
        let mut notes = Vec::new();
        let scanned = match self.available() {
            Some(len) if len <= budget + 1 => len.saturating_sub(1),
            _ => budget,
        };
        let prefix = match self.prefix(scanned) {
            Ok(p) => p,
            Err(e) => {
                notes.push(format!("evaluation failed: {e}"));
                return Analysis {
                    theta: Theta::Empirical {
                        lo: BigRational::one(),
                        hi: BigRational::one(),
                    },
                    certified: false,
                    window: None,
                    scanned: 0,
                    non_convergent: true,
                    notes: notes.join("; "),
                };
            }
        };
        let (emp_lo, emp_hi, non_convergent) = empirical_ratio_range(&prefix);

        let (theta, certified) = match &self.spec {
            SequenceSpec::Factorial => {
                notes.push("factorial evaluated as r_n = (n+2)!".into());
                (Theta::Infinite, true)
            }
            SequenceSpec::PowerBase { base } => {
                let b = BigRational::from_integer(base.clone());
                (
                    Theta::Algebraic {
                        minpoly: IntPoly::linear_monic(base),
                        interval: RootInterval { lo: b.clone(), hi: b },
                    },
                    true,
                )
            }
            SequenceSpec::LinearRecurrence { .. } => {
                let cp = char_poly(&self.spec).expect("recurrence has a characteristic polynomial");
                match poly::irreducibility(cp.poly()) {
                    Irreducibility::Irreducible => {
                        match poly::isolate_largest_root(cp.poly(), &BigRational::one()) {
                            Some(iv) => {
                                let tiny = BigRational::new(BigInt::one(), BigInt::from(1u64 << 32));
                                let iv = poly::refine(cp.poly(), &iv, &tiny);
                                let last = BigRational::new(
                                    prefix[scanned].clone(),
                                    prefix[scanned - 1].clone(),
                                );
                                let tol = BigRational::new(BigInt::one(), BigInt::from(100));
                                if last >= &iv.lo - &tol && last <= &iv.hi + &tol {
                                    (
                                        Theta::Algebraic {
                                            minpoly: cp.poly().clone(),
                                            interval: iv,
                                        },
                                        true,
                                    )
                                } else {
                                    notes.push("ratio scan does not approach the largest real root".into());
                                    (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
                                }
                            }
                            None => {
                                notes.push("characteristic polynomial has no real root above 1".into());
                                (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
                            }
                        }
                    }
                    Irreducibility::Reducible(f) => {
                        notes.push(format!("characteristic polynomial has factor {f}; not minimal"));
                        (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
                    }
                    Irreducibility::Unknown => {
                        notes.push("irreducibility undecided within the trial-factor budget".into());
                        (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
                    }
                }
            }
            SequenceSpec::SumOf { .. } => match self.dominant_part() {
                Some(i) if self.parts.iter().all(|p| p.is_certified()) => {
                    notes.push(format!("limit taken from part {i}"));
                    (self.parts[i].analysis().theta.clone(), true)
                }
                _ => {
                    notes.push("some part lacks certified Kepler data".into());
                    (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
                }
            },
            SequenceSpec::Table { .. } => {
                notes.push("table sequence: regularity not assumed".into());
                (Theta::Empirical { lo: emp_lo.clone(), hi: emp_hi.clone() }, false)
            }
        };

        let window = detect_window(&prefix, &theta);
        if window.is_none() {
            notes.push("no monotone or alternating ratio window within the scan".into());
        }
        Analysis {
            theta,
            certified,
            window,
            scanned,
            non_convergent,
            notes: notes.join("; "),
        }
    }

    /// Index of the part with the largest Kepler limit.
    pub(crate) fn dominant_part(&self) -> Option<usize> {
        if self.parts.is_empty() {
            return None;
        }
        let mut best = 0;
        for i in 1..self.parts.len() {
            if compare_theta(&self.parts[i].analysis().theta, &self.parts[best].analysis().theta)
                == Some(std::cmp::Ordering::Greater)
            {
                best = i;
            }
        }
        Some(best)
    }

    /// Kepler limit with an isolating interval of width at most `precision`.
    pub fn kepler_limit(&self, precision: &BigRational, scan_budget: usize) -> KeplerLimit {
        let fresh;
        let a = if scan_budget == self.scan_budget {
            self.analysis()
        } else {
            fresh = self.analyze(scan_budget);
            &fresh
        };
        match (&a.theta, a.certified) {
            (Theta::Infinite, true) => KeplerLimit::Infinite,
            (Theta::Algebraic { minpoly, interval }, true) => KeplerLimit::AlgebraicRoot {
                minpoly: CharPoly::new(minpoly.clone()).expect("monic minimal polynomial"),
                interval: poly::refine(minpoly, interval, precision),
            },
            _ => {
                let prefix = self.prefix(a.scanned).unwrap_or_default();
                let (lo, hi, non_convergent) = empirical_ratio_range(&prefix);
                KeplerLimit::EmpiricalInterval {
                    lo,
                    hi,
                    checked_up_to: a.scanned,
                    non_convergent: non_convergent || a.non_convergent,
                }
            }
        }
    }

    pub fn regularity_report(&self) -> RegularityReport {
        let eps = BigRational::new(BigInt::one(), BigInt::from(1_000_000));
        let a = self.analysis();
        RegularityReport {
            kepler: self.kepler_limit(&eps, self.scan_budget),
            recurrence_certified: a.certified
                && matches!(
                    self.spec,
                    SequenceSpec::LinearRecurrence { .. } | SequenceSpec::PowerBase { .. } | SequenceSpec::SumOf { .. }
                )
                && !matches!(a.theta, Theta::Infinite),
            notes: a.notes.clone(),
        }
    }

    /// Certified isolating interval of a finite algebraic limit, refined to
    /// `width`.
    pub(crate) fn theta_interval(&self, width: &BigRational) -> Option<(BigRational, BigRational)> {
        match &self.analysis().theta {
            Theta::Algebraic { minpoly, interval } => {
                let iv = poly::refine(minpoly, interval, width);
                Some((iv.lo, iv.hi))
            }
            t => t.interval(),
        }
    }

    /// Hull containing `r_{t+1}/r_t` for every `t >= n` under the window
    /// shape. `hi` is `None` when the limit is infinite.
    pub(crate) fn hull(
        &self,
        n: usize,
        theta: Option<&(BigRational, BigRational)>,
    ) -> Result<(BigRational, Option<BigRational>)> {
        let a = self.ratio(n)?;
        let b = self.ratio(n + 1)?;
        let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
        match theta {
            None => Ok((lo, None)),
            Some((tl, th)) => {
                if tl < &lo {
                    lo = tl.clone();
                }
                if th > &hi {
                    hi = th.clone();
                }
                Ok((lo, Some(hi)))
            }
        }
    }

    /// Certified lower bound on every ratio `r_{t+1}/r_t` with `t >= n`.
    /// `n` must lie inside the ratio window.
    pub(crate) fn ratio_floor(&self, n: usize) -> Option<BigRational> {
        let a = self.analysis();
        let w = a.window.as_ref()?;
        if n < w.start || n + 2 > w.verified_to {
            return None;
        }
        let theta = a.theta.interval();
        self.hull(n, theta.as_ref()).ok().map(|(lo, _)| lo)
    }

    /// Smallest `k` such that for all `n >= k` and `1 <= i <= max_shift`,
    /// `|r_{n+i} - theta^i r_n| < eps * r_n` (finite limit) or
    /// `r_{n+1}/r_n > 1/eps` (infinite limit).
    pub fn dominance_cutoff(&self, eps: &BigRational, max_shift: usize, mode: CutoffMode) -> Result<Cutoff> {
        if !eps.is_positive() {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        let a = self.analysis();
        let certified = a.certified && a.window.is_some() && mode == CutoffMode::Certified;
        if mode == CutoffMode::Certified && !certified {
            return Err(Error::BudgetExhausted { verified: a.scanned });
        }
        if max_shift == 0 && !matches!(a.theta, Theta::Infinite) {
            let cert = if certified {
                Certificate::proved(ProofReason::DominanceWindow)
            } else {
                Certificate::bounded(a.scanned)
            };
            return Ok(Cutoff { k: 0, certificate: cert });
        }
        if matches!(a.theta, Theta::Infinite) {
            let bound = eps.recip();
            let holds = |n: usize| -> Result<bool> { Ok(self.ratio(n)? > bound) };
            return self.cutoff_search(a, certified, holds, ProofReason::ThetaInfiniteDominance, |n| {
                Ok(self.ratio(n)? > bound)
            });
        }
        let d = max_shift;
        let (_, hi0) = a.theta.interval().expect("finite limit");
        let growth = num_traits::pow(hi0 + BigRational::one(), d);
        let width = eps / (BigRational::from_integer(BigInt::from(4 * d)) * growth);
        let theta = self.theta_interval(&width).expect("finite limit");
        let hull_ok = |n: usize| -> Result<bool> {
            let (lo, hi) = self.hull(n, Some(&theta))?;
            let hi = hi.expect("finite");
            Ok(num_traits::pow(hi, d) - num_traits::pow(lo, d) < *eps)
        };
        let direct_ok = |n: usize| -> Result<bool> {
            let rn = BigRational::from_integer(self.eval(n)?);
            let bound = eps * &rn;
            let mut plo = BigRational::one();
            let mut phi = BigRational::one();
            for i in 1..=d {
                plo *= &theta.0;
                phi *= &theta.1;
                let rni = BigRational::from_integer(self.eval(n + i)?);
                let e1 = (&rni - &plo * &rn).abs();
                let e2 = (&rni - &phi * &rn).abs();
                if e1 >= bound || e2 >= bound {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        self.cutoff_search(a, certified, hull_ok, ProofReason::DominanceWindow, direct_ok)
    }

    fn cutoff_search(
        &self,
        a: &Analysis,
        certified: bool,
        tail_ok: impl Fn(usize) -> Result<bool>,
        reason: ProofReason,
        direct_ok: impl Fn(usize) -> Result<bool>,
    ) -> Result<Cutoff> {
        if certified {
            let w = a.window.as_ref().unwrap();
            let mut found = None;
            for n in w.start..w.verified_to.saturating_sub(2) {
                if tail_ok(n)? {
                    found = Some(n);
                    break;
                }
            }
            let Some(mut k) = found else {
                return Err(Error::BudgetExhausted { verified: w.verified_to });
            };
            while k > 0 && direct_ok(k - 1)? {
                k -= 1;
            }
            Ok(Cutoff {
                k,
                certificate: Certificate::proved(reason),
            })
        } else {
            // Bounded: the inequality must hold on [k, scanned - margin].
            let top = a.scanned.saturating_sub(8);
            if top == 0 {
                return Err(Error::BudgetExhausted { verified: a.scanned });
            }
            let mut k = top;
            if !direct_ok(k)? {
                return Err(Error::BudgetExhausted { verified: a.scanned });
            }
            while k > 0 && direct_ok(k - 1)? {
                k -= 1;
            }
            Ok(Cutoff {
                k,
                certificate: Certificate::bounded(top),
            })
        }
    }
}

fn compare_theta(a: &Theta, b: &Theta) -> Option<std::cmp::Ordering> {
    use std::cmp::Ordering::*;
    match (a, b) {
        (Theta::Infinite, Theta::Infinite) => Some(Equal),
        (Theta::Infinite, _) => Some(Greater),
        (_, Theta::Infinite) => Some(Less),
        (
            Theta::Algebraic { minpoly: pa, interval: ia },
            Theta::Algebraic { minpoly: pb, interval: ib },
        ) => {
            if pa == pb {
                return Some(Equal);
            }
            let (mut ia, mut ib) = (ia.clone(), ib.clone());
            for _ in 0..256 {
                if ia.hi < ib.lo {
                    return Some(Less);
                }
                if ib.hi < ia.lo {
                    return Some(Greater);
                }
                let two = BigRational::from_integer(BigInt::from(2));
                ia = poly::refine(pa, &ia, &(ia.width() / &two));
                ib = poly::refine(pb, &ib, &(ib.width() / &two));
            }
            None
        }
        _ => {
            let (al, ah) = a.interval()?;
            let (bl, bh) = b.interval()?;
            if ah < bl {
                Some(Less)
            } else if bh < al {
                Some(Greater)
            } else {
                None
            }
        }
    }
}

/// Ratio range over the last quarter of the prefix, and whether it failed
/// to shrink relative to the quarter before.
fn empirical_ratio_range(prefix: &[BigInt]) -> (BigRational, BigRational, bool) {
    let n = prefix.len();
    if n < 2 {
        return (BigRational::one(), BigRational::one(), true);
    }
    let ratios: Vec<BigRational> = (0..n - 1)
        .map(|i| BigRational::new(prefix[i + 1].clone(), prefix[i].clone()))
        .collect();
    let m = ratios.len();
    let range = |s: &[BigRational]| -> (BigRational, BigRational) {
        let lo = s.iter().min().unwrap().clone();
        let hi = s.iter().max().unwrap().clone();
        (lo, hi)
    };
    let q = (m / 4).max(1);
    let (lo, hi) = range(&ratios[m - q..]);
    let non_convergent = if m > 2 * q {
        let (plo, phi) = range(&ratios[m - 2 * q..m - q]);
        let w_last = &hi - &lo;
        let w_prev = phi - plo;
        w_last.is_positive() && w_last >= w_prev && lo.to_f64().is_some()
    } else {
        false
    };
    (lo, hi, non_convergent)
}

/// Finds the earliest index from which the ratio sequence is monotone (and
/// on the correct side of the limit) or alternating with shrinking steps,
/// through the end of the prefix.
fn detect_window(prefix: &[BigInt], theta: &Theta) -> Option<RatioWindow> {
    let len = prefix.len();
    if len < 4 {
        return None;
    }
    let last = len - 1;
    // num[n] = r_{n+2} r_n - r_{n+1}^2 has the sign of ratio(n+1) - ratio(n).
    let num: Vec<BigInt> = (0..len - 2)
        .map(|n| &prefix[n + 2] * &prefix[n] - &prefix[n + 1] * &prefix[n + 1])
        .collect();
    let sg = |x: &BigInt| -> i8 {
        if x.is_positive() {
            1
        } else if x.is_negative() {
            -1
        } else {
            0
        }
    };

    // Monotone from the end.
    let mut dir = 0i8;
    let mut mono_start = num.len();
    for n in (0..num.len()).rev() {
        let s = sg(&num[n]);
        if s != 0 {
            if dir == 0 {
                dir = s;
            } else if s != dir {
                break;
            }
        }
        mono_start = n;
    }
    let last_ratio = BigRational::new(prefix[last].clone(), prefix[last - 1].clone());
    let mono_ok = match theta {
        Theta::Infinite => dir >= 0,
        _ => match theta.interval() {
            Some((lo, hi)) => match dir {
                1 => last_ratio <= hi,
                -1 => last_ratio >= lo,
                _ => last_ratio >= lo && last_ratio <= hi,
            },
            None => false,
        },
    };

    // Alternating with shrinking amplitude: |num[n+1]| r_n <= |num[n]| r_{n+2}.
    let mut alt_start = num.len();
    if !matches!(theta, Theta::Infinite) {
        let mut n = num.len();
        while n > 0 {
            let i = n - 1;
            if sg(&num[i]) == 0 {
                break;
            }
            if i + 1 < num.len() {
                if sg(&num[i]) == sg(&num[i + 1]) {
                    break;
                }
                let lhs = num[i + 1].abs() * &prefix[i];
                let rhs = num[i].abs() * &prefix[i + 2];
                if lhs > rhs {
                    break;
                }
            }
            alt_start = i;
            n -= 1;
        }
        if num.len() - alt_start < 3 {
            alt_start = num.len();
        }
    }

    let mono = (mono_ok && num.len() - mono_start >= 3).then_some(mono_start);
    let alt = (alt_start < num.len()).then_some(alt_start);
    let (start, shape) = match (mono, alt) {
        (Some(m), Some(a)) if a < m => (a, WindowShape::Alternating),
        (Some(m), _) => (m, WindowShape::Monotone),
        (None, Some(a)) => (a, WindowShape::Alternating),
        (None, None) => return None,
    };
    Some(RatioWindow {
        start,
        shape,
        verified_to: last,
    })
}
