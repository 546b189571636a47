//! Dense univariate polynomials with integer coefficients, plus the exact
//! real-root machinery (Sturm chains, bisection, interval evaluation) used to
//! certify Kepler limits.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Integer polynomial, coefficient `i` multiplies `X^i`. Trailing zeros are
/// always trimmed, so the zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `X - c`
    pub fn linear_monic(c: &BigInt) -> Self {
        IntPoly(vec![-c, BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.0.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> i8 {
        sign(&self.eval(x))
    }

    /// Interval enclosure of `p([lo, hi])` for `0 <= lo <= hi`.
    pub fn eval_interval_nonneg(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        debug_assert!(!lo.is_negative() && lo <= hi);
        let mut low = BigRational::zero();
        let mut high = BigRational::zero();
        let mut plo = BigRational::one();
        let mut phi = BigRational::one();
        for c in &self.0 {
            let cr = BigRational::from_integer(c.clone());
            if c.is_positive() {
                low += &cr * &plo;
                high += &cr * &phi;
            } else if c.is_negative() {
                low += &cr * &phi;
                high += &cr * &plo;
            }
            plo *= lo;
            phi *= hi;
        }
        (low, high)
    }

    /// Content-free version with positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = BigInt::zero();
        for c in &self.0 {
            g = g.gcd(c);
        }
        let mut v: Vec<BigInt> = self.0.iter().map(|c| c / &g).collect();
        if v.last().unwrap().is_negative() {
            v.iter_mut().for_each(|c| *c = -c.clone());
        }
        IntPoly(v)
    }

    /// Exact divisibility over the integers by a monic divisor.
    pub fn divisible_by_monic(&self, divisor: &IntPoly) -> bool {
        debug_assert!(divisor.is_monic());
        match self.div_rem_monic(divisor) {
            Some((_, r)) => r.is_zero(),
            None => false,
        }
    }

    /// Quotient and remainder by a monic polynomial (stays in `Z[X]`).
    pub fn div_rem_monic(&self, divisor: &IntPoly) -> Option<(IntPoly, IntPoly)> {
        let dd = divisor.degree()?;
        if !divisor.is_monic() {
            return None;
        }
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return Some((IntPoly(Vec::new()), IntPoly::new(rem)));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.0.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Some((IntPoly::new(quot), IntPoly::new(rem)))
    }

    fn to_rational(&self) -> RatPoly {
        RatPoly::new(
            self.0
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Monic gcd of two monic polynomials.
    pub fn gcd_monic(&self, other: &IntPoly) -> IntPoly {
        let g = self.to_rational().gcd(&other.to_rational());
        g.to_monic_int()
            .expect("gcd of monic integer polynomials is integral")
    }

    /// Monic lcm of two monic polynomials.
    pub fn lcm_monic(&self, other: &IntPoly) -> IntPoly {
        let g = self.gcd_monic(other);
        let prod = self.mul(other);
        prod.div_rem_monic(&g).expect("monic gcd").0
    }

    /// Upper bound on the modulus of every complex root (Cauchy), as an integer.
    pub fn root_bound(&self) -> BigInt {
        let lead = self.leading().expect("nonzero polynomial").abs();
        let mut m = BigInt::zero();
        for c in &self.0[..self.0.len() - 1] {
            let q = c.abs().div_ceil(&lead);
            if q > m {
                m = q;
            }
        }
        m + 1
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = !mag.is_one() || i == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{i}")?,
            }
        }
        Ok(())
    }
}

pub fn sign(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Rational polynomial used internally for gcds and Sturm chains.
#[derive(Debug, Clone, PartialEq)]
struct RatPoly(Vec<BigRational>);

impl RatPoly {
    fn new(mut v: Vec<BigRational>) -> Self {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        RatPoly(v)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn rem(&self, d: &RatPoly) -> RatPoly {
        let dd = d.0.len() - 1;
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() / &lead;
            for (i, di) in d.0.iter().enumerate() {
                r[k + i] -= &c * di;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        RatPoly::new(r)
    }

    fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn to_monic_int(&self) -> Option<IntPoly> {
        let lead = self.0.last()?.clone();
        let mut out = Vec::with_capacity(self.0.len());
        for c in &self.0 {
            let q = c / &lead;
            if !q.is_integer() {
                return None;
            }
            out.push(q.to_integer());
        }
        Some(IntPoly::new(out))
    }

    fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Sturm chain of a squarefree polynomial.
#[derive(Debug, Clone)]
pub struct SturmChain(Vec<RatPoly>);

impl SturmChain {
    pub fn new(p: &IntPoly) -> Self {
        let p0 = p.to_rational();
        let p1 = p.derivative().to_rational();
        let mut chain = vec![p0, p1];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(RatPoly::new(r.0.into_iter().map(|c| -c).collect()));
        }
        SturmChain(chain)
    }

    fn variations(&self, x: &BigRational) -> usize {
        let mut last = 0i8;
        let mut count = 0;
        for p in &self.0 {
            let s = sign(&p.eval(x));
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Result of the irreducibility test over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Reducible(IntPoly),
    /// Trial factorization exceeded its candidate budget.
    Unknown,
}

/// Candidate ceiling for the bounded trial factorization.
pub const TRIAL_FACTOR_CAP: u64 = 2_000_000;

/// Decides irreducibility of a monic integer polynomial by searching for a
/// monic integer factor of degree at most half the degree. Coefficients of
/// such a factor are elementary symmetric functions of roots bounded by the
/// Cauchy bound, which makes the search finite.
pub fn irreducibility(p: &IntPoly) -> Irreducibility {
    assert!(p.is_monic(), "irreducibility expects a monic polynomial");
    let n = p.degree().unwrap();
    if n <= 1 {
        return if n == 1 {
            Irreducibility::Irreducible
        } else {
            Irreducibility::Reducible(p.clone())
        };
    }
    let a0 = &p.coeffs()[0];
    if a0.is_zero() {
        return Irreducibility::Reducible(IntPoly::from_i64(&[0, 1]));
    }
    let bound = p.root_bound();
    for j in 1..=n / 2 {
        // Per-coefficient ranges for X^0 .. X^{j-1}.
        let mut ranges: Vec<BigInt> = Vec::with_capacity(j);
        let mut total: f64 = 1.0;
        for i in 0..j {
            let r = binomial(j, i) * num_traits::pow(bound.clone(), j - i);
            total *= 2.0 * r.to_string().parse::<f64>().unwrap_or(f64::INFINITY) + 1.0;
            ranges.push(r);
        }
        // The constant term ranges over divisors of a0, which is much smaller.
        let divisors = match small_divisors(a0, &ranges[0]) {
            Some(d) => d,
            None => return Irreducibility::Unknown,
        };
        let const_r = ranges[0].to_string().parse::<f64>().unwrap_or(f64::INFINITY);
        let est = total / (2.0 * const_r + 1.0) * divisors.len() as f64;
        if !est.is_finite() || est > TRIAL_FACTOR_CAP as f64 {
            return Irreducibility::Unknown;
        }
        let mut cur: Vec<BigInt> = vec![BigInt::zero(); j + 1];
        cur[j] = BigInt::one();
        if let Some(f) = search_factor(p, &ranges, &divisors, &mut cur, 1) {
            return Irreducibility::Reducible(f);
        }
    }
    Irreducibility::Irreducible
}

fn search_factor(
    p: &IntPoly,
    ranges: &[BigInt],
    divisors: &[BigInt],
    cur: &mut Vec<BigInt>,
    idx: usize,
) -> Option<IntPoly> {
    if idx == ranges.len() {
        for d in divisors {
            cur[0] = d.clone();
            let cand = IntPoly::new(cur.clone());
            if p.divisible_by_monic(&cand) {
                return Some(cand);
            }
        }
        return None;
    }
    let r = &ranges[idx];
    let mut c = -r.clone();
    while &c <= r {
        cur[idx] = c.clone();
        if let Some(f) = search_factor(p, ranges, divisors, cur, idx + 1) {
            return Some(f);
        }
        c += 1;
    }
    None
}

/// Signed divisors of `n` with absolute value at most `limit`; `None` when
/// enumeration would be too expensive.
fn small_divisors(n: &BigInt, limit: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let cap = std::cmp::min(&n, limit).clone();
    let cap_u: u64 = cap.to_string().parse().ok()?;
    if cap_u > TRIAL_FACTOR_CAP {
        return None;
    }
    let mut out = Vec::new();
    for d in 1..=cap_u {
        let db = BigInt::from(d);
        if (&n % &db).is_zero() {
            out.push(db.clone());
            out.push(-db);
        }
    }
    Some(out)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// An interval `[lo, hi]` known to contain exactly one real root of a
/// squarefree polynomial (`lo == hi` when the root is rational).
#[derive(Debug, Clone, PartialEq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Isolates the largest real root of squarefree `p` provided it exceeds
/// `floor`. Returns `None` when `p` has no root above `floor`.
pub fn isolate_largest_root(p: &IntPoly, floor: &BigRational) -> Option<RootInterval> {
    let chain = SturmChain::new(p);
    let mut hi = BigRational::from_integer(p.root_bound());
    let mut lo = floor.clone();
    if chain.count(&lo, &hi) == 0 {
        return None;
    }
    // Shrink until exactly one root remains in (lo, hi], keeping the top one.
    loop {
        if p.sign_at(&hi) == 0 {
            return Some(RootInterval { lo: hi.clone(), hi });
        }
        let n = chain.count(&lo, &hi);
        if n == 1 {
            break;
        }
        let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
        if chain.count(&mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(RootInterval { lo, hi })
}

/// Bisects `iv` (which brackets a root of `p` with a sign change, or is
/// degenerate) until its width is at most `width`.
pub fn refine(p: &IntPoly, iv: &RootInterval, width: &BigRational) -> RootInterval {
    let mut lo = iv.lo.clone();
    let mut hi = iv.hi.clone();
    if lo == hi {
        return iv.clone();
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut slo = p.sign_at(&lo);
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        let sm = p.sign_at(&mid);
        if sm == 0 {
            return RootInterval { lo: mid.clone(), hi: mid };
        }
        if sm == slo {
            lo = mid;
            slo = sm;
        } else {
            hi = mid;
        }
    }
    RootInterval { lo, hi }
}

/// Sign of `q` at the unique root of `p` isolated by `iv`, refining the
/// interval until the interval enclosure of `q` excludes zero. Returns the
/// sign, a certified lower bound on `|q(root)|`, and the refined interval.
/// Returns `None` if `q` vanishes at the root (caller should test
/// divisibility first) or the iteration cap is hit.
pub fn sign_at_root(
    p: &IntPoly,
    q: &IntPoly,
    iv: &RootInterval,
    max_iter: usize,
) -> Option<(i8, BigRational, RootInterval)> {
    let mut cur = iv.clone();
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..max_iter {
        let (a, b) = q.eval_interval_nonneg(&cur.lo, &cur.hi);
        if a.is_positive() {
            return Some((1, a, cur));
        }
        if b.is_negative() {
            return Some((-1, -b, cur));
        }
        if cur.lo == cur.hi {
            return None;
        }
        let w = cur.width() / &two;
        cur = refine(p, &cur, &w);
    }
    None
}
