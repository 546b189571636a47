//! Negation normal form over linear terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::{Binder, Cmp, Formula, SigmaDef, Term};
use super::parser::{Parsed, Sort};

/// `constant + sum_v f_v(v) + sum_w c_w * w`, with `f_v` an operator on the
/// R variable `v` and `w` ranging over integer variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Lin {
    pub constant: BigInt,
    pub r: BTreeMap<String, Vec<BigInt>>,
    pub int: BTreeMap<String, BigInt>,
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.len() > 1 && v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn add_ops(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

impl Lin {
    pub fn constant(c: BigInt) -> Self {
        Lin {
            constant: c,
            ..Lin::default()
        }
    }

    pub fn add(&self, o: &Lin) -> Lin {
        let mut out = self.clone();
        out.constant += &o.constant;
        for (v, op) in &o.r {
            let cur = out.r.remove(v).unwrap_or_else(|| vec![BigInt::zero()]);
            let s = add_ops(&cur, op);
            if s.iter().any(|c| !c.is_zero()) {
                out.r.insert(v.clone(), s);
            }
        }
        for (v, c) in &o.int {
            let s = out.int.get(v).cloned().unwrap_or_default() + c;
            if s.is_zero() {
                out.int.remove(v);
            } else {
                out.int.insert(v.clone(), s);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Lin {
        if k.is_zero() {
            return Lin::default();
        }
        Lin {
            constant: &self.constant * k,
            r: self.r.iter().map(|(v, op)| (v.clone(), op.iter().map(|c| c * k).collect())).collect(),
            int: self.int.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
        }
    }

    pub fn plus_const(&self, k: &BigInt) -> Lin {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.r.keys().chain(self.int.keys()).cloned().collect()
    }

    pub fn is_constant(&self) -> bool {
        self.r.is_empty() && self.int.is_empty()
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (v, op) in &self.r {
            if op.len() == 1 && op[0].is_one() {
                parts.push(v.clone());
            } else {
                let c: Vec<String> = op.iter().map(|c| c.to_string()).collect();
                parts.push(format!("f[{}]({v})", c.join(", ")));
            }
        }
        for (v, c) in &self.int {
            parts.push(if c.is_one() { v.clone() } else { format!("{c}*{v}") });
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Linearizes a term in which every variable is R-sorted.
pub(crate) fn linearize_local(t: &Term) -> Result<Lin, String> {
    linearize(t, &|_| Sort::R)
}

pub(crate) fn linearize(t: &Term, sort: &dyn Fn(&str) -> Sort) -> Result<Lin, String> {
    Ok(match t {
        Term::Const(c) => Lin::constant(c.clone()),
        Term::Var(v, _) => match sort(v) {
            Sort::R => {
                let mut l = Lin::default();
                l.r.insert(v.clone(), vec![BigInt::one()]);
                l
            }
            Sort::Int => {
                let mut l = Lin::default();
                l.int.insert(v.clone(), BigInt::one());
                l
            }
        },
        Term::Succ(_) | Term::Op(..) => {
            let (coeffs, inner) = match t {
                Term::Op(c, inner) => (c.clone(), inner.as_ref()),
                _ => (vec![BigInt::one()], t),
            };
            let base = match t {
                Term::Succ(inner) => inner.as_ref(),
                _ => inner,
            };
            let (v, _, k) = base.shifted_var().ok_or("S and operators apply only to R variables")?;
            let k = if matches!(t, Term::Succ(_)) { k + 1 } else { k };
            if sort(v) != Sort::R {
                return Err(format!("{v} is not an R variable"));
            }
            let mut op = vec![BigInt::zero(); k];
            op.extend(coeffs);
            let op = trim(op);
            let mut l = Lin::default();
            if op.iter().any(|c| !c.is_zero()) {
                l.r.insert(v.to_string(), op);
            }
            l
        }
        Term::Add(a, b) => linearize(a, sort)?.add(&linearize(b, sort)?),
        Term::Neg(a) => linearize(a, sort)?.scale(&BigInt::from(-1)),
        Term::Scale(c, a) => linearize(a, sort)?.scale(c),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `lin = 0`.
    Eq(Lin),
    Div(u64, Lin),
    InR(Lin),
    IdxEq(String, usize),
    Sigma(Arc<SigmaDef>, Vec<Lin>),
}

impl Atom {
    pub fn vars(&self) -> BTreeSet<String> {
        match self {
            Atom::Eq(l) | Atom::Div(_, l) | Atom::InR(l) => l.vars(),
            Atom::IdxEq(v, _) => [v.clone()].into(),
            Atom::Sigma(_, args) => args.iter().flat_map(|a| a.vars()).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(l) => write!(f, "{l} = 0"),
            Atom::Div(m, l) => write!(f, "D{m}({l})"),
            Atom::InR(l) => write!(f, "R({l})"),
            Atom::IdxEq(v, i) => write!(f, "{v} = #{i}"),
            Atom::Sigma(d, args) => {
                let a: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{d}({})", a.join(", "))
            }
        }
    }
}

/// Formula in negation normal form. Divisibility atoms never occur negated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nnf {
    True,
    False,
    Lit(bool, Atom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    Exists(Binder, Box<Nnf>),
    Forall(Binder, Box<Nnf>),
}

impl fmt::Display for Nnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Nnf], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Nnf::True => write!(f, "true"),
            Nnf::False => write!(f, "false"),
            Nnf::Lit(true, a) => write!(f, "{a}"),
            Nnf::Lit(false, Atom::Eq(l)) => write!(f, "{l} != 0"),
            Nnf::Lit(false, Atom::IdxEq(v, i)) => write!(f, "{v} != #{i}"),
            Nnf::Lit(false, a) => write!(f, "~{a}"),
            Nnf::And(v) => join(f, v, "&"),
            Nnf::Or(v) => join(f, v, "|"),
            Nnf::Exists(b, x) | Nnf::Forall(b, x) => {
                let q = if matches!(self, Nnf::Exists(..)) { "E" } else { "A" };
                match b {
                    Binder::R(v) => write!(f, "{q} {v} in R. {x}"),
                    Binder::Int(v, bound) => write!(f, "{q} {v} <= {bound}. {x}"),
                }
            }
        }
    }
}

fn and(v: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for x in v {
        match x {
            Nnf::True => {}
            Nnf::False => return Nnf::False,
            Nnf::And(inner) => out.extend(inner),
            x => out.push(x),
        }
    }
    match out.len() {
        0 => Nnf::True,
        1 => out.pop().unwrap(),
        _ => Nnf::And(out),
    }
}

fn or(v: Vec<Nnf>) -> Nnf {
    let mut out = Vec::new();
    for x in v {
        match x {
            Nnf::False => {}
            Nnf::True => return Nnf::True,
            Nnf::Or(inner) => out.extend(inner),
            x => out.push(x),
        }
    }
    match out.len() {
        0 => Nnf::False,
        1 => out.pop().unwrap(),
        _ => Nnf::Or(out),
    }
}

struct Ctx<'a> {
    scopes: Vec<(String, Sort)>,
    free: &'a BTreeMap<String, Sort>,
}

impl Ctx<'_> {
    fn sort(&self, v: &str) -> Sort {
        self.scopes
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .or_else(|| self.free.get(v).copied())
            .unwrap_or(Sort::Int)
    }

    fn lin(&self, t: &Term) -> Lin {
        // Sorts were checked by the parser.
        linearize(t, &|v| self.sort(v)).expect("sort-checked term")
    }
}

/// Pushes negations to the atoms, expands `~D_m(t)` into
/// `D_m(t+1) | ... | D_m(t+m-1)`, and index comparisons into index
/// equalities.
pub fn normalize(p: &Parsed) -> Nnf {
    let mut ctx = Ctx {
        scopes: Vec::new(),
        free: &p.free,
    };
    go(&p.formula, true, &mut ctx)
}

fn div_lit(m: u64, l: Lin, positive: bool) -> Nnf {
    if positive {
        Nnf::Lit(true, Atom::Div(m, l))
    } else {
        or((1..m)
            .map(|k| Nnf::Lit(true, Atom::Div(m, l.plus_const(&BigInt::from(k)))))
            .collect())
    }
}

fn go(f: &Formula, pos: bool, ctx: &mut Ctx<'_>) -> Nnf {
    match f {
        Formula::True => if pos { Nnf::True } else { Nnf::False },
        Formula::False => if pos { Nnf::False } else { Nnf::True },
        Formula::Eq(a, b) => {
            let l = ctx.lin(a).add(&ctx.lin(b).scale(&BigInt::from(-1)));
            Nnf::Lit(pos, Atom::Eq(l))
        }
        Formula::Div(m, t) => div_lit(*m, ctx.lin(t), pos),
        Formula::InR(t) => Nnf::Lit(pos, Atom::InR(ctx.lin(t))),
        Formula::IdxCmp(v, _, cmp, c) => {
            let eq = |i: usize, p: bool| Nnf::Lit(p, Atom::IdxEq(v.clone(), i));
            // Each comparison as "index in {..}" (member) or its complement.
            let (member, set): (bool, Vec<usize>) = match cmp {
                Cmp::Lt => (true, (0..*c).collect()),
                Cmp::Le => (true, (0..=*c).collect()),
                Cmp::Gt => (false, (0..=*c).collect()),
                Cmp::Ge => (false, (0..*c).collect()),
                Cmp::IdxEq => (true, vec![*c]),
                Cmp::IdxNe => (false, vec![*c]),
            };
            if member == pos {
                or(set.into_iter().map(|i| eq(i, true)).collect())
            } else {
                and(set.into_iter().map(|i| eq(i, false)).collect())
            }
        }
        Formula::Sigma(d, args) => Nnf::Lit(pos, Atom::Sigma(d.clone(), args.iter().map(|a| ctx.lin(a)).collect())),
        Formula::Not(x) => go(x, !pos, ctx),
        Formula::And(v) | Formula::Or(v) => {
            let parts = v.iter().map(|x| go(x, pos, ctx)).collect();
            if matches!(f, Formula::And(_)) == pos {
                and(parts)
            } else {
                or(parts)
            }
        }
        Formula::Exists(b, body) | Formula::Forall(b, body) => {
            let sort = if matches!(b, Binder::R(_)) { Sort::R } else { Sort::Int };
            ctx.scopes.push((b.name().to_string(), sort));
            let inner = go(body, pos, ctx);
            ctx.scopes.pop();
            if matches!(f, Formula::Exists(..)) == pos {
                Nnf::Exists(b.clone(), Box::new(inner))
            } else {
                Nnf::Forall(b.clone(), Box::new(inner))
            }
        }
    }
}

impl Nnf {
    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Nnf::True | Nnf::False => BTreeSet::new(),
            Nnf::Lit(_, a) => a.vars(),
            Nnf::And(v) | Nnf::Or(v) => v.iter().flat_map(|x| x.free_vars()).collect(),
            Nnf::Exists(b, x) | Nnf::Forall(b, x) => {
                let mut s = x.free_vars();
                s.remove(b.name());
                s
            }
        }
    }

    /// Atoms mentioning `x` and no variable bound inside this subformula;
    /// the flag is set if some atom mixes `x` with such a variable.
    pub(crate) fn atoms_with(&self, x: &str) -> (Vec<&Atom>, bool) {
        let mut out = Vec::new();
        let mut coupled = false;
        fn walk<'a>(f: &'a Nnf, x: &str, bound: &mut Vec<String>, out: &mut Vec<&'a Atom>, coupled: &mut bool) {
            match f {
                Nnf::True | Nnf::False => {}
                Nnf::Lit(_, a) => {
                    let vs = a.vars();
                    if vs.contains(x) {
                        if vs.iter().any(|v| bound.contains(v)) {
                            *coupled = true;
                        } else {
                            out.push(a);
                        }
                    }
                }
                Nnf::And(v) | Nnf::Or(v) => v.iter().for_each(|y| walk(y, x, bound, out, coupled)),
                Nnf::Exists(b, y) | Nnf::Forall(b, y) => {
                    if b.name() == x {
                        return;
                    }
                    bound.push(b.name().to_string());
                    walk(y, x, bound, out, coupled);
                    bound.pop();
                }
            }
        }
        walk(self, x, &mut Vec::new(), &mut out, &mut coupled);
        (out, coupled)
    }
}
