use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Source position (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// Integer-valued term. An R-sorted variable used bare denotes its value
/// `r_n`; `S` and operators act on R-sorted variables only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Const(BigInt),
    Var(String, Pos),
    /// `S(t)`, with `t` an iterated successor of an R-sorted variable.
    Succ(Box<Term>),
    /// `f[a_0, ..., a_d](t)`, with `t` as for `Succ`.
    Op(Vec<BigInt>, Box<Term>),
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Scale(BigInt, Box<Term>),
}

impl Term {
    pub fn difference(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(Term::Neg(Box::new(b))))
    }

    /// For `S^k(x)`, the pair `(x, k)`.
    pub fn shifted_var(&self) -> Option<(&str, Pos, usize)> {
        match self {
            Term::Var(v, p) => Some((v, *p, 0)),
            Term::Succ(t) => t.shifted_var().map(|(v, p, k)| (v, p, k + 1)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    /// `x = #i`: the index of `x` is `i`.
    IdxEq,
    IdxNe,
}

/// One divisibility condition `D_l(f(y_var) + k)` of a Sigma predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmaCond {
    pub var: usize,
    pub op: Vec<BigInt>,
    pub modulus: u64,
    pub k: BigInt,
}

/// `Sigma_{C,D}`: the image of `(y_1..y_m) -> (sum_j f_ij(y_j))_i` over
/// R-tuples satisfying the conditions in `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmaDef {
    pub vars: Vec<String>,
    pub conds: Vec<SigmaCond>,
    /// `rows[i][j]` is the operator of `y_j` in row `i` (possibly all zero).
    pub rows: Vec<Vec<Vec<BigInt>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binder {
    /// Ranges over the elements of R (by index).
    R(String),
    /// Ranges over integers with `|x| <= bound`.
    Int(String, BigInt),
}

impl Binder {
    pub fn name(&self) -> &str {
        match self {
            Binder::R(v) | Binder::Int(v, _) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    /// `lhs = rhs`.
    Eq(Term, Term),
    Div(u64, Term),
    InR(Term),
    IdxCmp(String, Pos, Cmp, usize),
    Sigma(Arc<SigmaDef>, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Binder, Box<Formula>),
    Forall(Binder, Box<Formula>),
}

fn write_int_list(f: &mut fmt::Formatter<'_>, v: &[BigInt]) -> fmt::Result {
    write!(f, "[")?;
    for (i, c) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, "]")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) if c.is_negative() => write!(f, "({c})"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v, _) => write!(f, "{v}"),
            Term::Succ(t) => write!(f, "S({t})"),
            Term::Op(c, t) => {
                write!(f, "f")?;
                write_int_list(f, c)?;
                write!(f, "({t})")
            }
            Term::Add(a, b) => match b.as_ref() {
                Term::Neg(b) => write!(f, "{a} - {}", Paren(b)),
                _ => write!(f, "{a} + {b}"),
            },
            Term::Neg(t) => write!(f, "-{}", Paren(t)),
            Term::Scale(c, t) => write!(f, "{c}*{}", Paren(t)),
        }
    }
}

struct Paren<'a>(&'a Term);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Add(..) => write!(f, "({})", self.0),
            t => write!(f, "{t}"),
        }
    }
}

impl fmt::Display for SigmaDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sigma{{")?;
        if !self.conds.is_empty() {
            write!(f, "C=[")?;
            for (i, c) in self.conds.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "D{}(f", c.modulus)?;
                write_int_list(f, &c.op)?;
                write!(f, "({})", self.vars[c.var])?;
                if !c.k.is_zero() {
                    write!(f, " + {}", c.k)?;
                }
                write!(f, ")")?;
            }
            write!(f, "]; ")?;
        }
        write!(f, "D=[")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "(")?;
            let mut first = true;
            for (j, op) in row.iter().enumerate() {
                if op.iter().all(|c| c.is_zero()) {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                if op.len() == 1 && op[0].is_one() {
                    write!(f, "{}", self.vars[j])?;
                } else {
                    write!(f, "f")?;
                    write_int_list(f, op)?;
                    write!(f, "({})", self.vars[j])?;
                }
            }
            if first {
                write!(f, "0")?;
            }
            write!(f, ")")?;
        }
        write!(f, "]}}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Formula], sep: &str| -> fmt::Result {
            if v.is_empty() {
                return write!(f, "{}", if sep == "&" { "true" } else { "false" });
            }
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                match x {
                    Formula::And(_) | Formula::Or(_) | Formula::Exists(..) | Formula::Forall(..) => {
                        write!(f, "({x})")?
                    }
                    _ => write!(f, "{x}")?,
                }
            }
            Ok(())
        };
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Div(m, t) => write!(f, "D{m}({t})"),
            Formula::InR(t) => write!(f, "R({t})"),
            Formula::IdxCmp(v, _, c, i) => {
                let op = match c {
                    Cmp::Lt => "<",
                    Cmp::Le => "<=",
                    Cmp::Gt => ">",
                    Cmp::Ge => ">=",
                    Cmp::IdxEq => "= #",
                    Cmp::IdxNe => "!= #",
                };
                if matches!(c, Cmp::IdxEq | Cmp::IdxNe) {
                    write!(f, "{v} {op}{i}")
                } else {
                    write!(f, "{v} {op} {i}")
                }
            }
            Formula::Sigma(d, args) => {
                write!(f, "{d}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Not(x) => match x.as_ref() {
                Formula::And(_) | Formula::Or(_) | Formula::Exists(..) | Formula::Forall(..) | Formula::Eq(..) => {
                    write!(f, "~({x})")
                }
                _ => write!(f, "~{x}"),
            },
            Formula::And(v) => join(f, v, "&"),
            Formula::Or(v) => join(f, v, "|"),
            Formula::Exists(b, body) | Formula::Forall(b, body) => {
                let q = if matches!(self, Formula::Exists(..)) { "E" } else { "A" };
                match b {
                    Binder::R(v) => write!(f, "{q} {v} in R. {body}"),
                    Binder::Int(v, bound) => write!(f, "{q} {v} <= {bound}. {body}"),
                }
            }
        }
    }
}
