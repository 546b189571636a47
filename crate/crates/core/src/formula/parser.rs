//! Infix grammar for sentences over the integers with a sequence predicate.
//!
//! ```text
//! formula := quant | disj
//! quant   := ("E" | "A") var "in" "R" "." formula
//!          | ("E" | "A") var "<=" INT "." formula
//! disj    := conj (("|" | "or") conj)*
//! conj    := unary (("&" | "and") unary)*
//! unary   := ("~" | "!" | "not") unary | "(" formula ")" | quant | atom
//! atom    := "true" | "false" | "D"INT "(" term ")" | "R" "(" term ")"
//!          | sigma "(" term ("," term)* ")"
//!          | var ("<" | "<=" | ">" | ">=") INT | var ("=" | "!=") "#" INT
//!          | term ("=" | "!=") term
//! sigma   := "Sigma" "{" ["C" "=" "[" div (";" div)* "]" ";"] "D" "=" "[" term (";" term)* "]" "}"
//! term    := ["-"] mono (("+" | "-") ["-"] mono)*
//! mono    := INT ["*" factor] | factor
//! factor  := INT | var | "S" "(" factor ")" | "f" "[" INT ("," INT)* "]" "(" factor ")" | "(" term ")"
//! ```
//!
//! Unicode forms `∃ ∀ ∈ ∧ ∨ ¬ ≠ ≤ ≥` are accepted as well.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Binder, Cmp, Formula, Pos, SigmaCond, SigmaDef, Term};
use crate::error::{Error, Result};

/// Largest accepted input, in bytes.
pub const MAX_INPUT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
    End,
}

struct Lexer {
    toks: Vec<(Tok, Pos)>,
}

const SYMS: &[&str] = &[
    "!=", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ";", ".", "=", "<", ">", "+", "-", "*", "&", "|", "~", "!", "#",
];

fn lex(src: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let adv = |n: usize, col: &mut usize, i: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut col, &mut i);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Int(s.parse().unwrap()), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Ident(s), pos));
            continue;
        }
        let uni = match c {
            '∃' => Some(Tok::Ident("E".into())),
            '∀' => Some(Tok::Ident("A".into())),
            '∈' => Some(Tok::Ident("in".into())),
            '∧' => Some(Tok::Sym("&")),
            '∨' => Some(Tok::Sym("|")),
            '¬' => Some(Tok::Sym("~")),
            '≠' => Some(Tok::Sym("!=")),
            '≤' => Some(Tok::Sym("<=")),
            '≥' => Some(Tok::Sym(">=")),
            _ => None,
        };
        if let Some(t) = uni {
            toks.push((t, pos));
            adv(1, &mut col, &mut i);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                toks.push((Tok::Sym(s), pos));
                adv(s.len(), &mut col, &mut i);
            }
            None => {
                return Err(Error::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    toks.push((Tok::End, Pos { line, column: col }));
    Ok(Lexer { toks })
}

const KEYWORDS: &[&str] = &["E", "A", "in", "R", "S", "f", "Sigma", "true", "false", "and", "or", "not"];

fn is_div_keyword(s: &str) -> Option<u64> {
    let digits = s.strip_prefix('D')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn is_var_name(s: &str) -> bool {
    !KEYWORDS.contains(&s) && is_div_keyword(s).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    R,
    Int,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scopes: Vec<(String, Sort)>,
    /// Free variables forced to be R-sorted by their use.
    free_r: HashMap<String, Pos>,
    free_int: HashMap<String, Pos>,
}

/// Parsed sentence or formula together with its free variables' sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub formula: Formula,
    pub free: BTreeMap<String, Sort>,
}

pub fn parse(src: &str) -> Result<Parsed> {
    if src.len() > MAX_INPUT {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: format!("input exceeds {MAX_INPUT} bytes"),
        });
    }
    let lx = lex(src)?;
    let mut p = Parser {
        toks: lx.toks,
        at: 0,
        scopes: Vec::new(),
        free_r: HashMap::new(),
        free_int: HashMap::new(),
    };
    let formula = p.formula()?;
    if p.peek() != &Tok::End {
        return p.err("unexpected trailing input");
    }
    let mut free = BTreeMap::new();
    for v in p.free_r.keys() {
        free.insert(v.clone(), Sort::R);
    }
    for v in p.free_int.keys() {
        free.entry(v.clone()).or_insert(Sort::Int);
    }
    Ok(Parsed { formula, free })
}

fn sort_err(pos: Pos, msg: &str) -> Error {
    Error::Sort(format!("line {}, column {}: {msg}", pos.line, pos.column))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        let p = self.pos();
        let found = match self.peek() {
            Tok::Int(i) => format!("{i}"),
            Tok::Ident(s) => s.clone(),
            Tok::Sym(s) => s.to_string(),
            Tok::End => "end of input".into(),
        };
        Err(Error::Syntax {
            line: p.line,
            column: p.column,
            message: format!("{msg} (found {found})"),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("expected {s:?}"))
        }
    }

    fn expect_ident(&mut self, s: &str) -> Result<()> {
        if self.is_ident(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("expected {s:?}"))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(i)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        if self.is_sym("-") {
            self.bump();
            Ok(-self.int()?)
        } else {
            self.int()
        }
    }

    fn var_name(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if is_var_name(&s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.err("expected a variable"),
        }
    }

    fn sort_of(&self, v: &str) -> Option<Sort> {
        self.scopes.iter().rev().find(|(n, _)| n == v).map(|(_, s)| *s)
    }

    /// Records that `v` must be R-sorted.
    fn need_r(&mut self, v: &str, pos: Pos) -> Result<()> {
        match self.sort_of(v) {
            Some(Sort::R) => Ok(()),
            Some(Sort::Int) => Err(sort_err(pos, &format!("{v} is an integer variable; S, operators and index comparisons need an R variable"))),
            None => {
                self.free_r.entry(v.to_string()).or_insert(pos);
                Ok(())
            }
        }
    }

    fn use_var(&mut self, v: &str, pos: Pos) {
        if self.sort_of(v).is_none() {
            self.free_int.entry(v.to_string()).or_insert(pos);
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.at_quant() {
            return self.quant();
        }
        let mut parts = vec![self.conj()?];
        while self.is_sym("|") || self.is_ident("or") {
            self.bump();
            parts.push(if self.at_quant() { self.quant()? } else { self.conj()? });
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.is_sym("&") || self.is_ident("and") {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn at_quant(&self) -> bool {
        (self.is_ident("E") || self.is_ident("A")) && matches!(self.peek_at(1), Tok::Ident(s) if is_var_name(s))
    }

    fn quant(&mut self) -> Result<Formula> {
        let exists = self.is_ident("E");
        self.bump();
        let (v, _) = self.var_name()?;
        let binder = if self.is_ident("in") {
            self.bump();
            self.expect_ident("R")?;
            Binder::R(v.clone())
        } else if self.is_sym("<=") {
            self.bump();
            Binder::Int(v.clone(), self.int()?)
        } else {
            return self.err("expected \"in R\" or \"<= bound\" after the quantified variable");
        };
        self.expect_sym(".")?;
        let sort = if matches!(binder, Binder::R(_)) { Sort::R } else { Sort::Int };
        self.scopes.push((v, sort));
        let body = self.formula();
        self.scopes.pop();
        let body = Box::new(body?);
        Ok(if exists { Formula::Exists(binder, body) } else { Formula::Forall(binder, body) })
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.is_sym("~") || self.is_sym("!") || self.is_ident("not") {
            self.bump();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.at_quant() {
            return self.quant();
        }
        if self.is_sym("(") {
            // Either a parenthesized formula or a term starting with "(".
            let save = self.at;
            let (fr, fl) = (self.free_r.clone(), self.free_int.clone());
            self.bump();
            if let Ok(f) = self.formula() {
                if self.is_sym(")") {
                    self.bump();
                    if !self.at_relation() {
                        return Ok(f);
                    }
                }
            }
            self.at = save;
            self.free_r = fr;
            self.free_int = fl;
        }
        self.atom()
    }

    fn at_relation(&self) -> bool {
        ["=", "!=", "<", "<=", ">", ">=", "+", "-", "*"].iter().any(|s| self.is_sym(s))
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) if is_div_keyword(&s).is_some() => {
                let pos = self.pos();
                let m = is_div_keyword(&s).unwrap();
                if m < 2 {
                    return Err(Error::Syntax {
                        line: pos.line,
                        column: pos.column,
                        message: format!("divisibility modulus must be at least 2, got {m}"),
                    });
                }
                self.bump();
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(Formula::Div(m, t))
            }
            Tok::Ident(s) if s == "R" && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(Formula::InR(t))
            }
            Tok::Ident(s) if s == "Sigma" => self.sigma(),
            Tok::Ident(s) if is_var_name(&s) && self.index_comparison_ahead() => {
                let (v, pos) = self.var_name()?;
                self.need_r(&v, pos)?;
                let cmp = match self.bump() {
                    Tok::Sym("<") => Cmp::Lt,
                    Tok::Sym("<=") => Cmp::Le,
                    Tok::Sym(">") => Cmp::Gt,
                    Tok::Sym(">=") => Cmp::Ge,
                    Tok::Sym("=") => Cmp::IdxEq,
                    Tok::Sym("!=") => Cmp::IdxNe,
                    _ => unreachable!(),
                };
                if matches!(cmp, Cmp::IdxEq | Cmp::IdxNe) {
                    self.expect_sym("#")?;
                }
                let i = self.int()?;
                let i = i.to_usize().ok_or_else(|| Error::Syntax {
                    line: pos.line,
                    column: pos.column,
                    message: "index too large".into(),
                })?;
                Ok(Formula::IdxCmp(v, pos, cmp, i))
            }
            _ => {
                let lhs = self.term()?;
                if self.is_sym("<") || self.is_sym(">") || self.is_sym("<=") || self.is_sym(">=") {
                    return self.err("order comparisons are only allowed between an R variable and a numeral");
                }
                let neg = if self.is_sym("=") {
                    false
                } else if self.is_sym("!=") {
                    true
                } else {
                    return self.err("expected \"=\" or \"!=\"");
                };
                self.bump();
                let rhs = self.term()?;
                let eq = Formula::Eq(lhs, rhs);
                Ok(if neg { Formula::Not(Box::new(eq)) } else { eq })
            }
        }
    }

    /// `x < 3`, `x >= 0`, `x = #2`: a variable, a comparison and a numeral
    /// (or `#`), followed by something that cannot continue a term.
    fn index_comparison_ahead(&self) -> bool {
        let cmp = self.peek_at(1);
        let order = matches!(cmp, Tok::Sym("<") | Tok::Sym("<=") | Tok::Sym(">") | Tok::Sym(">="));
        let idx = matches!(cmp, Tok::Sym("=") | Tok::Sym("!=")) && self.peek_at(2) == &Tok::Sym("#");
        order || idx
    }

    fn sigma(&mut self) -> Result<Formula> {
        self.expect_ident("Sigma")?;
        self.expect_sym("{")?;
        let mut vars: Vec<String> = Vec::new();
        let mut cond_terms: Vec<(u64, Term, Pos)> = Vec::new();
        // Internal variables are R-sorted and local to the predicate.
        let outer_free = (self.free_r.clone(), self.free_int.clone());
        let mut local = Vec::new();
        if self.is_ident("C") {
            self.bump();
            self.expect_sym("=")?;
            self.expect_sym("[")?;
            loop {
                let pos = self.pos();
                let f = self.atom_in_sigma(&mut local)?;
                match f {
                    Formula::Div(m, t) => cond_terms.push((m, t, pos)),
                    _ => {
                        return Err(Error::Syntax {
                            line: pos.line,
                            column: pos.column,
                            message: "Sigma conditions must be divisibility atoms".into(),
                        })
                    }
                }
                if self.is_sym(";") {
                    self.bump();
                    continue;
                }
                break;
            }
            self.expect_sym("]")?;
            self.expect_sym(";")?;
        }
        self.expect_ident("D")?;
        self.expect_sym("=")?;
        self.expect_sym("[")?;
        let mut row_terms = Vec::new();
        loop {
            let pos = self.pos();
            let t = self.with_locals(&mut local, |p| p.term())?;
            row_terms.push((t, pos));
            if self.is_sym(";") {
                self.bump();
                continue;
            }
            break;
        }
        self.expect_sym("]")?;
        self.expect_sym("}")?;
        self.free_r = outer_free.0;
        self.free_int = outer_free.1;
        for v in &local {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        let index = |v: &str| vars.iter().position(|x| x == v).unwrap();
        let mut rows = Vec::new();
        for (t, pos) in &row_terms {
            let lin = super::normalize::linearize_local(t).map_err(|m| sort_err(*pos, &m))?;
            if !lin.constant.is_zero() {
                return Err(sort_err(*pos, "Sigma rows must not contain constants"));
            }
            let mut row = vec![vec![BigInt::zero()]; vars.len()];
            for (v, op) in lin.r {
                row[index(&v)] = op;
            }
            rows.push(row);
        }
        let mut conds = Vec::new();
        for (m, t, pos) in &cond_terms {
            let lin = super::normalize::linearize_local(t).map_err(|e| sort_err(*pos, &e))?;
            if lin.r.len() != 1 {
                return Err(sort_err(*pos, "each Sigma condition must mention exactly one variable"));
            }
            let (v, op) = lin.r.into_iter().next().unwrap();
            conds.push(SigmaCond {
                var: index(&v),
                op,
                modulus: *m,
                k: lin.constant,
            });
        }
        self.expect_sym("(")?;
        let mut args = vec![self.term()?];
        while self.is_sym(",") {
            self.bump();
            args.push(self.term()?);
        }
        self.expect_sym(")")?;
        if args.len() != rows.len() {
            return self.err(&format!(
                "Sigma has {} rows but {} arguments",
                rows.len(),
                args.len()
            ));
        }
        Ok(Formula::Sigma(Arc::new(SigmaDef { vars, conds, rows }), args))
    }

    /// Parses with every unknown variable treated as a local R variable.
    fn with_locals<T>(&mut self, local: &mut Vec<String>, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let depth = self.scopes.len();
        for v in local.iter() {
            self.scopes.push((v.clone(), Sort::R));
        }
        let before: Vec<String> = self.free_r.keys().chain(self.free_int.keys()).cloned().collect();
        let out = f(self);
        self.scopes.truncate(depth);
        let mut fresh: Vec<String> = self
            .free_r
            .keys()
            .chain(self.free_int.keys())
            .filter(|v| !before.contains(v))
            .cloned()
            .collect();
        fresh.sort_by_key(|v| {
            self.free_r
                .get(v)
                .or_else(|| self.free_int.get(v))
                .map(|p| (p.line, p.column))
        });
        for v in fresh {
            self.free_r.remove(&v);
            self.free_int.remove(&v);
            if !local.contains(&v) {
                local.push(v);
            }
        }
        out
    }

    fn atom_in_sigma(&mut self, local: &mut Vec<String>) -> Result<Formula> {
        self.with_locals(local, |p| p.atom())
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.signed_mono()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                t = Term::Add(Box::new(t), Box::new(self.signed_mono()?));
            } else if self.is_sym("-") {
                self.bump();
                t = Term::difference(t, self.signed_mono()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn signed_mono(&mut self) -> Result<Term> {
        if self.is_sym("-") {
            self.bump();
            Ok(Term::Neg(Box::new(self.mono()?)))
        } else {
            self.mono()
        }
    }

    fn mono(&mut self) -> Result<Term> {
        if let Tok::Int(c) = self.peek().clone() {
            self.bump();
            if self.is_sym("*") {
                self.bump();
                let f = self.factor()?;
                return Ok(Term::Scale(c, Box::new(f)));
            }
            return Ok(Term::Const(c));
        }
        self.factor()
    }

    fn shift_target(&mut self) -> Result<Term> {
        let pos = self.pos();
        let t = self.factor()?;
        match t.shifted_var() {
            Some((v, vp, _)) => {
                let v = v.to_string();
                self.need_r(&v, vp)?;
                Ok(t)
            }
            None => Err(sort_err(pos, "S and operators apply only to R variables")),
        }
    }

    fn factor(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Int(c) => {
                self.bump();
                Ok(Term::Const(c))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) if s == "S" && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                self.bump();
                let t = self.shift_target()?;
                self.expect_sym(")")?;
                Ok(Term::Succ(Box::new(t)))
            }
            Tok::Ident(s) if s == "f" && self.peek_at(1) == &Tok::Sym("[") => {
                self.bump();
                self.bump();
                let mut c = vec![self.signed_int()?];
                while self.is_sym(",") {
                    self.bump();
                    c.push(self.signed_int()?);
                }
                self.expect_sym("]")?;
                self.expect_sym("(")?;
                let t = self.shift_target()?;
                self.expect_sym(")")?;
                if c.iter().all(|x| x.is_zero()) {
                    c = vec![BigInt::zero()];
                }
                Ok(Term::Op(c, Box::new(t)))
            }
            Tok::Ident(s) if is_var_name(&s) => {
                let (v, pos) = self.var_name()?;
                self.use_var(&v, pos);
                Ok(Term::Var(v, pos))
            }
            _ => self.err("expected a term"),
        }
    }
}
