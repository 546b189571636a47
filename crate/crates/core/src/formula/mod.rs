//! First-order sentences over the integers with a predicate for R.

pub mod ast;
pub mod decide;
pub mod normalize;
pub mod parser;

pub use ast::{Binder, Cmp, Formula, SigmaDef, Term};
pub use decide::{check_sigma_witness, check_witness, decide, decide_str, DecideBudget, Verdict};
pub use normalize::{normalize, Atom, Lin, Nnf};
pub use parser::{parse, Parsed, Sort};
