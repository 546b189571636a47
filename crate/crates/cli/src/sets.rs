//! Command-line syntax for enumerable sets of naturals.

use std::path::Path;

use regseq_core::mann::MannMonoid;
use regseq_core::syndetic::EnumerableSet;

use crate::{load_handle, CliError};

fn nums(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u64>().map_err(|e| CliError::usage(format!("{t:?}: {e}"))))
        .collect()
}

/// `progression:A,D`, `explicit:1,5,9`, `monoid:2,3`, `seq:FILE` or `sums:FILE:K`.
pub fn parse_set(s: &str, scan: usize) -> Result<EnumerableSet, CliError> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("set {s:?}: expected KIND:ARGS")))?;
    match kind {
        "progression" => match nums(rest)?.as_slice() {
            [a, d] => Ok(EnumerableSet::Progression { a: *a, d: *d }),
            _ => Err(CliError::usage("progression takes A,D")),
        },
        "explicit" => {
            let mut v = nums(rest)?;
            v.sort_unstable();
            v.dedup();
            Ok(EnumerableSet::Explicit(v))
        }
        "monoid" => {
            let gens = rest
                .split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|e| CliError::usage(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(EnumerableSet::Monoid(MannMonoid::new(&gens)?))
        }
        "seq" => Ok(EnumerableSet::sums_of(load_handle(Path::new(rest), scan)?, 1)),
        "sums" => {
            let (file, k) = rest
                .rsplit_once(':')
                .ok_or_else(|| CliError::usage("sums takes FILE:K"))?;
            let k: usize = k.parse().map_err(|e| CliError::usage(format!("{k:?}: {e}")))?;
            if k == 0 {
                return Err(CliError::usage("sums needs K >= 1"));
            }
            Ok(EnumerableSet::sums_of(load_handle(Path::new(file), scan)?, k))
        }
        _ => Err(CliError::usage(format!("unknown set kind {kind:?}"))),
    }
}
