//! Execution strategy for the data-parallel inner loops.
//!
//! Every hot loop (brute-force enumeration, partition casework, exhaustive
//! scans) goes through [`map_collect`] so the same code path can run on the
//! rayon pool or sequentially. Without the `parallel` feature the parallel
//! strategy silently degrades to the sequential one.

/// How to run a batch of independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// The strategy actually used, after accounting for compiled features.
    pub fn effective(self) -> Exec {
        if cfg!(feature = "parallel") {
            self
        } else {
            Exec::Sequential
        }
    }
}

/// Maps `f` over `items` and returns results in input order.
pub fn map_collect<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec.effective() {
        Exec::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Exec::Parallel => unreachable!(),
    }
}

/// Like [`map_collect`] over a half-open range of indices.
pub fn map_range<R, F>(exec: Exec, range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec.effective() {
        Exec::Sequential => range.map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Exec::Parallel => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_preserve_order() {
        let seq = map_range(Exec::Sequential, 0..100, |i| i * i);
        let par = map_range(Exec::Parallel, 0..100, |i| i * i);
        assert_eq!(seq, par);
        let v = map_collect(Exec::Parallel, vec![3, 1, 2], |x| x + 1);
        assert_eq!(v, vec![4, 2, 3]);
    }
}
