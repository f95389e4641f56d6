//! Execution policy for the data-parallel loops in this crate.
//!
//! Every parallel loop is written so that its result does not depend on
//! scheduling: work items carry their own seeds and reductions are merged in
//! index order. [`Exec::Sequential`] and [`Exec::Parallel`] therefore return
//! bit-identical results; only wall-clock time differs.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential execution when the `parallel` feature is off.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maps `f` over an index range, preserving order.
    pub fn map_range<R, F>(self, range: Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Splits `0..total` into at most `parts` contiguous chunks of near-equal size.
pub(crate) fn chunks(total: u64, parts: u64) -> Vec<Range<u64>> {
    let parts = parts.clamp(1, total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = 0;
    for i in 0..parts {
        let len = base + u64::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Number of work chunks to split an enumeration into.
pub(crate) fn chunk_count(exec: Exec) -> u64 {
    if exec.is_parallel() {
        256
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        for total in [0u64, 1, 7, 64, 1000] {
            for parts in [1u64, 3, 8, 2000] {
                let cs = chunks(total, parts);
                let mut next = 0;
                for c in &cs {
                    assert_eq!(c.start, next);
                    next = c.end;
                }
                assert_eq!(next, total);
            }
        }
    }

    #[test]
    fn map_preserves_order_under_both_policies() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = Exec::Sequential.map(&items, |x| x * 3);
        let par = Exec::Parallel.map(&items, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(
            Exec::Sequential.map_range(0..50, |i| i * i),
            Exec::Parallel.map_range(0..50, |i| i * i)
        );
    }
}
