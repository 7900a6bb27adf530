//! Data-parallel dispatch with a sequential fallback.
//!
//! Every sweep in this crate is embarrassingly parallel over immutable
//! inputs. With the `parallel` feature (default) the helpers fan out over
//! rayon; without it, or when callers pass `parallel = false`, they run
//! sequentially. Results are index-ordered either way, so output never
//! depends on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T: Sync, U: Send>(
    parallel: bool,
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// True iff `f` holds for every item. Short-circuits in both modes.
pub fn all<T: Sync>(parallel: bool, items: &[T], f: impl Fn(&T) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().all(f);
        }
    }
    let _ = parallel;
    items.iter().all(f)
}

/// Minimum of `f` over `items` by the produced key; deterministic because
/// the key ordering is total.
pub fn min_map<T: Sync, U: Send + Ord>(
    parallel: bool,
    items: &[T],
    f: impl Fn(&T) -> Option<U> + Sync + Send,
) -> Option<U> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().filter_map(f).min();
        }
    }
    let _ = parallel;
    items.iter().filter_map(f).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u32> = (0..100).collect();
        assert_eq!(map(true, &xs, |&x| x * 2), map(false, &xs, |&x| x * 2));
    }

    #[test]
    fn min_is_deterministic() {
        let xs: Vec<i32> = (0..1000).collect();
        let f = |&x: &i32| if x % 7 == 3 { Some((x, x * x)) } else { None };
        assert_eq!(min_map(true, &xs, f), min_map(false, &xs, f));
    }
}
