//! Order-preserving data parallelism with a sequential fallback.
//!
//! With the `parallel` feature the maps below run on the rayon pool. The
//! output order always equals the index order, and no floating-point
//! reduction is ever performed in parallel, so results are bit-identical for
//! any number of workers. [`sequential`] forces in-thread execution for the
//! duration of a closure, which is what the benchmarks compare against.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with every parallel map on this thread executed sequentially.
pub fn sequential<T>(f: impl FnOnce() -> T) -> T {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

pub fn is_sequential() -> bool {
    !cfg!(feature = "parallel") || FORCE_SEQUENTIAL.with(|c| c.get())
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !is_sequential() && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !is_sequential() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, x)| *x == 2 * i));
        let w = sequential(|| map_slice(&v, |x| x + 1));
        assert_eq!(w[10], 21);
    }

    #[test]
    fn sequential_flag_is_scoped() {
        assert!(sequential(is_sequential));
        if cfg!(feature = "parallel") {
            assert!(!is_sequential());
        }
    }
}
