//! Order-preserving parallel map over independent work items.

use std::num::NonZeroUsize;
use std::thread;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "MKV_THREADS";

/// Worker count: `MKV_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1))
}

/// `items.iter().map(f)` with the work split into contiguous chunks across
/// threads. The output order, and therefore any reduction done over it, does
/// not depend on the thread count.
pub fn par_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync>(items: &[T], f: F) -> Vec<R> {
    let workers = worker_count().min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Like [`par_map`] for fallible work; returns the first error in item order.
pub fn try_par_map<T: Sync, R: Send, E: Send, F: Fn(&T) -> Result<R, E> + Sync>(items: &[T], f: F) -> Result<Vec<R>, E> {
    par_map(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_item_order() {
        let xs: Vec<u64> = (0..103).collect();
        assert_eq!(par_map(&xs, |x| x * x), xs.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(try_par_map(&xs, |&x| if x == 50 { Err(x) } else { Ok(x) }).is_err());
    }
}
