//! Data-parallel map helpers. With the `parallel` feature (default) the
//! work runs on rayon; otherwise it runs sequentially. Output order is
//! the input order either way, so reductions stay reproducible.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Cap the worker count for the process. Returns an error if a pool is
/// already running with a different size; without the `parallel`
/// feature this is a no-op.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<(), String> {
    Ok(())
}

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential reference implementation, kept unconditionally for the
/// benchmark suite comparing both paths.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let f = |x: &f64| (x.sin() * x.cosh()).abs().sqrt();
        assert_eq!(map(&xs, f), map_seq(&xs, f));
    }
}
