//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon when
//! the caller asks for it; without the feature everything runs on the
//! calling thread. Output order always matches input order, so results are
//! identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Inputs shorter than this always run sequentially; dispatch costs more
/// than it saves.
pub const MIN_ITEMS: usize = 16;

/// Whether this build can run the parallel path at all.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() >= MIN_ITEMS {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Order-preserving map over an index range.
pub fn map_range<R, F>(n: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && n >= MIN_ITEMS {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// In-place update of every element.
pub fn for_each_mut<T, F>(items: &mut [T], parallel: bool, f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() >= MIN_ITEMS {
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = parallel;
    items.iter_mut().for_each(f);
}

/// In-place update of every element together with its matching `aux` entry.
pub fn zip_for_each_mut<T, A, F>(items: &mut [T], aux: &[A], parallel: bool, f: F)
where
    T: Send,
    A: Sync,
    F: Fn(&mut T, &A) + Sync + Send,
{
    assert_eq!(items.len(), aux.len());
    #[cfg(feature = "parallel")]
    if parallel && items.len() >= MIN_ITEMS {
        items
            .par_iter_mut()
            .zip(aux.par_iter())
            .for_each(|(t, a)| f(t, a));
        return;
    }
    let _ = parallel;
    items.iter_mut().zip(aux).for_each(|(t, a)| f(t, a));
}

/// Build a dedicated pool with `threads` workers and run `op` inside it.
/// Falls back to a direct call when the feature is off or `threads` is 0.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(op);
        }
    }
    let _ = threads;
    op()
}

#[cfg(test)]
mod tests {
    #[test]
    fn both_paths_agree() {
        let v: Vec<u64> = (0..1000).collect();
        let a = super::map(&v, false, |x| x * x);
        let b = super::map(&v, true, |x| x * x);
        assert_eq!(a, b);
        let c = super::map_range(1000, true, |i| (i as u64) * (i as u64));
        assert_eq!(a, c);
    }
}
