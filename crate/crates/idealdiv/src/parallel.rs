//! Data-parallel helpers with a sequential fallback.
//!
//! Everything routed through here yields output identical to the sequential
//! path: work is mapped over an index range and collected in index order, so
//! thread scheduling never changes a result.  Build with
//! `--no-default-features` to drop the rayon dependency entirely.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(len, f)
}

/// Single-threaded twin of `map_indexed`; the benchmark suite compares the
/// two directly.
pub fn map_indexed_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Apply `f` to every slot of `items`, in parallel when enabled and asked
/// for.  Each slot is touched exactly once and slots never interact, so the
/// result does not depend on scheduling.
pub fn for_each_mut<T, F>(par: bool, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
        return;
    }
    let _ = par;
    for (i, t) in items.iter_mut().enumerate() {
        f(i, t);
    }
}
