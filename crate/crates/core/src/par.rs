//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over rayon's pool; without it the same closures run in order on the
//! calling thread. Results are always returned in index order, so output
//! never depends on scheduling.

use std::ops::Range;

/// Splits `0..total` into consecutive ranges of `chunk` elements.
pub fn chunk_ranges(total: u64, chunk: u64) -> Vec<Range<u64>> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk)).map(|i| i * chunk..((i + 1) * chunk).min(total)).collect()
}

pub fn map_chunks_sequential<T, F>(total: u64, chunk: u64, f: F) -> Vec<T>
where
    F: Fn(Range<u64>) -> T,
{
    chunk_ranges(total, chunk).into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_chunks_parallel<T, F>(total: u64, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    chunk_ranges(total, chunk).into_par_iter().map(f).collect()
}

/// Applies `f` to each chunk of `0..total`, in parallel when enabled.
pub fn map_chunks<T, F>(total: u64, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_chunks_parallel(total, chunk, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_chunks_sequential(total, chunk, f)
    }
}

/// `f(0), f(1), …, f(count-1)`, in parallel when enabled.
pub fn map_indices<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_everything_once() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }

    #[test]
    fn order_is_preserved() {
        let seq = map_chunks_sequential(1000, 7, |r| r.sum::<u64>());
        let any = map_chunks(1000, 7, |r| r.sum::<u64>());
        assert_eq!(seq, any);
        assert_eq!(map_indices(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
