//! Data-parallel map/reduce over chunk indices with a sequential fallback.
//!
//! Every caller reduces with an associative, commutative operation on
//! integers (counters, histograms), so the result never depends on how the
//! chunks were scheduled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's current thread pool. Without the `parallel` feature this
    /// runs sequentially.
    #[default]
    Parallel,
}

impl Execution {
    pub fn map_reduce<T, M, I, R>(self, chunks: usize, map: M, identity: I, reduce: R) -> T
    where
        T: Send,
        M: Fn(usize) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..chunks).into_par_iter().map(map).reduce(identity, reduce),
            _ => (0..chunks).map(map).fold(identity(), reduce),
        }
    }

    /// Like [`map_reduce`](Self::map_reduce) for fallible chunks; the first
    /// error in chunk order is not guaranteed, only that some error wins.
    pub fn try_map_reduce<T, E, M, I, R>(
        self,
        chunks: usize,
        map: M,
        identity: I,
        reduce: R,
    ) -> Result<T, E>
    where
        T: Send,
        E: Send,
        M: Fn(usize) -> Result<T, E> + Sync + Send,
        I: Fn() -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        self.map_reduce(
            chunks,
            map,
            || Ok(identity()),
            |a, b| match (a, b) {
                (Ok(a), Ok(b)) => Ok(reduce(a, b)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        )
    }
}

/// Element-wise sum of two count vectors of equal length.
pub(crate) fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.is_empty() {
        return b;
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let f = |i: usize| vec![i as u64, (i * i) as u64];
        let par = Execution::Parallel.map_reduce(1000, f, Vec::new, add_counts);
        let seq = Execution::Sequential.map_reduce(1000, f, Vec::new, add_counts);
        assert_eq!(par, seq);
        assert_eq!(seq[0], 999 * 1000 / 2);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<u64, &str> = Execution::Parallel.try_map_reduce(
            10,
            |i| if i == 7 { Err("boom") } else { Ok(1) },
            || 0,
            |a, b| a + b,
        );
        assert_eq!(r, Err("boom"));
    }
}
