//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! independent index ranges out over the rayon pool. Without the feature it
//! degrades to the sequential path. Every closure handed to these helpers
//! computes one output slot from shared read-only data, so the result is
//! identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run things in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fills `out` in chunks of `width` values; `f(i, chunk)` writes slot `i`.
    pub fn fill_chunks<F>(self, out: &mut [f64], width: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        assert!(width > 0 && out.len().is_multiple_of(width));
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => out
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, chunk)| f(i, chunk)),
            _ => out
                .chunks_mut(width)
                .enumerate()
                .for_each(|(i, chunk)| f(i, chunk)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(Execution::Sequential.map(1000, f), Execution::Parallel.map(1000, f));

        let mut a = vec![0.0; 300];
        let mut b = vec![0.0; 300];
        let g = |i: usize, c: &mut [f64]| {
            c[0] = i as f64;
            c[1] = -(i as f64);
            c[2] = 0.5;
        };
        Execution::Sequential.fill_chunks(&mut a, 3, g);
        Execution::Parallel.fill_chunks(&mut b, 3, g);
        assert_eq!(a, b);
    }
}
