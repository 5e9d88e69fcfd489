//! Execution mode for data-parallel loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] maps over
//! rayon's global pool; without it every call runs sequentially. Results are
//! always returned in input order, so reductions performed afterwards are
//! bit-identical between the two modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this mode actually fans out on the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

/// Maximum of a slice of residuals; NaN propagates.
pub(crate) fn max_residual(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, &v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Exec::Sequential.map(&xs, |x| x * x);
        let b = Exec::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(Exec::Parallel.map_range(5, |i| i), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn max_residual_propagates_nan() {
        assert_eq!(max_residual(&[]), 0.0);
        assert_eq!(max_residual(&[1.0, 3.0, 2.0]), 3.0);
        assert!(max_residual(&[1.0, f64::NAN]).is_nan());
    }
}
