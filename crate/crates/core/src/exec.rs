//! Sequential or rayon-backed evaluation of independent work items.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items (sweep runs, metric samples) are evaluated.
///
/// Results are always returned in input order, so the choice never changes
/// any output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Run on a rayon pool. `jobs = None` uses the global pool; `Some(n)`
    /// builds a dedicated pool with `n` threads.
    #[cfg(feature = "parallel")]
    Parallel { jobs: Option<usize> },
    /// `Parallel { jobs: None }` when compiled with `parallel`, otherwise
    /// `Sequential`.
    #[default]
    Auto,
}

impl Execution {
    /// Execution mode for a `--jobs N` style bound. `1` is sequential.
    pub fn with_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(0) | Some(1) => Execution::Sequential,
            #[cfg(feature = "parallel")]
            other => Execution::Parallel { jobs: other },
            #[cfg(not(feature = "parallel"))]
            _ => Execution::Sequential,
        }
    }

    pub fn is_parallel(self) -> bool {
        match self {
            Execution::Sequential => false,
            #[cfg(feature = "parallel")]
            Execution::Parallel { .. } => true,
            Execution::Auto => cfg!(feature = "parallel"),
        }
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { jobs: None } | Execution::Auto => {
                items.par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Parallel { jobs: Some(n) } => {
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(_) => items.iter().map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Auto => items.iter().map(f).collect(),
        }
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        let idx: Vec<usize> = (0..n).collect();
        self.map(&idx, |&i| f(i))
    }
}
