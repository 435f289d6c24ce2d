//! Order-preserving trial executor.
//!
//! With the `parallel` feature the trials of a batch are spread over a
//! dedicated rayon pool; without it (or with one worker) they run in a plain
//! loop. Outputs come back in index order either way, so callers that reduce
//! them sequentially get identical results for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Executor {
    /// `workers = 0` picks the available parallelism.
    pub fn new(workers: usize) -> Self {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        #[cfg(feature = "parallel")]
        {
            let pool = if workers > 1 {
                match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    Ok(p) => Some(p),
                    Err(e) => {
                        log::warn!("could not build a {workers}-thread pool ({e}); running sequentially");
                        None
                    }
                }
            } else {
                None
            };
            Self { workers, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            if workers > 1 {
                log::debug!("built without the `parallel` feature; {workers} workers requested, running sequentially");
            }
            Self { workers }
        }
    }

    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// `[f(0), f(1), …, f(n-1)]`.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
        (0..n).map(f).collect()
    }

    /// Like [`map`](Self::map) but stops at the lowest-index error.
    pub fn try_map<T, E, F>(&self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for w in [1, 3] {
            let ex = Executor::new(w);
            let v = ex.map(100, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn try_map_reports_first_error() {
        let ex = Executor::new(2);
        let r: Result<Vec<usize>, usize> = ex.try_map(10, |i| if i >= 4 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(4));
    }
}
