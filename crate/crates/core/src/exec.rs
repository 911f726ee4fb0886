//! Work splitting for the data-parallel parts of the pipeline.
//!
//! With the `parallel` feature, `jobs > 1` runs on a dedicated rayon pool.
//! `jobs == 1`, or a build without the feature, runs everything on the
//! calling thread. Results are collected in input order either way, so the
//! output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    jobs: usize,
}

impl Default for Execution {
    fn default() -> Self {
        Self::available()
    }
}

impl Execution {
    pub fn sequential() -> Self {
        Self { jobs: 1 }
    }

    /// Zero is treated as one.
    pub fn with_jobs(jobs: usize) -> Self {
        Self { jobs: jobs.max(1) }
    }

    pub fn available() -> Self {
        Self::with_jobs(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && self.jobs > 1
    }

    /// Runs `f` with a pool of `jobs` threads installed as the current pool.
    pub fn run<R, F>(&self, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            match rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
                Ok(pool) => return pool.install(f),
                // Fall back to the global pool if threads cannot be spawned.
                Err(_) => return f(),
            }
        }
        f()
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        for exec in [Execution::sequential(), Execution::with_jobs(4)] {
            let out = exec.run(|| exec.map(&items, |x| x * 3));
            assert_eq!(out, items.iter().map(|x| x * 3).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zero_jobs_means_one() {
        assert_eq!(Execution::with_jobs(0).jobs(), 1);
        assert!(!Execution::with_jobs(0).is_parallel());
    }
}
