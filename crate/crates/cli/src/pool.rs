use postrisk_core::exec::Executor;
use rayon::prelude::*;

/// Rayon-backed executor; one thread runs inline.
pub struct Pool {
    pool: Option<rayon::ThreadPool>,
}

impl Pool {
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = if threads > 1 {
            Some(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
        } else {
            None
        };
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }
}

impl Executor for Pool {
    fn for_each_mut<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match &self.pool {
            None => items.iter_mut().enumerate().for_each(|(i, x)| f(i, x)),
            Some(p) => p.install(|| items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x))),
        }
    }
}
