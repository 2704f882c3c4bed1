#![allow(dead_code)]

use postrisk_core::exec::Executor;

/// Splits the items over scoped OS threads.
pub struct Threads(pub usize);

impl Executor for Threads {
    fn for_each_mut<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        let chunk = items.len().div_ceil(self.0.max(1)).max(1);
        let f = &f;
        std::thread::scope(|s| {
            for (c, part) in items.chunks_mut(chunk).enumerate() {
                s.spawn(move || {
                    for (i, item) in part.iter_mut().enumerate() {
                        f(c * chunk + i, item);
                    }
                });
            }
        });
    }
}
