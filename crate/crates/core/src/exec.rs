//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the [`Execution::Parallel`] mode runs on the
//! rayon global pool. Without it every mode runs sequentially. Results are
//! always returned in index order, so reductions performed by the caller over
//! the returned vector are independent of the mode.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(i)` for `i in 0..n` and collects the results in order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

/// Applies `f` to consecutive chunks of `out`; `f` receives the chunk and the
/// index of its first element.
pub fn for_each_chunk_mut<T, F>(exec: Execution, out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T], usize) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(c, part)| f(part, c * chunk));
        return;
    }
    let _ = exec;
    for (c, part) in out.chunks_mut(chunk).enumerate() {
        f(part, c * chunk);
    }
}

/// Runs `f` inside a pool with `threads` workers when parallelism is
/// available; otherwise calls it directly.
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: Option<usize>, f: F) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}
