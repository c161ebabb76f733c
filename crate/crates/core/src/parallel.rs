use std::sync::OnceLock;

/// Caps the worker threads used for candidate and shard evaluation.
pub const THREADS_ENV: &str = "PANDORA_EQ_THREADS";

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()?
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .ok()
    })
    .as_ref()
}

/// Runs `f` on the capped pool when the env var is set, otherwise on the
/// global rayon pool. Results never depend on the thread count.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}
