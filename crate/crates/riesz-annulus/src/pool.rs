//! Internal rayon pool honoring the RIESZ_ANNULUS_THREADS cap.

use std::sync::OnceLock;

static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();

fn pool() -> &'static Option<rayon::ThreadPool> {
    POOL.get_or_init(|| {
        let cap = std::env::var("RIESZ_ANNULUS_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        cap.map(|n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("building the capped thread pool")
        })
    })
}

/// Run `f` inside the capped pool when the env var is set, otherwise in the
/// default rayon pool.
pub(crate) fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(f),
        None => f(),
    }
}
