//! Config-driven runner behind the `lfwave` binary.

pub mod config;
pub mod error;
pub mod inspect;
pub mod runner;
pub mod schema;

pub use error::{ErrorCode, RunError, RunResult};

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "LFWAVE_WORKERS";

/// Run `f` on a dedicated pool of `workers` threads; 0 uses rayon's default size.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> RunResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::new(ErrorCode::InvalidArgument, None, format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}
