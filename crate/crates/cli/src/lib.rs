//! Scenario files, experiment runners and result output for `emskin`.

pub mod bundle;
pub mod config;
pub mod emit;
pub mod error;
pub mod run;

pub use bundle::{ResultBundle, Table};
pub use config::{load_config, ScenarioConfig};
pub use emit::{emit, Format};
pub use error::CliError;
pub use run::{run_analyze, run_regions, run_sweep, run_synthesize};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
