//! Independent chains on separate threads.
//!
//! Each chain owns its state and its random stream, so running chains
//! concurrently yields exactly the draws a serial run would.

use std::thread;

use factorgibbs_core::study::Arms;
use factorgibbs_core::{run_chain, ChainAborted, ChainState, Dataset, DrawStore, GibbsConfig};

pub type ChainOutcome = Result<DrawStore, ChainAborted>;

/// Runs each `(data, config, init)` job on its own thread and returns the
/// outcomes in job order.
pub fn run_chains(jobs: Vec<(&Dataset, GibbsConfig, ChainState)>) -> Vec<ChainOutcome> {
    thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(y, cfg, init)| s.spawn(move || run_chain(y, &cfg, init)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

/// Runs the `Y` and `Y^pi` arms concurrently.
pub fn run_arms(arms: &Arms) -> (ChainOutcome, ChainOutcome) {
    let mut out = run_chains(vec![
        (&arms.y, arms.config_y, arms.init_y.clone()),
        (&arms.ypi, arms.config_ypi, arms.init_ypi.clone()),
    ]);
    let b = out.pop().expect("two outcomes");
    let a = out.pop().expect("two outcomes");
    (a, b)
}
