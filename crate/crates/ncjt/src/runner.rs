//! Parallel Monte Carlo driver.
//!
//! Trials are cut into fixed chunks that are simulated on a rayon pool and
//! reassembled in index order. Because every trial draws from its own
//! stream, the output does not depend on the number of workers.

use std::ops::Range;

use ncjt_core::mc_sim::{self, SampleSet, SimWindow, TrialSample};
use ncjt_core::Scenario;
use rayon::prelude::*;

pub const CHUNK: u64 = 4096;

/// Worker count: `NCJT_THREADS` if set to a positive integer, else rayon's
/// default.
pub fn worker_count() -> usize {
    std::env::var("NCJT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn chunks(trials: u64) -> Vec<Range<u64>> {
    (0..trials.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials))
        .collect()
}

/// Simulate `trials` trials and map each through `f`, in index order.
pub fn simulate_map<T, F>(
    scn: &Scenario,
    trials: u64,
    seed: u64,
    window: &SimWindow,
    threads: usize,
    f: F,
) -> ncjt_core::Result<Vec<T>>
where
    T: Send,
    F: Fn(&TrialSample) -> T + Sync,
{
    if trials == 0 {
        return Err(ncjt_core::Error::Simulation("need at least one trial"));
    }
    // Validate once up front so the workers cannot fail.
    mc_sim::run_range(scn, window, seed, 0..0)?;
    let work = || {
        chunks(trials)
            .into_par_iter()
            .map(|r| {
                r.map(|i| f(&mc_sim::simulate_trial(scn, window, seed, i)))
                    .collect::<Vec<T>>()
            })
            .collect::<Vec<Vec<T>>>()
    };
    let parts = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|_| ncjt_core::Error::Simulation("cannot start worker pool"))?
        .install(work);
    Ok(parts.into_iter().flatten().collect())
}

/// Full sample set, computed with [`worker_count`] workers.
pub fn simulate(
    scn: &Scenario,
    trials: u64,
    seed: u64,
    window: SimWindow,
) -> ncjt_core::Result<SampleSet> {
    simulate_with_threads(scn, trials, seed, window, worker_count())
}

pub fn simulate_with_threads(
    scn: &Scenario,
    trials: u64,
    seed: u64,
    window: SimWindow,
    threads: usize,
) -> ncjt_core::Result<SampleSet> {
    let samples = simulate_map(scn, trials, seed, &window, threads, |t| *t)?;
    Ok(SampleSet {
        trials: samples,
        seed,
        scenario_hash: scn.hash(),
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ncjt_core::FadingModel;

    fn scn() -> Scenario {
        Scenario::new(14e-6, 4.0, 300.0, 1.0, 1e16, FadingModel::Exponential)
    }

    #[test]
    fn chunking_covers_range() {
        let c = chunks(2 * CHUNK + 5);
        assert_eq!(c.len(), 3);
        assert_eq!(c[2], 2 * CHUNK..2 * CHUNK + 5);
        assert!(chunks(CHUNK).len() == 1);
    }

    #[test]
    fn parallel_matches_serial() {
        let s = scn();
        let w = mc_sim::default_window(&s).unwrap();
        let n = CHUNK + 17;
        let serial = mc_sim::run(&s, n, 4, w).unwrap();
        let par = simulate_with_threads(&s, n, 4, w, 3).unwrap();
        assert_eq!(serial, par);
    }
}
