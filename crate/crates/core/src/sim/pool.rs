use rayon::prelude::*;

/// Worker count from `NAKLAB_THREADS`, or rayon's default.
pub fn threads() -> usize {
    std::env::var("NAKLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

const CHUNK: u64 = 4096;

/// Runs `trial(i)` for every `i < trials` and folds the outputs into `init`
/// with `merge`. `merge` must be commutative and associative on the fold state
/// (integer counts), which makes the result independent of scheduling.
pub fn run_trials<S, F, M>(trials: u64, init: S, trial: F, merge: M) -> S
where
    S: Clone + Send + Sync,
    F: Fn(u64, &mut S) + Sync,
    M: Fn(S, S) -> S + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut s = init.clone();
                for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    trial(i, &mut s);
                }
                s
            })
            .reduce(|| init.clone(), &merge)
    };
    match rayon::ThreadPoolBuilder::new().num_threads(threads()).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}
