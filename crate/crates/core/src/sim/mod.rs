//! Seeded continuous-time Monte-Carlo of the mining race.
//!
//! Trials only count arrivals: the attacks analysed here reduce to races
//! between the adversary's private chain and the pacers of the honest chain,
//! so no block tree is kept except in [`sim_lemma_instrumentation`].

pub mod pool;
pub mod rng;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MiningParams;
use crate::stats::{wilson, Z95};
use pool::run_trials;
use rng::{tag, StreamFactory, RNG_CONTRACT};

pub const DEFAULT_STOP_MARGIN: u64 = 60;
/// Default warmup, in mean block intervals 1/(a+h).
pub const DEFAULT_WARMUP_BLOCKS: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeadDist {
    /// Run the private-mining lead dynamics for `warmup` seconds.
    #[default]
    Warmup,
    /// Draw from the geometric law (1 − a/h)(a/h)^i.
    Geometric,
    /// No pre-mining lead.
    Zero,
}

impl std::str::FromStr for LeadDist {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "warmup" => Ok(Self::Warmup),
            "geometric" => Ok(Self::Geometric),
            "zero" => Ok(Self::Zero),
            _ => Err(format!("unknown lead distribution '{s}' (warmup|geometric|zero)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: MiningParams,
    pub trials: u64,
    /// Simulated seconds after the confirmation threshold.
    pub horizon: f64,
    /// Seconds of lead dynamics before the attack starts.
    pub warmup: f64,
    pub seed: u64,
    pub stop_margin: u64,
    pub lead: LeadDist,
}

impl SimConfig {
    pub fn new(params: MiningParams, trials: u64, seed: u64) -> Self {
        let block = 1.0 / (params.a + params.h);
        Self {
            params,
            trials,
            horizon: 1e4 * block,
            warmup: DEFAULT_WARMUP_BLOCKS * block,
            seed,
            stop_margin: DEFAULT_STOP_MARGIN,
            lead: LeadDist::Warmup,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be >= 1".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Parameter("horizon must be positive".into()));
        }
        if !(self.warmup >= 0.0) {
            return Err(Error::Parameter("warmup must be >= 0".into()));
        }
        if self.lead == LeadDist::Geometric && self.params.a >= self.params.h {
            return Err(Error::Domain("geometric lead needs a < h".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub latency: f64,
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    /// Trials still undecided at the horizon; counted as failures.
    pub truncated_trials: u64,
    pub seed: u64,
    pub horizon: f64,
    pub rng: String,
}

impl SimEstimate {
    fn new(latency: f64, successes: u64, truncated: u64, cfg: &SimConfig) -> Self {
        Self {
            latency,
            successes,
            trials: cfg.trials,
            p_hat: successes as f64 / cfg.trials as f64,
            ci95: wilson(successes, cfg.trials, Z95),
            truncated_trials: truncated,
            seed: cfg.seed,
            horizon: cfg.horizon,
            rng: RNG_CONTRACT.to_string(),
        }
    }

    pub fn std_err(&self) -> f64 {
        crate::stats::std_err(self.p_hat, self.trials)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub trials: u64,
    pub truncated_trials: u64,
    pub seed: u64,
}

impl Histogram {
    pub fn pmf(&self, i: usize) -> f64 {
        self.counts.get(i).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Empirical P(X > i).
    pub fn ccdf(&self, i: usize) -> f64 {
        let above: u64 = self.counts.iter().skip(i + 1).sum();
        above as f64 / self.trials as f64
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
        s / self.trials as f64
    }
}

#[derive(Clone, Default)]
struct Tally {
    counts: Vec<u64>,
    truncated: u64,
}

impl Tally {
    fn bump(&mut self, i: usize) {
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
    }
}

fn merge(mut a: Tally, b: Tally) -> Tally {
    if a.counts.len() < b.counts.len() {
        a.counts.resize(b.counts.len(), 0);
    }
    for (x, y) in a.counts.iter_mut().zip(&b.counts) {
        *x += y;
    }
    a.truncated += b.truncated;
    a
}

/// Inter-arrival sampler; a zero rate never fires.
#[derive(Clone, Copy)]
struct Clock(Option<Exp<f64>>);

impl Clock {
    fn new(rate: f64) -> Self {
        Self(if rate > 0.0 { Exp::new(rate).ok() } else { None })
    }

    fn next(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.0 {
            Some(e) => e.sample(rng),
            None => f64::INFINITY,
        }
    }
}

/// Pacer mining times: the first after Exp(h), then Δ + Exp(h) apart.
struct Pacers {
    clock: Clock,
    delta: f64,
    next: f64,
}

impl Pacers {
    fn new(p: &MiningParams, rng: &mut ChaCha8Rng, first_delayed: bool) -> Self {
        let clock = Clock::new(p.h);
        let lag = if first_delayed { p.delta } else { 0.0 };
        let next = lag + clock.next(rng);
        Self { clock, delta: p.delta, next }
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng) {
        self.next += self.delta + self.clock.next(rng);
    }
}

/// Private-mining lead after `duration` seconds: +1 per A-block, −1 per pacer, floored at 0.
fn lead_walk(p: &MiningParams, duration: f64, rng: &mut ChaCha8Rng) -> u64 {
    let a_clock = Clock::new(p.a);
    let mut t_a = a_clock.next(rng);
    let mut pacers = Pacers::new(p, rng, false);
    let mut lead: u64 = 0;
    loop {
        if t_a.min(pacers.next) > duration {
            return lead;
        }
        if t_a < pacers.next {
            lead += 1;
            t_a += a_clock.next(rng);
        } else {
            lead = lead.saturating_sub(1);
            pacers.advance(rng);
        }
    }
}

fn sample_lead(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> u64 {
    let p = &cfg.params;
    match cfg.lead {
        LeadDist::Zero => 0,
        LeadDist::Geometric => {
            if p.a == 0.0 {
                return 0;
            }
            Geometric::new(1.0 - p.a / p.h).map(|g| g.sample(rng)).unwrap_or(0)
        }
        LeadDist::Warmup => lead_walk(p, cfg.warmup, rng),
    }
}

/// Empirical pmf of M = sup_t {A_t − Q_t}, Q a renewal process with inter-arrival Δ + Exp(h).
pub fn sim_max_diff(cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate()?;
    cfg.params.require_tolerance()?;
    let p = cfg.params;
    let streams = StreamFactory::new(cfg.seed, tag::MAX_DIFF);
    let margin = cfg.stop_margin as i64;
    let tally = run_trials(
        cfg.trials,
        Tally::default(),
        |i, s| {
            let mut rng = streams.trial(i);
            let a_clock = Clock::new(p.a);
            let mut t_a = a_clock.next(&mut rng);
            let mut q = Pacers::new(&p, &mut rng, true);
            let (mut diff, mut best) = (0i64, 0i64);
            loop {
                if t_a.min(q.next) > cfg.horizon {
                    s.truncated += 1;
                    break;
                }
                if t_a < q.next {
                    diff += 1;
                    best = best.max(diff);
                    t_a += a_clock.next(&mut rng);
                } else {
                    diff -= 1;
                    q.advance(&mut rng);
                    if best - diff > margin {
                        break;
                    }
                }
            }
            s.bump(best as usize);
        },
        merge,
    );
    Ok(Histogram { counts: tally.counts, trials: cfg.trials, truncated_trials: tally.truncated, seed: cfg.seed })
}

/// Empirical law of the pre-mining lead at the end of the warmup.
pub fn sim_lead(cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate()?;
    cfg.params.require_tolerance()?;
    let streams = StreamFactory::new(cfg.seed, tag::LEAD);
    let tally = run_trials(
        cfg.trials,
        Tally::default(),
        |i, s| {
            let mut rng = streams.trial(i);
            let l = lead_walk(&cfg.params, cfg.warmup, &mut rng);
            s.bump(l as usize);
        },
        merge,
    );
    Ok(Histogram { counts: tally.counts, trials: cfg.trials, truncated_trials: 0, seed: cfg.seed })
}

/// State of the race after one event: adversary surplus L + A − P and public pacer count P.
#[derive(Clone, Copy)]
struct Step {
    time: f64,
    surplus: i64,
    pacers: u64,
}

/// Path of the race from the attack origin. Honest blocks are delayed by Δ, so
/// a pacer mined at T counts from T + Δ on. The race stops once the surplus is
/// more than `stop_margin` below zero after the threshold, or `horizon` after it.
struct RacePath {
    steps: Vec<Step>,
    timed_out: bool,
}

#[derive(Clone, Copy)]
enum Threshold {
    /// The instant the given number of pacers is public.
    Pacers(u64),
    At(f64),
}

fn race(cfg: &SimConfig, lead: u64, rng: &mut ChaCha8Rng, threshold: Threshold) -> RacePath {
    let p = &cfg.params;
    let a_clock = Clock::new(p.a);
    let mut t_a = a_clock.next(rng);
    let mut pacers = Pacers::new(p, rng, false);
    let mut surplus = lead as i64;
    let mut count = 0u64;
    let mut steps = vec![Step { time: 0.0, surplus, pacers: 0 }];
    let margin = cfg.stop_margin as i64;
    let mut settled = match threshold {
        Threshold::At(c) => Some(c),
        Threshold::Pacers(_) => None,
    };
    loop {
        let t_pub = pacers.next + p.delta;
        let now = t_a.min(t_pub);
        if let Some(t0) = settled {
            if now > t0 + cfg.horizon {
                return RacePath { steps, timed_out: true };
            }
            if surplus < -margin && now > t0 {
                return RacePath { steps, timed_out: false };
            }
        }
        if t_a < t_pub {
            surplus += 1;
            t_a += a_clock.next(rng);
        } else {
            surplus -= 1;
            count += 1;
            pacers.advance(rng);
            if let Threshold::Pacers(k) = threshold {
                if count == k {
                    settled = Some(now);
                }
            }
        }
        steps.push(Step { time: now, surplus, pacers: count });
    }
}

/// `best[i]` = largest surplus at or after step i among steps with a public pacer.
fn suffix_best(steps: &[Step]) -> Vec<i64> {
    let mut best = vec![i64::MIN; steps.len() + 1];
    for i in (0..steps.len()).rev() {
        let v = if steps[i].pacers >= 1 { steps[i].surplus } else { i64::MIN };
        best[i] = best[i + 1].max(v);
    }
    best
}

/// Attack success frequency for confirmation by depth, for every k in `ks`.
///
/// The clock starts at s − Δ with lead L. The attack succeeds for depth k if
/// L + A(0, c] ≥ P(0, c − Δ] at some c at or after the k-th pacer becomes public.
pub fn sim_private_attack_depth_batch(cfg: &SimConfig, ks: &[u64]) -> Result<Vec<SimEstimate>> {
    cfg.validate()?;
    if ks.contains(&0) {
        return Err(Error::Parameter("depth must be >= 1".into()));
    }
    let k_last = ks.iter().copied().max().unwrap_or(1);
    let streams = StreamFactory::new(cfg.seed, tag::ATTACK_DEPTH);
    let n = ks.len();
    let tally = run_trials(
        cfg.trials,
        Tally { counts: vec![0; 2 * n], truncated: 0 },
        |i, s| {
            let mut rng = streams.trial(i);
            let lead = sample_lead(cfg, &mut rng);
            let path = race(cfg, lead, &mut rng, Threshold::Pacers(k_last));
            let best = suffix_best(&path.steps);
            for (j, &k) in ks.iter().enumerate() {
                let start = path.steps.iter().position(|st| st.pacers >= k);
                let won = start.is_some_and(|idx| best[idx] >= 0);
                if won {
                    s.counts[j] += 1;
                } else if path.timed_out {
                    s.counts[n + j] += 1;
                }
            }
        },
        merge,
    );
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| SimEstimate::new(k as f64, tally.counts[j], tally.counts[n + j], cfg))
        .collect())
}

pub fn sim_private_attack_depth(cfg: &SimConfig, k: u64) -> Result<SimEstimate> {
    Ok(sim_private_attack_depth_batch(cfg, &[k])?.remove(0))
}

/// Attack success frequency for confirmation by time, for every t in `ts`.
///
/// The clock starts at s − 2Δ. The attack succeeds for time t if
/// L + A(0, c] ≥ P(0, c − Δ] ≥ 1 at some c ≥ t + 2Δ.
pub fn sim_private_attack_time_batch(cfg: &SimConfig, ts: &[f64]) -> Result<Vec<SimEstimate>> {
    cfg.validate()?;
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Parameter("confirmation times must be positive".into()));
    }
    let delta = cfg.params.delta;
    let c_last = ts.iter().copied().fold(0.0, f64::max) + 2.0 * delta;
    let streams = StreamFactory::new(cfg.seed, tag::ATTACK_TIME);
    let n = ts.len();
    let tally = run_trials(
        cfg.trials,
        Tally { counts: vec![0; 2 * n], truncated: 0 },
        |i, s| {
            let mut rng = streams.trial(i);
            let lead = sample_lead(cfg, &mut rng);
            let path = race(cfg, lead, &mut rng, Threshold::At(c_last));
            let best = suffix_best(&path.steps);
            for (j, &t) in ts.iter().enumerate() {
                let c0 = t + 2.0 * delta;
                // the state holding at c0 is the last step at or before it
                let first_after = path.steps.partition_point(|st| st.time <= c0);
                let won = best[first_after - 1] >= 0;
                if won {
                    s.counts[j] += 1;
                } else if path.timed_out {
                    s.counts[n + j] += 1;
                }
            }
        },
        merge,
    );
    Ok(ts.iter().enumerate().map(|(j, &t)| SimEstimate::new(t, tally.counts[j], tally.counts[n + j], cfg)).collect())
}

pub fn sim_private_attack_time(cfg: &SimConfig, t: f64) -> Result<SimEstimate> {
    Ok(sim_private_attack_time_batch(cfg, &[t])?.remove(0))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub trials: u64,
    pub blocks: u64,
    pub pacers: u64,
    pub jumpers: u64,
    pub checks: u64,
    pub violations: u64,
    pub seed: u64,
}

/// Honest-only mining with per-block delays uniform on [0, Δ]; checks
/// J(s, t] ≥ P(s + Δ, t] at every pacer t for s near the last 32 blocks.
pub fn sim_lemma_instrumentation(cfg: &SimConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    let p = cfg.params;
    let streams = StreamFactory::new(cfg.seed, tag::INVARIANTS);
    const WINDOW: usize = 32;
    let tally = run_trials(
        cfg.trials,
        Tally { counts: vec![0; 5], truncated: 0 },
        |i, s| {
            let mut rng = streams.trial(i);
            let clock = Clock::new(p.h);
            let mut pending: BinaryHeap<Reverse<(u64, u64)>> = BinaryHeap::new();
            let mut visible = 0u64;
            let mut top = 0u64;
            let mut blocks: Vec<f64> = Vec::new();
            let mut jumpers: Vec<f64> = Vec::new();
            let mut pacers: Vec<f64> = Vec::new();
            let mut t = 0.0;
            loop {
                t += clock.next(&mut rng);
                if t > cfg.horizon {
                    break;
                }
                while let Some(Reverse((bits, height))) = pending.peek().copied() {
                    if f64::from_bits(bits) > t {
                        break;
                    }
                    pending.pop();
                    visible = visible.max(height);
                }
                let height = visible + 1;
                let delay = if p.delta > 0.0 { rng.random::<f64>() * p.delta } else { 0.0 };
                pending.push(Reverse(((t + delay).to_bits(), height)));
                blocks.push(t);
                if height > top {
                    top = height;
                    jumpers.push(t);
                }
                let is_pacer = pacers.last().is_none_or(|&last| t >= last + p.delta);
                if !is_pacer {
                    continue;
                }
                pacers.push(t);
                let count = |v: &[f64], lo: f64| v.len() - v.partition_point(|&x| x <= lo);
                for &b in blocks.iter().rev().take(WINDOW) {
                    for s0 in [b - 1e-9, b, b - p.delta, b - p.delta - 1e-9] {
                        s.counts[3] += 1;
                        if count(&jumpers, s0) < count(&pacers, s0 + p.delta) {
                            s.counts[4] += 1;
                        }
                    }
                }
            }
            s.counts[0] += blocks.len() as u64;
            s.counts[1] += pacers.len() as u64;
            s.counts[2] += jumpers.len() as u64;
        },
        merge,
    );
    let c = &tally.counts;
    let report = LemmaReport {
        trials: cfg.trials,
        blocks: c[0],
        pacers: c[1],
        jumpers: c[2],
        checks: c[3],
        violations: c[4],
        seed: cfg.seed,
    };
    if report.violations > 0 {
        return Err(Error::Invariant(format!("{} of {} jumper/pacer checks failed", report.violations, report.checks)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn btc(beta: f64) -> MiningParams {
        MiningParams::from_total(1.0 / 600.0, beta, 10.0).unwrap()
    }

    #[test]
    fn no_adversary_never_wins() {
        let mut cfg = SimConfig::new(btc(0.0), 2000, 3);
        cfg.lead = LeadDist::Geometric;
        assert_eq!(sim_private_attack_depth(&cfg, 6).unwrap().successes, 0);
        assert_eq!(sim_private_attack_time(&cfg, 600.0).unwrap().successes, 0);
        let m = sim_max_diff(&cfg).unwrap();
        assert_eq!(m.counts, vec![2000]);
        cfg.warmup = 6e4;
        assert_eq!(sim_lead(&cfg).unwrap().counts, vec![2000]);
    }

    #[test]
    fn zero_delay_makes_every_block_a_jumper_and_pacer() {
        let p = MiningParams::new(0.0, 1.0 / 600.0, 0.0).unwrap();
        let mut cfg = SimConfig::new(p, 4, 9);
        cfg.horizon = 6e5;
        let r = sim_lemma_instrumentation(&cfg).unwrap();
        assert_eq!(r.blocks, r.pacers);
        assert_eq!(r.blocks, r.jumpers);
    }

    #[test]
    fn batch_matches_single() {
        let mut cfg = SimConfig::new(btc(0.3), 3000, 11);
        cfg.lead = LeadDist::Geometric;
        let batch = sim_private_attack_depth_batch(&cfg, &[3, 8]).unwrap();
        let single = sim_private_attack_depth(&cfg, 8).unwrap();
        assert_eq!(batch[1].successes, single.successes);
        assert!(batch[0].successes >= batch[1].successes);
    }

    #[test]
    fn out_of_tolerance_max_diff_refused() {
        let cfg = SimConfig::new(btc(0.55), 10, 1);
        assert!(matches!(sim_max_diff(&cfg), Err(Error::Domain(_))));
        assert!(matches!(sim_lead(&cfg), Err(Error::Domain(_))));
    }
}
