//! Simulation of censored samples, their summary statistics, and
//! statistical cross-checks of the exact laws.
//!
//! Replication `i` of a run with seed `s` draws from its own ChaCha8 stream
//! `(s, i)`, so results do not depend on the number of worker threads.

mod split;
pub mod stats;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distmodel::{CureModel, Observation};
use crate::error::{Error, Result};
use stats::EmpiricalCdf;

pub use split::{verify_split, verify_split_given_m, SplitReport, SplitSetup, SubsampleTest};

/// Fewest replications accepted by [`empirical_cdf`].
pub const MIN_ECDF_REPS: u64 = 100;

/// Random stream of replication `index` under `seed`.
pub fn rng_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` observations from one model draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    pub observations: Vec<Observation>,
}

fn fill_sample(model: &CureModel, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Observation>) {
    out.clear();
    out.extend((0..n).map(|_| model.sample_one(rng)));
}

/// Draws a sample of size `n`; deterministic in `(model, n, seed)`.
pub fn draw_sample(model: &CureModel, n: usize, seed: u64) -> Result<CensoredSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size n must be at least 1".into()));
    }
    let mut observations = Vec::with_capacity(n);
    fill_sample(model, n, &mut rng_stream(seed, 0), &mut observations);
    Ok(CensoredSample { observations })
}

impl CensoredSample {
    /// Writes the sample as `time,event` CSV (event 1 = uncensored).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(["time", "event"])?;
        for o in &self.observations {
            out.write_record([o.time.to_string(), u8::from(o.uncensored).to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Extremes and counts of one sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SampleSummary {
    /// Largest observed time.
    pub m: f64,
    /// Largest uncensored time; 0 when every observation is censored.
    pub mu: f64,
    pub n_u: u64,
    pub n_c: u64,
    /// Censored times above `mu` (all `n` when every observation is censored).
    pub n_c_gt: u64,
    /// Censored times below `mu`.
    pub n_c_lt: u64,
    /// Uncensored times below `mu`.
    pub n_u_lt: u64,
    /// Uncensored times strictly above `2 mu - m`; 0 when all are censored.
    pub q_count: u64,
    /// `q_count / n`.
    pub q_n: f64,
}

/// Computes the summary statistics of a sample.
pub fn summarize(obs: &[Observation]) -> Result<SampleSummary> {
    if obs.is_empty() {
        return Err(Error::InvalidParameter("cannot summarize an empty sample".into()));
    }
    let n = obs.len() as u64;
    let m = obs.iter().map(|o| o.time).fold(f64::NEG_INFINITY, f64::max);
    let n_u = obs.iter().filter(|o| o.uncensored).count() as u64;
    let n_c = n - n_u;
    if n_u == 0 {
        return Ok(SampleSummary {
            m,
            mu: 0.0,
            n_u,
            n_c,
            n_c_gt: n,
            n_c_lt: 0,
            n_u_lt: 0,
            q_count: 0,
            q_n: 0.0,
        });
    }
    let mu = obs.iter().filter(|o| o.uncensored).map(|o| o.time).fold(f64::NEG_INFINITY, f64::max);
    let threshold = 2.0 * mu - m;
    let (mut n_c_gt, mut n_c_lt, mut n_u_lt, mut q_count) = (0, 0, 0, 0);
    for o in obs {
        if o.uncensored {
            if o.time < mu {
                n_u_lt += 1;
            }
            if o.time > threshold {
                q_count += 1;
            }
        } else if o.time > mu {
            n_c_gt += 1;
        } else if o.time < mu {
            n_c_lt += 1;
        }
    }
    Ok(SampleSummary {
        m,
        mu,
        n_u,
        n_c,
        n_c_gt,
        n_c_lt,
        n_u_lt,
        q_count,
        q_n: q_count as f64 / n as f64,
    })
}

/// Runs `reps` replications in parallel and maps each sample through `f`;
/// results are ordered by replication index.
pub fn simulate_map<T, F>(model: &CureModel, n: usize, reps: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &[Observation]) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf, rep| {
                fill_sample(model, n, &mut rng_stream(seed, rep), buf);
                f(rep, buf)
            },
        )
        .collect()
}

/// Summaries of `reps` independent samples of size `n`.
pub fn simulate(model: &CureModel, n: usize, reps: u64, seed: u64) -> Result<Vec<SampleSummary>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size n must be at least 1".into()));
    }
    simulate_map(model, n, reps, seed, |_, obs| summarize(obs)).into_iter().collect()
}

/// Writes replication summaries as CSV.
pub fn write_summaries_csv<W: Write>(w: W, summaries: &[SampleSummary]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["rep", "M", "Mu", "n_u", "n_c", "n_c_gt", "n_c_lt", "n_u_lt", "q_n"])?;
    for (rep, s) in summaries.iter().enumerate() {
        out.write_record([
            rep.to_string(),
            s.m.to_string(),
            s.mu.to_string(),
            s.n_u.to_string(),
            s.n_c.to_string(),
            s.n_c_gt.to_string(),
            s.n_c_lt.to_string(),
            s.n_u_lt.to_string(),
            s.q_n.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Scalar statistics that can be read off a [`SampleSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryStatistic {
    M,
    Mu,
    Diff,
    /// `M / M_u`, only defined when some observation is uncensored.
    Ratio,
    Qn,
}

impl SummaryStatistic {
    pub fn value(self, s: &SampleSummary) -> Option<f64> {
        match self {
            SummaryStatistic::M => Some(s.m),
            SummaryStatistic::Mu => Some(s.mu),
            SummaryStatistic::Diff => Some(s.m - s.mu),
            SummaryStatistic::Ratio => (s.n_u > 0).then(|| s.m / s.mu),
            SummaryStatistic::Qn => Some(s.q_n),
        }
    }
}

/// Empirical cdf of `stat` over `reps` replications with a `1 - alpha` DKW
/// band. Replications where the statistic is undefined are dropped.
pub fn empirical_cdf(
    model: &CureModel,
    n: usize,
    stat: SummaryStatistic,
    reps: u64,
    seed: u64,
    alpha: f64,
) -> Result<EmpiricalCdf> {
    if reps < MIN_ECDF_REPS {
        return Err(Error::InvalidParameter(format!(
            "empirical cdf needs at least {MIN_ECDF_REPS} replications, got {reps}"
        )));
    }
    let values: Vec<f64> = simulate(model, n, reps, seed)?.iter().filter_map(|s| stat.value(s)).collect();
    Ok(EmpiricalCdf::new(values, alpha))
}

#[cfg(test)]
mod tests;
