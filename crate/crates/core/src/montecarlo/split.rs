//! Statistical check of the splitting property at `M_u(n)`.
//!
//! Given `M_u(n) = t` and `N_c^>(M_u(n)) = r`, the `n - 1 - r` observations
//! below `t` are iid with cdf `H(x)/H(t)`, the `r` censored observations
//! above `t` are iid with cdf `1 - C(x)/C(t)` where `C(x) = ∫_x^{tau_H} F̄* dG`,
//! and the two groups are independent. Additionally conditioning on
//! `M(n) = y` leaves the lower group unchanged and makes the remaining
//! `r - 1` upper observations iid with cdf `(C(t) - C(x))/(C(t) - C(y))`.
//!
//! Conditioning on `M_u(n) = t` is approximated by a bin `(t_lo, t_hi]`.
//! Each observation is mapped through the reference cdf evaluated at its own
//! replication's `M_u(n)` (and `M(n)`), so the pooled values are exactly
//! uniform under the null whatever the bin width.

use super::stats::{chi_square_independence, ks_one_sample, ks_two_sample, TestResult};
use super::{simulate_map, summarize};
use crate::distmodel::CureModel;
use crate::error::{Error, Result};

/// Per-test significance floor.
pub const SPLIT_ALPHA: f64 = 1e-3;
/// Fewest qualifying replications accepted.
pub const MIN_QUALIFYING: usize = 200;

/// Parameters of a splitting check.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSetup {
    pub n: usize,
    pub t_bin: (f64, f64),
    /// Optional additional conditioning `M(n) ∈ m_bin`.
    pub m_bin: Option<(f64, f64)>,
    pub r: u64,
    pub reps: u64,
    pub seed: u64,
    pub min_qualifying: usize,
    pub alpha: f64,
    /// Added to `M_u(n)` in the lower-group reference cdf. Zero gives the
    /// true null; a positive value gives a deliberately false one.
    pub reference_shift: f64,
}

impl SplitSetup {
    pub fn new(n: usize, t_bin: (f64, f64), r: u64, reps: u64, seed: u64) -> Self {
        Self {
            n,
            t_bin,
            m_bin: None,
            r,
            reps,
            seed,
            min_qualifying: MIN_QUALIFYING,
            alpha: SPLIT_ALPHA,
            reference_shift: 0.0,
        }
    }

    fn validate(&self, model: &CureModel) -> Result<()> {
        let (lo, hi) = self.t_bin;
        if !(0.0 < lo && lo < hi && hi < model.tau_h()) {
            return Err(Error::Domain(format!(
                "t_bin ({lo}, {hi}) must be a nonempty interval inside (0, tau_H = {})",
                model.tau_h()
            )));
        }
        if self.n == 0 || self.r >= self.n as u64 {
            return Err(Error::Domain(format!("need 0 <= r < n, got r = {}, n = {}", self.r, self.n)));
        }
        if let Some((mlo, mhi)) = self.m_bin {
            if !(mlo < mhi && mlo >= lo) {
                return Err(Error::Domain(format!(
                    "m_bin ({mlo}, {mhi}) must be a nonempty interval above t_bin"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// KS test of one pooled subsample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SubsampleTest {
    pub ks: TestResult,
    pub observations: usize,
}

/// Outcome of a splitting check.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SplitReport {
    pub t_bin: (f64, f64),
    pub m_bin: Option<(f64, f64)>,
    pub r: u64,
    pub reps: u64,
    pub qualifying: usize,
    /// Lower group against `H(x)/H(t)`.
    pub below: SubsampleTest,
    /// Upper group against its censored-tail law; `None` when empty.
    pub above: Option<SubsampleTest>,
    /// Chi-square independence of the two group minima on a 3x3 table.
    pub independence: Option<TestResult>,
    /// Two-sample KS of the lower group with and without the `M(n)`
    /// conditioning (only with `m_bin`).
    pub two_sample: Option<TestResult>,
    pub notes: Vec<String>,
    pub alpha: f64,
    /// All Bonferroni-adjusted p-values exceed `alpha`.
    pub passed: bool,
}

impl SplitReport {
    /// Named raw p-values of the tests that were run.
    pub fn p_values(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("below_ks", self.below.ks.p_value)];
        if let Some(a) = &self.above {
            v.push(("above_ks", a.ks.p_value));
        }
        if let Some(i) = &self.independence {
            v.push(("independence_chi2", i.p_value));
        }
        if let Some(t) = &self.two_sample {
            v.push(("two_sample_ks", t.p_value));
        }
        v
    }
}

/// What one replication contributes.
struct RepSplit {
    in_m_bin: bool,
    below: Vec<f64>,
    above: Vec<f64>,
    min_below: Option<f64>,
    min_above: Option<f64>,
}

fn tertile(u: f64) -> usize {
    ((u * 3.0) as usize).min(2)
}

/// PIT of the minimum of `k` iid uniforms.
fn min_pit(min_u: f64, k: usize) -> f64 {
    -((k as f64) * (-min_u).ln_1p()).exp_m1()
}

fn run(model: &CureModel, setup: &SplitSetup) -> Result<SplitReport> {
    setup.validate(model)?;
    let (t_lo, t_hi) = setup.t_bin;
    let top = model.h_upper();
    let with_m = setup.m_bin.is_some();
    let shift = setup.reference_shift;

    let reps = simulate_map(model, setup.n, setup.reps, setup.seed, |_, obs| -> Option<RepSplit> {
        let s = summarize(obs).ok()?;
        if !(s.mu > t_lo && s.mu <= t_hi && s.n_c_gt == setup.r) {
            return None;
        }
        let (t, m) = (s.mu, s.m);
        let in_m_bin = setup.m_bin.is_none_or(|(lo, hi)| m > lo && m <= hi);
        let h_ref = model.h_cdf(t + shift);
        let below: Vec<f64> = obs.iter().filter(|o| o.time < t).map(|o| model.h_cdf(o.time) / h_ref).collect();
        // with M(n) conditioned on, the maximum itself is not part of the
        // iid upper group
        let ceiling = if with_m { m } else { top };
        let c_ref = model.cens_mass(t, ceiling);
        let above: Vec<f64> = obs
            .iter()
            .filter(|o| !o.uncensored && o.time > t && !(with_m && o.time == m))
            .map(|o| model.cens_mass(t, o.time) / c_ref)
            .collect();
        let min_of = |v: &[f64]| v.iter().copied().reduce(f64::min).map(|u| min_pit(u, v.len()));
        Some(RepSplit {
            in_m_bin,
            min_below: min_of(&below),
            min_above: min_of(&above),
            below,
            above,
        })
    });

    let (inside, outside): (Vec<RepSplit>, Vec<RepSplit>) =
        reps.into_iter().flatten().partition(|r| r.in_m_bin);
    if inside.len() < setup.min_qualifying {
        return Err(Error::InsufficientReplications { achieved: inside.len(), required: setup.min_qualifying });
    }

    let mut notes = Vec::new();
    let below_pool: Vec<f64> = inside.iter().flat_map(|r| r.below.iter().copied()).collect();
    let below = SubsampleTest { ks: ks_one_sample(&below_pool, |u| u.clamp(0.0, 1.0)), observations: below_pool.len() };

    let above_pool: Vec<f64> = inside.iter().flat_map(|r| r.above.iter().copied()).collect();
    let above = if above_pool.is_empty() {
        notes.push(if setup.r == 0 {
            "r=0 => M_u = M: the upper group is empty".to_string()
        } else {
            "upper group is empty after removing M(n)".to_string()
        });
        None
    } else {
        Some(SubsampleTest { ks: ks_one_sample(&above_pool, |u| u.clamp(0.0, 1.0)), observations: above_pool.len() })
    };

    let mut table = [[0u64; 3]; 3];
    let mut pairs = 0;
    for r in &inside {
        if let (Some(b), Some(a)) = (r.min_below, r.min_above) {
            table[tertile(b)][tertile(a)] += 1;
            pairs += 1;
        }
    }
    let independence = if pairs > 0 {
        Some(chi_square_independence(&table))
    } else {
        notes.push("independence test skipped: one group is always empty".to_string());
        None
    };

    let two_sample = if with_m {
        let rest: Vec<f64> = outside.iter().flat_map(|r| r.below.iter().copied()).collect();
        if rest.is_empty() {
            notes.push("m_bin covers every qualifying replication; no comparison pool".to_string());
            None
        } else {
            Some(ks_two_sample(&below_pool, &rest))
        }
    } else {
        None
    };

    let mut report = SplitReport {
        t_bin: setup.t_bin,
        m_bin: setup.m_bin,
        r: setup.r,
        reps: setup.reps,
        qualifying: inside.len(),
        below,
        above,
        independence,
        two_sample,
        notes,
        alpha: setup.alpha,
        passed: false,
    };
    let ps = report.p_values();
    let k = ps.len() as f64;
    report.passed = ps.iter().all(|(_, p)| (p * k).min(1.0) > setup.alpha);
    Ok(report)
}

/// Checks the splitting property on replications with `M_u(n) ∈ t_bin` and
/// `N_c^> = r`.
pub fn verify_split(model: &CureModel, setup: &SplitSetup) -> Result<SplitReport> {
    let mut setup = setup.clone();
    setup.m_bin = None;
    run(model, &setup)
}

/// As [`verify_split`], additionally conditioning on `M(n) ∈ m_bin`.
pub fn verify_split_given_m(model: &CureModel, setup: &SplitSetup, m_bin: (f64, f64)) -> Result<SplitReport> {
    let mut setup = setup.clone();
    setup.m_bin = Some(m_bin);
    run(model, &setup)
}
