use std::sync::Arc;

use rand::Rng;

use super::DistributionSpec;
use crate::error::{Error, Result};
use crate::quadrature::{sort_dedup, CumulativeTable, QuadratureConfig};

/// Panels of the cumulative tables used when `G` has no closed form.
const TABLE_PANELS: usize = 256;

/// Support endpoints of the model's laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoints {
    pub tau_f: f64,
    pub tau_g: f64,
    /// `tau_f` if `p = 1`, otherwise `∞` (immunes never fail).
    pub tau_fstar: f64,
    /// `min(tau_fstar, tau_g)`: right endpoint of the observed times.
    pub tau_h: f64,
    /// `min(tau_f, tau_g)`: right endpoint of the uncensored times.
    pub tau_j: f64,
}

/// How the cross integrals `∫ F̄* dG` and `∫ Ḡ dF*` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassStrategy {
    /// Closed form when `G` is uniform, cumulative tables otherwise.
    #[default]
    Auto,
    /// Always use cumulative tables (useful to cross-check the closed form).
    Tabulated,
}

#[derive(Debug)]
enum MassEngine {
    UniformCensoring { lo: f64, hi: f64 },
    Tables { cens: CumulativeTable, unc: CumulativeTable },
}

/// Latent lifetime of one individual: finite for susceptibles, never for
/// the cured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventTime {
    At(f64),
    Never,
}

impl EventTime {
    /// Whether the event happens no later than `u`.
    pub fn occurs_by(self, u: f64) -> bool {
        match self {
            EventTime::At(t) => t <= u,
            EventTime::Never => false,
        }
    }
}

/// One observed pair `(min(T*, U), 1{T* <= U})`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Observation {
    pub time: f64,
    pub uncensored: bool,
}

/// Mixture cure model: susceptible proportion `p` with lifetime law `F`,
/// independent censoring law `G`.
#[derive(Debug, Clone)]
pub struct CureModel {
    lifetime: DistributionSpec,
    censoring: DistributionSpec,
    p: f64,
    ends: Endpoints,
    h_upper: f64,
    j_upper: f64,
    engine: Arc<MassEngine>,
}

impl CureModel {
    pub fn new(lifetime: DistributionSpec, censoring: DistributionSpec, p: f64) -> Result<Self> {
        Self::with_strategy(lifetime, censoring, p, MassStrategy::Auto)
    }

    pub fn with_strategy(
        lifetime: DistributionSpec,
        censoring: DistributionSpec,
        p: f64,
        strategy: MassStrategy,
    ) -> Result<Self> {
        lifetime.validate()?;
        censoring.validate()?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "susceptible proportion p must lie in (0, 1], got {p}"
            )));
        }
        let tau_f = lifetime.right_endpoint();
        let tau_g = censoring.right_endpoint();
        let tau_fstar = if p == 1.0 { tau_f } else { f64::INFINITY };
        let ends = Endpoints {
            tau_f,
            tau_g,
            tau_fstar,
            tau_h: tau_fstar.min(tau_g),
            tau_j: tau_f.min(tau_g),
        };
        let fstar_eff = if p == 1.0 { lifetime.effective_upper() } else { f64::INFINITY };
        let h_upper = censoring.effective_upper().min(fstar_eff);
        let j_upper = lifetime.effective_upper().min(censoring.effective_upper());

        let mut model = Self {
            lifetime,
            censoring,
            p,
            ends,
            h_upper,
            j_upper,
            engine: Arc::new(MassEngine::UniformCensoring { lo: 0.0, hi: 0.0 }),
        };
        model.engine = Arc::new(match (censoring, strategy) {
            (DistributionSpec::Uniform { a, b }, MassStrategy::Auto) => {
                MassEngine::UniformCensoring { lo: a, hi: b }
            }
            _ => model.build_tables()?,
        });
        Ok(model)
    }

    /// Tables in probability space: `∫ F̄* dG = ∫ F̄*(G⁻¹(u)) du` and
    /// `∫ Ḡ dF* = p ∫ Ḡ(F⁻¹(v)) dv` have bounded integrands even when a
    /// density is singular at an endpoint.
    fn build_tables(&self) -> Result<MassEngine> {
        let cfg = QuadratureConfig::default();
        let (f, g, p) = (self.lifetime, self.censoring, self.p);
        let breaks = self.support_breaks();
        let g_breaks: Vec<f64> = breaks.iter().map(|x| g.cdf(*x)).collect();
        let f_breaks: Vec<f64> = breaks.iter().map(|x| f.cdf(*x)).collect();
        let fstar_sf = move |x: f64| if p == 1.0 { f.sf(x) } else { 1.0 - p + p * f.sf(x) };
        let cens = CumulativeTable::build(
            Box::new(move |u| fstar_sf(g.quantile(u))),
            0.0,
            g.cdf(self.h_upper),
            TABLE_PANELS,
            &g_breaks,
            cfg,
        )?;
        let unc = CumulativeTable::build(
            Box::new(move |v| p * g.sf(f.quantile(v))),
            0.0,
            f.cdf(self.j_upper),
            TABLE_PANELS,
            &f_breaks,
            cfg,
        )?;
        Ok(MassEngine::Tables { cens, unc })
    }

    pub fn lifetime(&self) -> &DistributionSpec {
        &self.lifetime
    }

    pub fn censoring(&self) -> &DistributionSpec {
        &self.censoring
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn endpoints(&self) -> Endpoints {
        self.ends
    }

    pub fn tau_h(&self) -> f64 {
        self.ends.tau_h
    }

    pub fn tau_j(&self) -> f64 {
        self.ends.tau_j
    }

    /// Finite integration limit for `H`: `tau_h`, or a point with
    /// negligible survivor mass when `tau_h = ∞`.
    pub fn h_upper(&self) -> f64 {
        self.h_upper
    }

    /// Finite integration limit for `dF*` integrals.
    pub fn j_upper(&self) -> f64 {
        self.j_upper
    }

    /// Finite support edges of `F` and `G` inside `(0, h_upper)`; the model's
    /// integrands may have kinks there.
    pub fn support_breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [
            self.lifetime.left_endpoint(),
            self.lifetime.right_endpoint(),
            self.censoring.left_endpoint(),
            self.censoring.right_endpoint(),
        ]
        .into_iter()
        .filter(|x| x.is_finite() && *x > 0.0 && *x < self.h_upper)
        .collect();
        sort_dedup(&mut v);
        v
    }

    /// `F̄*(x) = 1 - p F(x)`.
    pub fn fstar_sf(&self, x: f64) -> f64 {
        if self.p == 1.0 {
            self.lifetime.sf(x)
        } else {
            1.0 - self.p + self.p * self.lifetime.sf(x)
        }
    }

    /// `H̄(x) = F̄*(x) Ḡ(x)`.
    pub fn h_sf(&self, x: f64) -> f64 {
        self.fstar_sf(x) * self.censoring.sf(x)
    }

    pub fn h_cdf(&self, x: f64) -> f64 {
        1.0 - self.h_sf(x)
    }

    /// Density of the censored part of `dH`: `F̄*(x) g(x)`.
    pub fn cens_density(&self, x: f64) -> f64 {
        self.fstar_sf(x) * self.censoring.pdf(x)
    }

    /// Density of the uncensored part of `dH`: `Ḡ(t) p f(t)`.
    pub fn unc_density(&self, t: f64) -> f64 {
        self.censoring.sf(t) * self.p * self.lifetime.pdf(t)
    }

    /// `∫_a^b F̄* dG`, limits clamped to `[0, tau_h]`.
    pub fn cens_mass(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(self.h_upper);
        if !(b > a) {
            return 0.0;
        }
        match &*self.engine {
            MassEngine::UniformCensoring { lo, hi } => {
                let (a, b) = (a.max(*lo), b.min(*hi));
                if !(b > a) {
                    return 0.0;
                }
                let f = &self.lifetime;
                let v = ((b - a) - self.p * (f.cdf_integral(b) - f.cdf_integral(a))) / (hi - lo);
                v.max(0.0)
            }
            MassEngine::Tables { cens, .. } => {
                let g = &self.censoring;
                cens.mass(g.cdf(a), g.cdf(b)).max(0.0)
            }
        }
    }

    /// `∫_a^b Ḡ dF*`, limits clamped to `[0, tau_j]`.
    pub fn unc_mass(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let b = b.min(self.j_upper);
        if !(b > a) {
            return 0.0;
        }
        match &*self.engine {
            MassEngine::UniformCensoring { lo, hi } => {
                let f = &self.lifetime;
                let mut v = 0.0;
                if a < *lo {
                    v += f.cdf(b.min(*lo)) - f.cdf(a);
                }
                let (a2, b2) = (a.max(*lo), b.min(*hi));
                if b2 > a2 {
                    // ∫ (hi - z)/(hi - lo) dF(z), integrated by parts
                    v += ((hi - b2) * f.cdf(b2) - (hi - a2) * f.cdf(a2) + f.cdf_integral(b2)
                        - f.cdf_integral(a2))
                        / (hi - lo);
                }
                (self.p * v).max(0.0)
            }
            MassEngine::Tables { unc, .. } => {
                let f = &self.lifetime;
                unc.mass(f.cdf(a), f.cdf(b)).max(0.0)
            }
        }
    }

    /// Probability that a single observation is censored: `∫_0^{tau_h} F̄* dG`.
    pub fn censored_prob(&self) -> f64 {
        self.cens_mass(0.0, self.h_upper)
    }

    /// `J(t)`, the cdf of an observation's uncensored time (0 when censored).
    pub fn j_cdf(&self, t: f64) -> f64 {
        if t >= self.ends.tau_j {
            return 1.0;
        }
        (self.cens_mass(t.max(0.0), self.h_upper) + self.h_cdf(t.max(0.0))).min(1.0)
    }

    /// `1 - J(t) = ∫_t^{tau_j} Ḡ dF*`, without cancellation.
    pub fn j_sf(&self, t: f64) -> f64 {
        self.unc_mass(t.max(0.0), self.j_upper)
    }

    /// `(p_c>(t), p_c<(t), p_u<(t))`: probabilities that a non-maximal
    /// observation is censored above `t`, censored below `t`, or uncensored
    /// below `t`, given the largest uncensored time is `t`.
    pub fn p_functions(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(t > 0.0 && t < self.ends.tau_h) {
            return Err(Error::Domain(format!(
                "p-functions need 0 < t < tau_H = {}, got {t}",
                self.ends.tau_h
            )));
        }
        let c_gt = self.cens_mass(t, self.h_upper);
        let c_lt = self.cens_mass(0.0, t);
        let u_lt = self.unc_mass(0.0, t);
        let j = c_gt + c_lt + u_lt;
        if !(j > 0.0) {
            return Err(Error::DegenerateModel(format!("J({t}) vanishes")));
        }
        Ok((c_gt / j, c_lt / j, u_lt / j))
    }

    /// Share of the censored mass lying above `t`.
    pub fn pc_plus(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.ends.tau_h) {
            return Err(Error::Domain(format!(
                "pc_plus needs 0 <= t <= tau_H = {}, got {t}",
                self.ends.tau_h
            )));
        }
        let total = self.censored_prob();
        if !(total > 0.0) {
            return Err(Error::DegenerateModel("censoring is impossible under this model".into()));
        }
        Ok((self.cens_mass(t, self.h_upper) / total).clamp(0.0, 1.0))
    }

    /// Exponent `e` with `1 - J(tau_j - z) ~ c z^e`, if the tails are power laws.
    pub fn j_tail_exponent(&self) -> Option<f64> {
        let (tf, tg) = (self.ends.tau_f, self.ends.tau_g);
        let beta = self.lifetime.tail_power().map(|t| t.exponent);
        let gamma = self.censoring.tail_power().map(|t| t.exponent);
        if !tg.is_finite() && !tf.is_finite() {
            None
        } else if tg < tf {
            gamma.map(|g| 1.0 + g)
        } else if tf < tg {
            beta
        } else {
            Some(beta? + gamma?)
        }
    }

    /// Exponent `e` with `H̄(tau_h - z) ~ c z^e`, if the tails are power laws.
    pub fn h_tail_exponent(&self) -> Option<f64> {
        let (tf, tg) = (self.ends.tau_fstar, self.ends.tau_g);
        let beta = self.lifetime.tail_power().map(|t| t.exponent);
        let gamma = self.censoring.tail_power().map(|t| t.exponent);
        if !tg.is_finite() && !tf.is_finite() {
            None
        } else if tg < tf {
            gamma
        } else if tf < tg {
            beta
        } else {
            Some(beta? + gamma?)
        }
    }

    /// Draws the latent lifetime `T*`.
    pub fn sample_event<R: Rng + ?Sized>(&self, rng: &mut R) -> EventTime {
        let susceptible = self.p == 1.0 || rng.random::<f64>() < self.p;
        let u: f64 = rng.random();
        if susceptible {
            EventTime::At(self.lifetime.quantile(u))
        } else {
            EventTime::Never
        }
    }

    /// Draws one observation `(min(T*, U), 1{T* <= U})`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Observation {
        let event = self.sample_event(rng);
        let u = self.censoring.quantile(rng.random());
        match event {
            EventTime::At(t) if event.occurs_by(u) => Observation { time: t, uncensored: true },
            _ => Observation { time: u, uncensored: false },
        }
    }
}

impl std::fmt::Display for CureModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p = {}, F = {}, G = {}", self.p, self.lifetime, self.censoring)
    }
}
