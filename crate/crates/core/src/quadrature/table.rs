use super::{integrate_with_breaks, sort_dedup, QuadratureConfig};
use crate::error::Result;

type Integrand = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Running integral `x -> ∫_lo^x f` precomputed on a grid.
///
/// Whole panels are integrated once at construction; a query adds the
/// partial panels at its ends by direct quadrature, so lookups keep full
/// quadrature accuracy. Prefix and suffix sums are both stored and the one
/// with less cancellation is used.
pub struct CumulativeTable {
    nodes: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    integrand: Integrand,
    cfg: QuadratureConfig,
}

impl std::fmt::Debug for CumulativeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeTable")
            .field("panels", &(self.nodes.len() - 1))
            .field("lo", &self.nodes[0])
            .field("hi", &self.nodes[self.nodes.len() - 1])
            .finish()
    }
}

impl CumulativeTable {
    /// Builds the table on `[lo, hi]` with `panels` equal panels plus the
    /// given `breaks` (discontinuities of the integrand).
    pub fn build(
        integrand: Integrand,
        lo: f64,
        hi: f64,
        panels: usize,
        breaks: &[f64],
        cfg: QuadratureConfig,
    ) -> Result<Self> {
        let panels = panels.max(1);
        let mut nodes: Vec<f64> = (0..=panels)
            .map(|k| lo + (hi - lo) * k as f64 / panels as f64)
            .collect();
        nodes.extend(breaks.iter().copied().filter(|x| *x > lo && *x < hi));
        sort_dedup(&mut nodes);

        let mut pieces = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            pieces.push(integrate_with_breaks(&integrand, &[w[0], w[1]], &cfg)?.value);
        }
        let mut prefix = vec![0.0; nodes.len()];
        for (i, v) in pieces.iter().enumerate() {
            prefix[i + 1] = prefix[i] + v;
        }
        let mut suffix = vec![0.0; nodes.len()];
        for (i, v) in pieces.iter().enumerate().rev() {
            suffix[i] = suffix[i + 1] + v;
        }
        Ok(Self { nodes, prefix, suffix, integrand, cfg })
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn total(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    fn panel_of(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&node| node <= x);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn partial(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match integrate_with_breaks(&self.integrand, &[a, b], &self.cfg) {
            Ok(r) => r.value,
            Err(crate::Error::Quadrature { estimate, .. }) => estimate,
            Err(_) => f64::NAN,
        }
    }

    /// `∫_a^b f`, with `a` and `b` clamped to the table range.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(self.lo(), self.hi());
        let b = b.clamp(self.lo(), self.hi());
        if b <= a {
            return 0.0;
        }
        let ia = self.panel_of(a);
        let ib = self.panel_of(b);
        if ia == ib {
            return self.partial(a, b);
        }
        let left = self.partial(a, self.nodes[ia + 1]);
        let right = self.partial(self.nodes[ib], b);
        let by_prefix = self.prefix[ib] - self.prefix[ia + 1];
        let by_suffix = self.suffix[ia + 1] - self.suffix[ib];
        let middle = if self.prefix[ib] <= self.suffix[ia + 1] { by_prefix } else { by_suffix };
        left + middle + right
    }
}
