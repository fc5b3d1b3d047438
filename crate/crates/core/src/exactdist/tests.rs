use super::*;
use crate::distmodel::DistributionSpec;

fn unit_uniform() -> CureModel {
    let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
    CureModel::new(u, u, 1.0).unwrap()
}

/// Lifetime Exp(1), censoring U[0, tau_g], p = 0.7.
fn table_model(tau_g: f64) -> CureModel {
    CureModel::new(
        DistributionSpec::exponential(1.0).unwrap(),
        DistributionSpec::uniform(0.0, tau_g).unwrap(),
        0.7,
    )
    .unwrap()
}

fn exact(model: &CureModel, n: u64) -> ExactDist {
    ExactDist::new(model, n, QuadratureConfig::default()).unwrap()
}

/// Composite Simpson rule, used only as an independent oracle.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Unit uniform model written out by hand: H(t) = 2t - t^2,
/// C(a, b) = ∫_a^b (1 - z) dz, dU(t) = (1 - t) dt.
mod uu {
    pub fn h(t: f64) -> f64 {
        2.0 * t - t * t
    }
    pub fn c(a: f64, b: f64) -> f64 {
        let (a, b) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
        (b - a) - (b * b - a * a) / 2.0
    }
    pub fn diff_cdf(n: i32, u: f64) -> f64 {
        let f = |t: f64| n as f64 * (c(t, t + u) + h(t)).powi(n - 1) * (1.0 - t);
        super::simpson(f, 0.0, 1.0, 20_000) + c(0.0, u).powi(n)
    }
    pub fn ratio_num(n: i32, v: f64) -> f64 {
        let f = |t: f64| n as f64 * (c(t, t * v) + h(t)).powi(n - 1) * (1.0 - t);
        super::simpson(f, 0.0, 1.0, 20_000)
    }
}

#[test]
fn marginal_examples() {
    let e = exact(&unit_uniform(), 2);
    assert!((e.mu_cdf(0.5).unwrap().value - 0.765625).abs() < 1e-14);
    assert!((e.mu_cdf(0.0).unwrap().value - 0.25).abs() < 1e-14);
    assert!((e.all_censored_prob() - 0.25).abs() < 1e-15);
    assert_eq!(e.m_cdf(1.0).unwrap().value, 1.0);
    assert!((e.m_cdf(0.5).unwrap().value - 0.5625).abs() < 1e-14);
    assert!(e.m_cdf(-1.0).is_err());
}

#[test]
fn joint_mu_m_examples() {
    let e = exact(&unit_uniform(), 2);
    assert!((e.joint_mu_m(0.0, 0.5).unwrap().value - 0.140625).abs() < 1e-14);
    assert!((e.joint_mu_m(0.25, 0.75).unwrap().value - 0.47265625).abs() < 1e-14);
    assert!((e.joint_mu_m(0.75, 0.25).unwrap().value - uu::h(0.25).powi(2)).abs() < 1e-14);
    assert_eq!(e.joint_mu_m(1.0, 1.0).unwrap().value, 1.0);
}

#[test]
fn joint_marginal_consistency() {
    for model in [unit_uniform(), table_model(1.0), table_model(3.0)] {
        for n in [2, 20, 500] {
            let e = exact(&model, n);
            let tau = model.tau_h();
            for k in 0..20 {
                let z = tau * (k as f64 + 0.37) / 20.0;
                let a = e.joint_mu_m(tau, z).unwrap().value;
                assert!((a - e.m_cdf(z).unwrap().value).abs() < 1e-8);
                let b = e.joint_mu_m(z, tau).unwrap().value;
                assert!((b - e.mu_cdf(z).unwrap().value).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn diff_atom_unit_uniform_pair() {
    let e = exact(&unit_uniform(), 2);
    assert!((e.diff_cdf(0.0).unwrap().value - 0.5).abs() < 1e-12);
    assert_eq!(e.diff_cdf(1.0).unwrap().value, 1.0);
}

#[test]
fn diff_matches_simpson_oracle() {
    let model = unit_uniform();
    for n in [2, 5, 12] {
        let e = exact(&model, n as u64);
        for &u in &[0.0, 0.05, 0.2, 0.5, 0.9] {
            let got = e.diff_cdf(u).unwrap().value;
            let want = uu::diff_cdf(n, u);
            assert!((got - want).abs() < 1e-9, "n={n} u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn total_mass_identity() {
    for model in [unit_uniform(), table_model(1.0), table_model(4.0)] {
        for n in [2, 10, 100, 20_000] {
            let e = exact(&model, n);
            let lhs = e.uncensored_max_mass().unwrap().value;
            let rhs = e.prob_some_uncensored();
            let tol = if n >= 20_000 { 1e-6 } else { 1e-8 };
            assert!((lhs - rhs).abs() < tol, "n={n}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn diff_reaches_one_at_tau_h() {
    for model in [unit_uniform(), table_model(2.0)] {
        for n in [2, 10, 100] {
            let e = exact(&model, n);
            let just_below = e.diff_cdf(model.tau_h() * (1.0 - 1e-12)).unwrap().value;
            assert!((just_below - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn transformed_and_plain_paths_agree() {
    let model = table_model(1.0);
    let plain = exact(&model, 500).with_transform_threshold(u64::MAX);
    let forced = exact(&model, 500).with_transform_threshold(1);
    for &u in &[0.0, 0.02, 0.05, 0.1, 0.2] {
        let a = plain.diff_cdf(u).unwrap().value;
        let b = forced.diff_cdf(u).unwrap().value;
        assert!((a - b).abs() < 1e-8, "u={u}: {a} vs {b}");
    }
}

#[test]
fn joint_mu_ncgt_examples() {
    let model = unit_uniform();
    let e = exact(&model, 2);
    assert!((e.joint_mu_ncgt(1.0, 1).unwrap().value - 0.25).abs() < 1e-12);
    assert!(e.joint_mu_ncgt(1.0, 2).is_err());
    assert!(e.joint_mu_ncgt(1.5, 0).is_err());

    for model in [unit_uniform(), table_model(1.0)] {
        let e = exact(&model, 5);
        let total: f64 = (0..5).map(|r| e.joint_mu_ncgt(model.tau_h(), r).unwrap().value).sum();
        assert!((total + e.all_censored_prob() - 1.0).abs() < 1e-8);
        let r0 = e.joint_mu_ncgt(model.tau_h(), 0).unwrap().value;
        assert!((r0 - e.diff_atom().unwrap().value).abs() < 1e-9);
    }
}

#[test]
fn joint_mu_ncgt_large_n_log_space() {
    let model = table_model(1.0);
    let e = exact(&model, 2000);
    let total: f64 = (0..60).map(|r| e.joint_mu_ncgt(1.0, r).unwrap().value).sum();
    assert!(total.is_finite() && total <= 1.0 + 1e-8);
}

#[test]
fn ratio_examples() {
    let model = unit_uniform();
    let e = exact(&model, 3);
    assert_eq!(e.ratio_cdf(0.99).unwrap().value, 0.0);
    let at_one = e.ratio_cdf(1.0).unwrap().value;
    let want = e.diff_atom().unwrap().value / e.prob_some_uncensored();
    assert!((at_one - want).abs() < 1e-10);
    for &v in &[1.2, 2.0, 5.0] {
        let got = e.ratio_cdf(v).unwrap().value;
        let want = uu::ratio_num(3, v) / (1.0 - 0.5f64.powi(3));
        assert!((got - want).abs() < 1e-9, "v={v}");
    }
    assert!((e.ratio_cdf(1e9).unwrap().value - 1.0).abs() < 1e-9);
}

#[test]
fn ratio_degenerate_model() {
    let model = CureModel::new(
        DistributionSpec::uniform(5.0, 6.0).unwrap(),
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        1.0,
    )
    .unwrap();
    let e = exact(&model, 3);
    assert!(matches!(e.ratio_cdf(2.0), Err(Error::DegenerateModel(_))));
}

#[test]
fn counts_pmf_examples() {
    let model = unit_uniform();
    let e = exact(&model, 3);
    let q = 0.375 / 0.875;
    assert!((e.counts_pmf(0.5, 0, 1, 1).unwrap() - 2.0 * q * q).abs() < 1e-14);
    assert!(e.counts_pmf(0.5, 1, 1, 1).is_err());

    for model in [unit_uniform(), table_model(2.0)] {
        let e = exact(&model, 6);
        let t = 0.4 * model.tau_h();
        let (pgt, _, _) = model.p_functions(t).unwrap();
        let mut total = 0.0;
        for r in 0..=5u64 {
            let mut marginal = 0.0;
            for s in 0..=5 - r {
                let p = e.counts_pmf(t, r, s, 5 - r - s).unwrap();
                total += p;
                marginal += p;
            }
            assert!((marginal - binomial_pmf(5, r, pgt)).abs() < 1e-12);
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ncgt_given_nc_examples() {
    let e = exact(&unit_uniform(), 5);
    assert!((e.ncgt_given_nc_pmf(0.5, 0, 0).unwrap() - 1.0).abs() < 1e-15);
    let want = 4.0 * 0.25 * 0.75f64.powi(3);
    assert!((e.ncgt_given_nc_pmf(0.5, 4, 1).unwrap() - want).abs() < 1e-14);
    let s: f64 = (0..=4).map(|r| e.ncgt_given_nc_pmf(0.3, 4, r).unwrap()).sum();
    assert!((s - 1.0).abs() < 1e-13);
    assert!(e.ncgt_given_nc_pmf(0.5, 5, 1).is_err());
}

#[test]
fn all_censored_obs_examples() {
    let model = unit_uniform();
    assert!((all_censored_obs_cdf(&model, &[0.5, 1.0]).unwrap() - 0.75).abs() < 1e-14);
    assert_eq!(all_censored_obs_cdf(&model, &[1.0, 1.0, 1.0]).unwrap(), 1.0);
    assert_eq!(all_censored_obs_cdf(&model, &[0.0, 0.7]).unwrap(), 0.0);
    let e = exact(&model, 2);
    let q = ExactQuery::AllCensoredObsCdf { t: vec![0.5, 1.0] };
    assert!((e.evaluate(&q).unwrap().value - 0.75).abs() < 1e-14);
    assert!(e.evaluate(&ExactQuery::AllCensoredObsCdf { t: vec![0.5] }).is_err());
}

#[test]
fn monotone_on_grid() {
    let model = table_model(1.0);
    let e = exact(&model, 50);
    let mut prev = [0.0f64; 4];
    for k in 0..=200 {
        let x = k as f64 / 200.0;
        let now = [
            e.m_cdf(x).unwrap().value,
            e.mu_cdf(x).unwrap().value,
            e.diff_cdf(x).unwrap().value,
            e.ratio_cdf(1.0 + 4.0 * x).unwrap().value,
        ];
        for (a, b) in prev.iter().zip(now) {
            assert!(b >= a - 1e-12, "k={k}");
        }
        prev = now;
    }
}

#[test]
fn quantile_below_atom_is_zero() {
    let e = exact(&unit_uniform(), 2);
    assert_eq!(e.quantile(Statistic::Diff, 0.4).unwrap(), 0.0);
    assert_eq!(e.quantile(Statistic::Mu, 0.2).unwrap(), 0.0);
    let q = e.quantile(Statistic::M, 0.5625).unwrap();
    assert!((q - 0.5).abs() < 1e-6);
    assert!(e.quantile(Statistic::M, 1.0).is_err());
}

#[test]
fn table_one_spot_values() {
    let q = exact(&table_model(1.0), 50).quantile(Statistic::Diff, 0.95).unwrap();
    assert!((q - 0.528).abs() < 0.005, "{q}");
    let q = exact(&table_model(2.0), 100).quantile(Statistic::Diff, 0.95).unwrap();
    assert!((q - 0.796).abs() < 0.005, "{q}");
}
