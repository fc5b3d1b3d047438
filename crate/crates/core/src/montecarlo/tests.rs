use super::*;
use crate::distmodel::DistributionSpec;

fn unit_uniform() -> CureModel {
    let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
    CureModel::new(u, u, 1.0).unwrap()
}

fn obs(time: f64, uncensored: bool) -> Observation {
    Observation { time, uncensored }
}

#[test]
fn summary_examples() {
    let s = summarize(&[obs(1.0, true), obs(2.0, false)]).unwrap();
    assert_eq!((s.m, s.mu), (2.0, 1.0));
    assert_eq!((s.n_c_gt, s.n_c_lt, s.n_u_lt), (1, 0, 0));
    assert_eq!(s.q_n, 0.5);

    let s = summarize(&[obs(1.0, false), obs(3.0, false)]).unwrap();
    assert_eq!((s.mu, s.n_u, s.n_c_gt, s.q_n), (0.0, 0, 2, 0.0));

    let s = summarize(&[obs(0.7, true)]).unwrap();
    assert_eq!((s.m, s.mu, s.n_c_gt, s.q_n), (0.7, 0.7, 0, 0.0));

    assert!(summarize(&[]).is_err());
}

#[test]
fn summary_invariants_on_random_samples() {
    let model = CureModel::new(
        DistributionSpec::truncated_exponential(1.0, 4.61).unwrap(),
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        0.7,
    )
    .unwrap();
    let n = 7u64;
    let all = simulate(&model, n as usize, 100_000, 5).unwrap();
    for s in &all {
        assert_eq!(s.n_u + s.n_c, n);
        assert!(s.mu <= s.m);
        assert!((0.0..=1.0).contains(&s.q_n));
        if s.n_u >= 1 {
            assert_eq!(s.n_u_lt + s.n_c_lt + s.n_c_gt, n - 1);
            assert_eq!(s.n_c_gt == 0, s.mu == s.m);
        } else {
            assert_eq!(s.n_c_gt, n);
        }
    }
}

#[test]
fn deterministic_streams() {
    let model = unit_uniform();
    assert_eq!(draw_sample(&model, 50, 9).unwrap(), draw_sample(&model, 50, 9).unwrap());
    assert_ne!(draw_sample(&model, 50, 9).unwrap(), draw_sample(&model, 50, 10).unwrap());
    let a = simulate(&model, 5, 1000, 1).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| simulate(&model, 5, 1000, 1).unwrap());
    assert_eq!(a, b);
    assert!(draw_sample(&model, 0, 1).is_err());
}

#[test]
fn all_uncensored_when_censoring_is_late() {
    let model = CureModel::new(
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        DistributionSpec::uniform(2.0, 3.0).unwrap(),
        1.0,
    )
    .unwrap();
    assert!(draw_sample(&model, 1000, 4).unwrap().observations.iter().all(|o| o.uncensored));
}

#[test]
fn uncensored_fraction_unit_uniform() {
    let s = draw_sample(&unit_uniform(), 1_000_000, 17).unwrap();
    let frac = s.observations.iter().filter(|o| o.uncensored).count() as f64 / 1e6;
    assert!((frac - 0.5).abs() < 3.0 * (0.25f64 / 1e6).sqrt());
    assert!(s.observations.iter().all(|o| o.time > 0.0 && o.time.is_finite()));
}

#[test]
fn csv_outputs() {
    let mut buf = Vec::new();
    let summaries = simulate(&unit_uniform(), 3, 2, 1).unwrap();
    write_summaries_csv(&mut buf, &summaries).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("rep,M,Mu,n_u,n_c,n_c_gt,n_c_lt,n_u_lt,q_n\n0,"));
    assert_eq!(text.lines().count(), 3);

    let mut buf = Vec::new();
    draw_sample(&unit_uniform(), 2, 1).unwrap().write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("time,event\n"));
}

#[test]
fn ecdf_examples() {
    let model = unit_uniform();
    assert!(empirical_cdf(&model, 2, SummaryStatistic::M, 99, 1, 0.01).is_err());
    let e = empirical_cdf(&model, 2, SummaryStatistic::M, 200_000, 1, 0.01).unwrap();
    for k in 1..20 {
        let x = k as f64 / 20.0;
        let h = 2.0 * x - x * x;
        assert!(e.covers(x, h * h), "x={x}");
    }
    let d = empirical_cdf(&model, 2, SummaryStatistic::Diff, 200_000, 2, 0.01).unwrap();
    assert!(d.covers(0.0, 0.5));
    let small = empirical_cdf(&model, 2, SummaryStatistic::M, 100, 3, 0.01).unwrap();
    assert!(small.epsilon() >= e.epsilon());
}

#[test]
fn split_passes_under_true_null() {
    let model = unit_uniform();
    let setup = SplitSetup::new(20, (0.76, 0.84), 2, 200_000, 21);
    let rep = verify_split(&model, &setup).unwrap();
    assert!(rep.qualifying >= 200);
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.p_values().len(), 3);
}

#[test]
fn split_given_m_and_r_zero() {
    let model = unit_uniform();
    let setup = SplitSetup::new(20, (0.56, 0.64), 2, 200_000, 22);
    let rep = verify_split_given_m(&model, &setup, (0.9, 1.0)).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.two_sample.is_some());

    let setup = SplitSetup::new(20, (0.86, 0.94), 0, 100_000, 23);
    let rep = verify_split(&model, &setup).unwrap();
    assert!(rep.above.is_none() && rep.independence.is_none());
    assert!(rep.notes.iter().any(|n| n.contains("r=0")));
}

#[test]
fn split_rejects_false_null_and_thin_bins() {
    let model = unit_uniform();
    let mut setup = SplitSetup::new(20, (0.56, 0.64), 2, 200_000, 24);
    setup.reference_shift = 0.3;
    let rep = verify_split(&model, &setup).unwrap();
    assert!(rep.below.ks.p_value < 1e-6);
    assert!(!rep.passed);

    let setup = SplitSetup::new(20, (0.1, 0.11), 5, 1000, 25);
    assert!(matches!(verify_split(&model, &setup), Err(Error::InsufficientReplications { .. })));
    let setup = SplitSetup::new(20, (0.5, 1.5), 1, 1000, 25);
    assert!(matches!(verify_split(&model, &setup), Err(Error::Domain(_))));
}
