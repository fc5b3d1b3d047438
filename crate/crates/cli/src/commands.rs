//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use censmax::asymptotics::{classify, diff_limit_quantile, norming};
use censmax::config::load_model;
use censmax::exactdist::{ExactDist, ExactQuery, Statistic};
use censmax::followup::{ingest_csv, test_sufficient_followup};
use censmax::montecarlo::{draw_sample, simulate, verify_split, verify_split_given_m, SplitSetup};
use censmax::quadrature::QuadratureConfig;
use censmax::{CureModel, DistributionSpec};

use crate::output::{sink, Cell, Format, Table};
use crate::{CdfStatistic, Command, FollowupFormat, Lifetime, OutputArgs, QuantileStatistic};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Table1 { tau_g, n, p, level, lifetime, output } => {
            emit(&table1(&tau_g, &n, p, level, lifetime)?, &output)
        }
        Command::Cdf { model, n, statistic, grid, upper, output } => {
            emit(&cdf_grid(&load(&model)?, n, statistic, grid, upper)?, &output)
        }
        Command::Quantile { model, n, statistic, level, output } => {
            emit(&quantiles(&load(&model)?, n, statistic, &level)?, &output)
        }
        Command::Simulate { model, n, reps, seed, sample, output } => {
            let model = load(&model)?;
            let mut w = open(&output)?;
            if sample {
                draw_sample(&model, n, seed)?.write_csv(&mut w)?;
                return Ok(());
            }
            let summaries = simulate(&model, n, reps, seed)?;
            let mut t = Table::new(&["rep", "M", "Mu", "n_u", "n_c", "n_c_gt", "n_c_lt", "n_u_lt", "q_n"]);
            for (rep, s) in summaries.iter().enumerate() {
                t.push(vec![
                    (rep as u64).into(),
                    s.m.into(),
                    s.mu.into(),
                    s.n_u.into(),
                    s.n_c.into(),
                    s.n_c_gt.into(),
                    s.n_c_lt.into(),
                    s.n_u_lt.into(),
                    s.q_n.into(),
                ]);
            }
            t.write(w, output.format)?;
            Ok(())
        }
        Command::VerifySplit { model, n, t_bin, m_bin, r, reps, seed, shift, output } => {
            let model = load(&model)?;
            let t_bin = match t_bin {
                Some(b) => (b[0], b[1]),
                None => {
                    let exact = ExactDist::new(&model, n as u64, QuadratureConfig::default())?;
                    (exact.quantile(Statistic::Mu, 0.45)?, exact.quantile(Statistic::Mu, 0.55)?)
                }
            };
            let mut setup = SplitSetup::new(n, t_bin, r, reps, seed);
            setup.reference_shift = shift;
            let report = match m_bin {
                Some(b) => verify_split_given_m(&model, &setup, (b[0], b[1]))?,
                None => verify_split(&model, &setup)?,
            };
            let ps = report.p_values();
            let k = ps.len() as f64;
            let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
            let mut t = Table::new(&["test", "p_value", "adjusted_p_value", "result", "note"]);
            for (name, p) in &ps {
                let adj = (p * k).min(1.0);
                t.push(vec![(*name).into(), (*p).into(), adj.into(), verdict(adj > report.alpha).into(), Cell::Empty]);
            }
            let note = format!(
                "t_bin=({}, {}); r={}; qualifying={} of {}; alpha={}{}",
                report.t_bin.0,
                report.t_bin.1,
                report.r,
                report.qualifying,
                report.reps,
                report.alpha,
                report.notes.iter().map(|s| format!("; {s}")).collect::<String>()
            );
            t.push(vec!["overall".into(), Cell::Empty, Cell::Empty, verdict(report.passed).into(), note.into()]);
            emit(&t, &output)
        }
        Command::FollowupTest { data, model, alpha, out, format } => {
            let model = load(&model)?;
            let data = ingest_csv(&data).with_context(|| format!("reading {}", data.display()))?;
            let result = test_sufficient_followup(&data, &model, alpha)?;
            let mut w = sink(out.as_deref())?;
            match format {
                FollowupFormat::Text => {
                    writeln!(w, "{result}")?;
                    writeln!(w)?;
                    write!(w, "{}", result.key_value_lines())?;
                }
                FollowupFormat::Csv | FollowupFormat::JsonLines => {
                    let mut t = Table::new(&[
                        "n",
                        "alpha",
                        "q_observed",
                        "critical_value",
                        "p_value_bound",
                        "decision",
                        "null_model",
                    ]);
                    t.push(vec![
                        result.n.into(),
                        result.alpha.into(),
                        result.q_observed.into(),
                        result.critical_value.into(),
                        result.p_value_bound.into(),
                        result.decision.as_str().into(),
                        result.null_model.clone().into(),
                    ]);
                    let f = if format == FollowupFormat::Csv { Format::Csv } else { Format::JsonLines };
                    t.write(&mut w, f)?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<CureModel> {
    Ok(load_model(path)?)
}

fn open(output: &OutputArgs) -> Result<Box<dyn Write>> {
    let target = output.out.as_deref();
    sink(target).with_context(|| format!("opening {}", target.map_or("stdout".into(), |p| p.display().to_string())))
}

fn emit(table: &Table, output: &OutputArgs) -> Result<()> {
    table.write(open(output)?, output.format)?;
    Ok(())
}

/// Lifetime law of the table model.
fn table1_lifetime(lifetime: Lifetime) -> censmax::Result<DistributionSpec> {
    match lifetime {
        Lifetime::Truncexp => DistributionSpec::truncated_exponential(1.0, 4.61),
        Lifetime::Exponential => DistributionSpec::exponential(1.0),
    }
}

struct Table1Cell {
    unscaled: f64,
    b_n: f64,
}

pub(crate) fn table1(tau_g: &[f64], ns: &[u64], p: f64, level: f64, lifetime: Lifetime) -> Result<Table> {
    if tau_g.is_empty() || ns.is_empty() {
        bail!(censmax::Error::InvalidParameter("need at least one tau_G and one n".into()));
    }
    let f = table1_lifetime(lifetime)?;
    let models: Vec<CureModel> = tau_g
        .iter()
        .map(|&tg| CureModel::new(f, DistributionSpec::uniform(0.0, tg)?, p))
        .collect::<censmax::Result<_>>()?;
    let jobs: Vec<(usize, u64)> = (0..models.len()).flat_map(|i| ns.iter().map(move |&n| (i, n))).collect();
    let cells: Vec<Table1Cell> = jobs
        .par_iter()
        .map(|&(i, n)| -> Result<Table1Cell> {
            let model = &models[i];
            let ctx = || format!("tau_G = {}, n = {n}", tau_g[i]);
            let exact = ExactDist::new(model, n, QuadratureConfig::default()).with_context(ctx)?;
            let unscaled = exact.quantile(Statistic::Diff, level).with_context(ctx)?;
            let (_, b_n) = norming(model, &classify(model), n as f64).with_context(ctx)?;
            Ok(Table1Cell { unscaled, b_n })
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(&["tau_G", "n", "quantile_unscaled", "b_n", "quantile_scaled", "limit_quantile", "note"]);
    for (i, model) in models.iter().enumerate() {
        let limit = diff_limit_quantile(&classify(model), level)
            .with_context(|| format!("limit law at tau_G = {}", tau_g[i]))?;
        for (j, &n) in ns.iter().enumerate() {
            let c = &cells[i * ns.len() + j];
            t.push(vec![
                tau_g[i].into(),
                n.to_string().into(),
                c.unscaled.into(),
                c.b_n.into(),
                (c.b_n * c.unscaled).into(),
                limit.into(),
                Cell::Empty,
            ]);
        }
        // the limit rate is linear in p, so the quantile scales as p^(-1/2)
        let with_p_squared = limit / p.sqrt();
        t.push(vec![
            tau_g[i].into(),
            "inf".into(),
            0.0.into(),
            Cell::Empty,
            limit.into(),
            limit.into(),
            format!(
                "limit-discrepancy: closed-form limit {limit:.2}; the same formula with p^2 in place of p gives {with_p_squared:.2}"
            )
            .into(),
        ]);
    }
    Ok(t)
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

pub(crate) fn cdf_grid(
    model: &CureModel,
    n: u64,
    statistic: CdfStatistic,
    grid: usize,
    upper: Option<f64>,
) -> Result<Table> {
    if grid < 2 {
        bail!(censmax::Error::InvalidParameter(format!("grid resolution must be at least 2, got {grid}")));
    }
    let exact = ExactDist::new(model, n, QuadratureConfig::default())?;
    let (lo, default_hi, arg) = match statistic {
        CdfStatistic::M => (0.0, model.h_upper(), "x"),
        CdfStatistic::Mu => (0.0, model.tau_j().min(model.j_upper()), "t"),
        CdfStatistic::Diff => (0.0, model.h_upper(), "u"),
        CdfStatistic::Ratio => (1.0, 5.0, "v"),
        CdfStatistic::JointMuM => (0.0, model.tau_j().min(model.j_upper()), "t"),
    };
    let hi = upper.unwrap_or(default_hi);
    if !(hi > lo) {
        bail!(censmax::Error::InvalidParameter(format!("grid upper end {hi} must exceed {lo}")));
    }
    let points = linspace(lo, hi, grid);
    if statistic == CdfStatistic::JointMuM {
        let xs = linspace(0.0, upper.unwrap_or(model.h_upper()), grid);
        let pairs: Vec<(f64, f64)> = points.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        let values = pairs
            .par_iter()
            .map(|&(t, x)| exact.evaluate(&ExactQuery::JointMuM { t, x }))
            .collect::<censmax::Result<Vec<_>>>()?;
        let mut table = Table::new(&["t", "x", "cdf", "error_estimate"]);
        for ((t, x), v) in pairs.into_iter().zip(values) {
            table.push(vec![t.into(), x.into(), v.value.into(), v.error_estimate.into()]);
        }
        return Ok(table);
    }
    let query = |a: f64| match statistic {
        CdfStatistic::M => ExactQuery::M { x: a },
        CdfStatistic::Mu => ExactQuery::Mu { t: a },
        CdfStatistic::Diff => ExactQuery::Diff { u: a },
        CdfStatistic::Ratio => ExactQuery::Ratio { v: a },
        CdfStatistic::JointMuM => unreachable!("handled above"),
    };
    let values = points
        .par_iter()
        .map(|&a| exact.evaluate(&query(a)))
        .collect::<censmax::Result<Vec<_>>>()?;
    let mut table = Table::new(&[arg, "cdf", "error_estimate"]);
    for (a, v) in points.into_iter().zip(values) {
        table.push(vec![a.into(), v.value.into(), v.error_estimate.into()]);
    }
    Ok(table)
}

pub(crate) fn quantiles(model: &CureModel, n: u64, statistic: QuantileStatistic, levels: &[f64]) -> Result<Table> {
    let exact = ExactDist::new(model, n, QuadratureConfig::default())?;
    let (stat, name) = match statistic {
        QuantileStatistic::M => (Statistic::M, "M"),
        QuantileStatistic::Mu => (Statistic::Mu, "Mu"),
        QuantileStatistic::Diff => (Statistic::Diff, "Diff"),
    };
    let mut t = Table::new(&["statistic", "n", "level", "quantile"]);
    for &level in levels {
        let q = exact.quantile(stat, level).with_context(|| format!("{name} quantile at level {level}"))?;
        t.push(vec![name.into(), n.into(), level.into(), q.into()]);
    }
    Ok(t)
}
