use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::RuleSpec;
use crate::bnb_engine::Limits;
use crate::error::{Error, Result};
use crate::milp_builder::MilpProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub rule: String,
    pub work_units: u64,
    pub wall_seconds: f64,
    pub n_explored: u64,
    pub status: &'static str,
    pub objective: Option<f64>,
    pub gap: f64,
    /// Expert work units over this rule's, when the expert is in the campaign.
    pub speedup_vs_expert: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSummary {
    pub rule: String,
    pub n: usize,
    pub n_optimal: usize,
    pub mean_work: f64,
    pub var_work: f64,
    pub mean_nodes: f64,
    pub mean_speedup: Option<f64>,
    pub min_speedup: Option<f64>,
    pub median_speedup: Option<f64>,
    pub max_speedup: Option<f64>,
    /// This rule's work variance over the expert's.
    pub variance_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Instance-major, rules in the order given.
    pub rows: Vec<BenchRow>,
    pub summary: Vec<RuleSummary>,
}

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Runs every rule on every instance. Solves run in parallel; results are
/// ordered and independent of scheduling. With `out` set, writes
/// `report.csv`, `summary.csv` and `timings.csv` there.
pub fn bench(
    instances: &[(String, MilpProblem)],
    rules: &[RuleSpec],
    limits: Limits,
    out: Option<&Path>,
) -> Result<BenchReport> {
    if rules.is_empty() {
        return Err(Error::InvalidConfig("bench needs at least one rule".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..rules.len()).map(move |r| (i, r)))
        .collect();
    let states = jobs
        .par_iter()
        .map(|&(i, r)| rules[r].run(&instances[i].1, limits))
        .collect::<Result<Vec<_>>>()?;

    let expert = rules.iter().position(|r| matches!(r, RuleSpec::Expert));
    let mut rows = Vec::with_capacity(jobs.len());
    for (&(i, r), st) in jobs.iter().zip(&states) {
        let speedup = expert.map(|e| {
            let ew = states[i * rules.len() + e].work_units as f64;
            ew / (st.work_units as f64).max(1.0)
        });
        rows.push(BenchRow {
            instance: instances[i].0.clone(),
            rule: rules[r].label(),
            work_units: st.work_units,
            wall_seconds: st.wall_time,
            n_explored: st.n_explored,
            status: st.status.as_str(),
            objective: st.objective(),
            gap: st.gap(),
            speedup_vs_expert: speedup,
        });
    }

    let work_of = |r: usize| -> Vec<f64> {
        rows.iter().skip(r).step_by(rules.len()).map(|x| x.work_units as f64).collect()
    };
    let expert_var = expert.map(|e| variance(&work_of(e)));
    let summary = (0..rules.len())
        .map(|r| {
            let mine: Vec<&BenchRow> = rows.iter().skip(r).step_by(rules.len()).collect();
            let work = work_of(r);
            let mut sp: Vec<f64> = mine.iter().filter_map(|x| x.speedup_vs_expert).collect();
            sp.sort_by(f64::total_cmp);
            let var_work = variance(&work);
            RuleSummary {
                rule: rules[r].label(),
                n: mine.len(),
                n_optimal: mine.iter().filter(|x| x.status == "optimal").count(),
                mean_work: mean(&work),
                var_work,
                mean_nodes: mean(&mine.iter().map(|x| x.n_explored as f64).collect::<Vec<_>>()),
                mean_speedup: (!sp.is_empty()).then(|| mean(&sp)),
                min_speedup: sp.first().copied(),
                median_speedup: (!sp.is_empty()).then(|| median(&sp)),
                max_speedup: sp.last().copied(),
                variance_ratio: expert_var.filter(|&v| v > 0.0).map(|v| var_work / v),
            }
        })
        .collect();
    let report = BenchReport { rows, summary };
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(report)
}

impl BenchReport {
    /// Per-instance results without wall-clock times.
    pub fn report_csv(&self) -> String {
        let mut s = String::from("instance,rule,work_units,n_explored,status,objective,gap,speedup_vs_expert\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.instance,
                r.rule,
                r.work_units,
                r.n_explored,
                r.status,
                opt(r.objective),
                r.gap,
                opt(r.speedup_vs_expert)
            );
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "rule,n,n_optimal,mean_work,var_work,mean_nodes,mean_speedup,min_speedup,median_speedup,max_speedup,variance_ratio\n",
        );
        for r in &self.summary {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.rule,
                r.n,
                r.n_optimal,
                r.mean_work,
                r.var_work,
                r.mean_nodes,
                opt(r.mean_speedup),
                opt(r.min_speedup),
                opt(r.median_speedup),
                opt(r.max_speedup),
                opt(r.variance_ratio)
            );
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("instance,rule,wall_seconds\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:.6}", r.instance, r.rule, r.wall_seconds);
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.report_csv())?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("timings.csv"), self.timings_csv())?;
        Ok(())
    }

    /// Largest objective difference between optimal rules on one instance.
    pub fn max_objective_spread(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for inst in self.rows.chunk_by(|a, b| a.instance == b.instance) {
            let objs: Vec<f64> = inst
                .iter()
                .filter(|r| r.status == "optimal")
                .filter_map(|r| r.objective)
                .collect();
            if let (Some(lo), Some(hi)) = (
                objs.iter().copied().reduce(f64::min),
                objs.iter().copied().reduce(f64::max),
            ) {
                worst = worst.max(hi - lo);
            }
        }
        worst
    }
}
