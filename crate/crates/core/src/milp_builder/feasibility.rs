use std::collections::BTreeMap;
use std::fmt;

use super::{ColumnLayout, FlowModel, Schedule};
use crate::error::{Error, Result};
use crate::pcm_model::PcmInstance;

/// Maximum violation per constraint family.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: BTreeMap<&'static str, f64>,
    pub tol: f64,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.values().all(|&v| v <= self.tol)
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.values().copied().fold(0.0, f64::max)
    }

    /// The family with the largest violation, if any exceeds the tolerance.
    pub fn worst_family(&self) -> Option<(&'static str, f64)> {
        self.violations
            .iter()
            .filter(|(_, &v)| v > self.tol)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (*k, *v))
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (family, v) in &self.violations {
            let mark = if *v <= self.tol { "ok" } else { "VIOLATED" };
            writeln!(f, "{family:<14} {v:>14.6e}  {mark}")?;
        }
        write!(f, "{}", if self.passed() { "feasible" } else { "infeasible" })
    }
}

/// Evaluates a schedule directly against the unit-commitment equations.
///
/// This does not reuse the rows emitted by `build_milp`; it recomputes every
/// constraint from the instance data so it can serve as an independent check
/// of both the builder and the solver. The flow model is inferred from the
/// schedule length.
pub fn check_feasibility(inst: &PcmInstance, sched: &Schedule, tol: f64) -> Result<FeasibilityReport> {
    let transport = ColumnLayout::new(inst, FlowModel::Transport);
    let dc = ColumnLayout::new(inst, FlowModel::DcAngle);
    let lay = if sched.values.len() == transport.n_cols() {
        transport
    } else if sched.values.len() == dc.n_cols() {
        dc
    } else {
        return Err(Error::DimensionMismatch {
            expected: transport.n_cols(),
            got: sched.values.len(),
        });
    };
    let x = &sched.values;
    let horizon = inst.horizon_t;
    let mut viol: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut note = |family: &'static str, v: f64| {
        let e = viol.entry(family).or_insert(0.0);
        *e = e.max(v.max(0.0));
    };
    let p = |g, t| x[lay.gen_power(g, t)];
    let u = |g, t| x[lay.commit(g, t)];
    let flow = |l, t| x[lay.line_flow(l, t)];
    let out = |f, t| x[lay.farm_output(f, t)];
    let curt = |f, t| x[lay.curtailment(f, t)];

    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon {
            let mu = u(g, t);
            note("integrality", (mu - mu.round()).abs());
            note("bounds", -mu);
            note("bounds", mu - 1.0);
            note("bounds", -p(g, t));
            note("capacity", mu * gen.p_min - p(g, t));
            note("capacity", p(g, t) - mu * gen.p_max);
        }
        for t in 0..horizon.saturating_sub(1) {
            let (mu0, mu1) = (u(g, t), u(g, t + 1));
            note("ramp", p(g, t + 1) - p(g, t) - ((mu1 - mu0) * gen.p_min + gen.ramp_up));
            note("ramp", p(g, t) - p(g, t + 1) - ((mu0 - mu1) * gen.p_min + gen.ramp_down));
            let on_end = (t + gen.t_on).min(horizon - 1);
            let on_sum: f64 = (t + 1..=on_end).map(|k| u(g, k)).sum();
            note("min_up", gen.t_on as f64 * (mu1 - mu0) - on_sum);
            let off_end = (t + gen.t_off).min(horizon - 1);
            let off_sum: f64 = (t + 1..=off_end).map(|k| u(g, k)).sum();
            note("min_down", off_sum - gen.t_off as f64 * (mu1 - mu0 + 1.0));
        }
    }

    for (l, line) in inst.lines.iter().enumerate() {
        for t in 0..horizon {
            note("line_limit", line.p_min - flow(l, t));
            note("line_limit", flow(l, t) - line.p_max);
        }
    }

    for (f, farm) in inst.farms.iter().enumerate() {
        for t in 0..horizon {
            note("bounds", -out(f, t));
            note("bounds", -curt(f, t));
            note("renewable", (out(f, t) + curt(f, t) - farm.forecast[t]).abs());
        }
    }

    for b in 0..inst.buses.len() {
        for t in 0..horizon {
            let mut lhs = 0.0;
            for (g, gen) in inst.generators.iter().enumerate() {
                if gen.bus_id == b {
                    lhs += p(g, t);
                }
            }
            for (l, line) in inst.lines.iter().enumerate() {
                if line.from_bus == b {
                    lhs -= flow(l, t);
                }
                if line.to_bus == b {
                    lhs += flow(l, t);
                }
            }
            for (f, farm) in inst.farms.iter().enumerate() {
                if farm.bus_id == b {
                    lhs += out(f, t);
                }
            }
            note("balance", (lhs - inst.load[b][t]).abs());
        }
    }

    for t in 0..horizon {
        let renew: f64 = (0..inst.farms.len()).map(|f| out(f, t)).sum();
        let committed_max: f64 = inst.generators.iter().enumerate().map(|(g, gen)| u(g, t) * gen.p_max).sum();
        let committed_min: f64 = inst.generators.iter().enumerate().map(|(g, gen)| u(g, t) * gen.p_min).sum();
        let d = inst.system_load(t);
        note("reserve_up", d + inst.reserve_up[t] - committed_max - renew);
        note("reserve_down", committed_min + renew - (d - inst.reserve_down[t]));
    }

    if lay.flow_model == FlowModel::DcAngle {
        for t in 0..horizon {
            note("angle", x[lay.angle(0, t)].abs());
            for (l, line) in inst.lines.iter().enumerate() {
                let dtheta = x[lay.angle(line.from_bus, t)] - x[lay.angle(line.to_bus, t)];
                note("angle", (flow(l, t) - line.susceptance * dtheta).abs());
            }
        }
    }

    Ok(FeasibilityReport { violations: viol, tol })
}
