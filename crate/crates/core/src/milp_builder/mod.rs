//! Construction of the unit-commitment MILP from a [`PcmInstance`].
//!
//! Columns are laid out kind-major (generator power, line flow, farm output,
//! curtailment, commitment, bus angle), then by entity, then by hour. Rows are
//! emitted family by family in the same entity/hour order, so the output is a
//! pure function of the instance.
//!
//! Row accounting, with `B` buses, `G` generators, `L` lines, `F` farms and
//! horizon `T`:
//!
//! | family            | rows          |
//! |-------------------|---------------|
//! | power balance     | `B*T`         |
//! | capacity (lo, hi) | `2*G*T`       |
//! | ramp (up, down)   | `2*G*(T-1)`   |
//! | min up / min down | `2*G*(T-1)`   |
//! | reserve up / down | `2*T`         |
//! | renewable split   | `F*T`         |
//! | reference angle   | `T` (DC only) |
//! | flow definition   | `L*T` (DC only) |
//!
//! Line limits are column bounds, not rows.

mod feasibility;
mod mps;

pub use feasibility::{check_feasibility, FeasibilityReport};
pub use mps::write_mps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm_model::PcmInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    GenPower,
    LineFlow,
    FarmOutput,
    Curtailment,
    Commit,
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub kind: ColumnKind,
    pub entity: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFamily {
    Balance,
    CapacityMin,
    CapacityMax,
    RampUp,
    RampDown,
    MinUp,
    MinDown,
    ReserveUp,
    ReserveDown,
    Renewable,
    AngleReference,
    FlowDefinition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub family: RowFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowModel {
    /// Line flows limited only by their bounds.
    Transport,
    /// Adds bus angles and ties each flow to its angle difference.
    DcAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub var_lb: Vec<f64>,
    pub var_ub: Vec<f64>,
    pub is_binary: Vec<bool>,
    pub col_meta: Vec<ColumnMeta>,
}

impl MilpProblem {
    /// A generic problem without unit-commitment column tags.
    pub fn from_parts(
        objective: Vec<f64>,
        var_lb: Vec<f64>,
        var_ub: Vec<f64>,
        is_binary: Vec<bool>,
        rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
    ) -> Result<Self> {
        let n = objective.len();
        let prob = Self {
            n_vars: n,
            objective,
            rows: rows
                .into_iter()
                .map(|(coefs, sense, rhs)| Row {
                    coefs,
                    sense,
                    rhs,
                    family: RowFamily::Balance,
                })
                .collect(),
            var_lb,
            var_ub,
            col_meta: (0..n)
                .map(|j| ColumnMeta {
                    kind: if is_binary.get(j).copied().unwrap_or(false) {
                        ColumnKind::Commit
                    } else {
                        ColumnKind::GenPower
                    },
                    entity: j,
                    t: 0,
                })
                .collect(),
            is_binary,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_binary(&self) -> usize {
        self.is_binary.iter().filter(|&&b| b).count()
    }

    pub fn n_continuous(&self) -> usize {
        self.n_vars - self.n_binary()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Checks the structural invariants of the problem.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars;
        for len in [
            self.objective.len(),
            self.var_lb.len(),
            self.var_ub.len(),
            self.is_binary.len(),
            self.col_meta.len(),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        for j in 0..n {
            if self.is_binary[j] && (self.var_lb[j] != 0.0 || self.var_ub[j] != 1.0) {
                return Err(Error::InvalidInstance(format!("binary column {j} must have [0,1] bounds")));
            }
            if !self.objective[j].is_finite() || self.var_lb[j] > self.var_ub[j] {
                return Err(Error::InvalidInstance(format!("column {j}: bad objective or bounds")));
            }
        }
        if self.rows.iter().flat_map(|r| &r.coefs).any(|&(j, _)| j >= n) {
            return Err(Error::InvalidInstance("row references a missing column".into()));
        }
        Ok(())
    }
}

/// A full assignment of the problem's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub values: Vec<f64>,
    pub objective_value: f64,
}

impl Schedule {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Column index arithmetic shared by the builder and the feasibility checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnLayout {
    pub n_bus: usize,
    pub n_gen: usize,
    pub n_line: usize,
    pub n_farm: usize,
    pub horizon: usize,
    pub flow_model: FlowModel,
}

impl ColumnLayout {
    pub fn new(inst: &PcmInstance, flow_model: FlowModel) -> Self {
        Self {
            n_bus: inst.buses.len(),
            n_gen: inst.generators.len(),
            n_line: inst.lines.len(),
            n_farm: inst.farms.len(),
            horizon: inst.horizon_t,
            flow_model,
        }
    }

    pub fn gen_power(&self, g: usize, t: usize) -> usize {
        g * self.horizon + t
    }

    pub fn line_flow(&self, l: usize, t: usize) -> usize {
        (self.n_gen + l) * self.horizon + t
    }

    pub fn farm_output(&self, f: usize, t: usize) -> usize {
        (self.n_gen + self.n_line + f) * self.horizon + t
    }

    pub fn curtailment(&self, f: usize, t: usize) -> usize {
        (self.n_gen + self.n_line + self.n_farm + f) * self.horizon + t
    }

    pub fn commit(&self, g: usize, t: usize) -> usize {
        (self.n_gen + self.n_line + 2 * self.n_farm + g) * self.horizon + t
    }

    pub fn angle(&self, b: usize, t: usize) -> usize {
        debug_assert_eq!(self.flow_model, FlowModel::DcAngle);
        (2 * self.n_gen + self.n_line + 2 * self.n_farm + b) * self.horizon + t
    }

    pub fn n_continuous(&self) -> usize {
        let per_hour = self.n_gen + self.n_line + 2 * self.n_farm;
        let angles = match self.flow_model {
            FlowModel::Transport => 0,
            FlowModel::DcAngle => self.n_bus,
        };
        (per_hour + angles) * self.horizon
    }

    pub fn n_binary(&self) -> usize {
        self.n_gen * self.horizon
    }

    pub fn n_cols(&self) -> usize {
        self.n_continuous() + self.n_binary()
    }

    /// Row count from the table in the module documentation.
    pub fn n_rows(&self) -> usize {
        let t = self.horizon;
        let tm1 = t.saturating_sub(1);
        let base = self.n_bus * t + 2 * self.n_gen * t + 4 * self.n_gen * tm1 + 2 * t + self.n_farm * t;
        match self.flow_model {
            FlowModel::Transport => base,
            FlowModel::DcAngle => base + t + self.n_line * t,
        }
    }
}

fn push_row(rows: &mut Vec<Row>, mut coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64, family: RowFamily) {
    coefs.sort_by_key(|&(j, _)| j);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coefs.len());
    for (j, a) in coefs {
        match merged.last_mut() {
            Some((lj, la)) if *lj == j => *la += a,
            _ => merged.push((j, a)),
        }
    }
    merged.retain(|&(_, a)| a != 0.0);
    rows.push(Row {
        coefs: merged,
        sense,
        rhs,
        family,
    });
}

/// Builds the MILP for `inst`.
///
/// Rejects instances whose up-reserve requirement exceeds installed
/// capacity plus renewable forecast at some hour, since those are infeasible
/// regardless of commitment.
pub fn build_milp(inst: &PcmInstance, flow_model: FlowModel) -> Result<MilpProblem> {
    inst.validate()?;
    let lay = ColumnLayout::new(inst, flow_model);
    let horizon = inst.horizon_t;

    for t in 0..horizon {
        let required = inst.system_load(t) + inst.reserve_up[t];
        let available = inst.total_capacity() + inst.farms.iter().map(|f| f.forecast[t]).sum::<f64>();
        if required > available {
            return Err(Error::ReserveExceedsCapacity { t, required, available });
        }
    }

    let n = lay.n_cols();
    let mut objective = vec![0.0; n];
    let mut var_lb = vec![0.0; n];
    let mut var_ub = vec![0.0; n];
    let mut is_binary = vec![false; n];
    let mut col_meta = vec![
        ColumnMeta {
            kind: ColumnKind::GenPower,
            entity: 0,
            t: 0
        };
        n
    ];

    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon {
            let j = lay.gen_power(g, t);
            objective[j] = gen.marginal_cost;
            var_ub[j] = gen.p_max;
            col_meta[j] = ColumnMeta { kind: ColumnKind::GenPower, entity: g, t };
            let j = lay.commit(g, t);
            var_ub[j] = 1.0;
            is_binary[j] = true;
            col_meta[j] = ColumnMeta { kind: ColumnKind::Commit, entity: g, t };
        }
    }
    for (l, line) in inst.lines.iter().enumerate() {
        for t in 0..horizon {
            let j = lay.line_flow(l, t);
            var_lb[j] = line.p_min;
            var_ub[j] = line.p_max;
            col_meta[j] = ColumnMeta { kind: ColumnKind::LineFlow, entity: l, t };
        }
    }
    for (f, farm) in inst.farms.iter().enumerate() {
        for t in 0..horizon {
            let j = lay.farm_output(f, t);
            var_ub[j] = farm.forecast[t];
            col_meta[j] = ColumnMeta { kind: ColumnKind::FarmOutput, entity: f, t };
            let j = lay.curtailment(f, t);
            objective[j] = farm.curtail_penalty;
            var_ub[j] = farm.forecast[t];
            col_meta[j] = ColumnMeta { kind: ColumnKind::Curtailment, entity: f, t };
        }
    }
    if flow_model == FlowModel::DcAngle {
        // Loose enough never to bind before the line limits do.
        let theta_max = inst
            .lines
            .iter()
            .map(|l| l.p_max.abs().max(l.p_min.abs()) / l.susceptance)
            .sum::<f64>()
            .max(1.0);
        for b in 0..lay.n_bus {
            for t in 0..horizon {
                let j = lay.angle(b, t);
                var_lb[j] = -theta_max;
                var_ub[j] = theta_max;
                col_meta[j] = ColumnMeta { kind: ColumnKind::Angle, entity: b, t };
            }
        }
    }

    let mut rows = Vec::with_capacity(lay.n_rows());

    for b in 0..lay.n_bus {
        for t in 0..horizon {
            let mut coefs = Vec::new();
            for (g, gen) in inst.generators.iter().enumerate() {
                if gen.bus_id == b {
                    coefs.push((lay.gen_power(g, t), 1.0));
                }
            }
            for (l, line) in inst.lines.iter().enumerate() {
                if line.from_bus == b {
                    coefs.push((lay.line_flow(l, t), -1.0));
                }
                if line.to_bus == b {
                    coefs.push((lay.line_flow(l, t), 1.0));
                }
            }
            for (f, farm) in inst.farms.iter().enumerate() {
                if farm.bus_id == b {
                    coefs.push((lay.farm_output(f, t), 1.0));
                }
            }
            push_row(&mut rows, coefs, Sense::Eq, inst.load[b][t], RowFamily::Balance);
        }
    }

    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon {
            let coefs = vec![(lay.gen_power(g, t), 1.0), (lay.commit(g, t), -gen.p_min)];
            push_row(&mut rows, coefs, Sense::Ge, 0.0, RowFamily::CapacityMin);
        }
    }
    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon {
            let coefs = vec![(lay.gen_power(g, t), 1.0), (lay.commit(g, t), -gen.p_max)];
            push_row(&mut rows, coefs, Sense::Le, 0.0, RowFamily::CapacityMax);
        }
    }

    // P[t+1] - P[t] <= (u[t+1] - u[t]) p_min + ramp_up, and the mirror for ramp down.
    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon.saturating_sub(1) {
            let coefs = vec![
                (lay.gen_power(g, t + 1), 1.0),
                (lay.gen_power(g, t), -1.0),
                (lay.commit(g, t + 1), -gen.p_min),
                (lay.commit(g, t), gen.p_min),
            ];
            push_row(&mut rows, coefs, Sense::Le, gen.ramp_up, RowFamily::RampUp);
        }
    }
    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon.saturating_sub(1) {
            let coefs = vec![
                (lay.gen_power(g, t), 1.0),
                (lay.gen_power(g, t + 1), -1.0),
                (lay.commit(g, t), -gen.p_min),
                (lay.commit(g, t + 1), gen.p_min),
            ];
            push_row(&mut rows, coefs, Sense::Le, gen.ramp_down, RowFamily::RampDown);
        }
    }

    // Window sums run over hours t+1 ..= min(t + T_on, T) (1-based).
    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon.saturating_sub(1) {
            let k_end = (t + gen.t_on).min(horizon - 1);
            let mut coefs: Vec<(usize, f64)> = (t + 1..=k_end).map(|k| (lay.commit(g, k), 1.0)).collect();
            let ton = gen.t_on as f64;
            coefs.push((lay.commit(g, t + 1), -ton));
            coefs.push((lay.commit(g, t), ton));
            push_row(&mut rows, coefs, Sense::Ge, 0.0, RowFamily::MinUp);
        }
    }
    for (g, gen) in inst.generators.iter().enumerate() {
        for t in 0..horizon.saturating_sub(1) {
            let k_end = (t + gen.t_off).min(horizon - 1);
            let mut coefs: Vec<(usize, f64)> = (t + 1..=k_end).map(|k| (lay.commit(g, k), 1.0)).collect();
            let toff = gen.t_off as f64;
            coefs.push((lay.commit(g, t + 1), -toff));
            coefs.push((lay.commit(g, t), toff));
            push_row(&mut rows, coefs, Sense::Le, toff, RowFamily::MinDown);
        }
    }

    for t in 0..horizon {
        let mut coefs: Vec<(usize, f64)> = inst
            .generators
            .iter()
            .enumerate()
            .map(|(g, gen)| (lay.commit(g, t), gen.p_max))
            .collect();
        coefs.extend((0..lay.n_farm).map(|f| (lay.farm_output(f, t), 1.0)));
        let rhs = inst.system_load(t) + inst.reserve_up[t];
        push_row(&mut rows, coefs, Sense::Ge, rhs, RowFamily::ReserveUp);
    }
    for t in 0..horizon {
        let mut coefs: Vec<(usize, f64)> = inst
            .generators
            .iter()
            .enumerate()
            .map(|(g, gen)| (lay.commit(g, t), gen.p_min))
            .collect();
        coefs.extend((0..lay.n_farm).map(|f| (lay.farm_output(f, t), 1.0)));
        let rhs = inst.system_load(t) - inst.reserve_down[t];
        push_row(&mut rows, coefs, Sense::Le, rhs, RowFamily::ReserveDown);
    }

    for (f, farm) in inst.farms.iter().enumerate() {
        for t in 0..horizon {
            let coefs = vec![(lay.farm_output(f, t), 1.0), (lay.curtailment(f, t), 1.0)];
            push_row(&mut rows, coefs, Sense::Eq, farm.forecast[t], RowFamily::Renewable);
        }
    }

    if flow_model == FlowModel::DcAngle {
        for t in 0..horizon {
            push_row(&mut rows, vec![(lay.angle(0, t), 1.0)], Sense::Eq, 0.0, RowFamily::AngleReference);
        }
        for (l, line) in inst.lines.iter().enumerate() {
            for t in 0..horizon {
                let coefs = vec![
                    (lay.line_flow(l, t), 1.0),
                    (lay.angle(line.from_bus, t), -line.susceptance),
                    (lay.angle(line.to_bus, t), line.susceptance),
                ];
                push_row(&mut rows, coefs, Sense::Eq, 0.0, RowFamily::FlowDefinition);
            }
        }
    }

    debug_assert_eq!(rows.len(), lay.n_rows());
    let prob = MilpProblem {
        n_vars: n,
        objective,
        rows,
        var_lb,
        var_ub,
        is_binary,
        col_meta,
    };
    prob.validate()?;
    Ok(prob)
}
