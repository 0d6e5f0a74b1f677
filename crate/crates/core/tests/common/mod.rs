#![allow(dead_code)]

use pcmbranch::milp_builder::{MilpProblem, Sense};

/// Exhaustive oracle: every commitment vector, each resulting LP solved by
/// minilp. `None` when no commitment is feasible.
pub fn enumerate_optimum(prob: &MilpProblem) -> Option<f64> {
    let bins: Vec<usize> = (0..prob.n_vars).filter(|&j| prob.is_binary[j]).collect();
    assert!(bins.len() <= 16, "{} binaries is too many to enumerate", bins.len());
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut p = minilp::Problem::new(minilp::OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..prob.n_vars)
            .map(|j| {
                let bounds = match bins.iter().position(|&b| b == j) {
                    Some(k) => {
                        let v = f64::from((mask >> k) & 1);
                        (v, v)
                    }
                    None => (prob.var_lb[j], prob.var_ub[j]),
                };
                p.add_var(prob.objective[j], bounds)
            })
            .collect();
        for row in &prob.rows {
            let expr: Vec<_> = row.coefs.iter().map(|&(j, a)| (vars[j], a)).collect();
            let op = match row.sense {
                Sense::Le => minilp::ComparisonOp::Le,
                Sense::Ge => minilp::ComparisonOp::Ge,
                Sense::Eq => minilp::ComparisonOp::Eq,
            };
            p.add_constraint(expr.as_slice(), op, row.rhs);
        }
        if let Ok(sol) = p.solve() {
            let v = sol.objective();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}
