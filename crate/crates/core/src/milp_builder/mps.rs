use std::fmt::Write as _;

use super::{MilpProblem, Sense};

/// Formats `v` to fit the 12-character numeric fields of fixed MPS.
fn mps_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    for decimals in 0..=10 {
        let s = format!("{v:.decimals$}");
        if s.len() > 12 {
            break;
        }
        let back: f64 = s.parse().unwrap_or(f64::NAN);
        if (back - v).abs() <= 1e-12 * v.abs().max(1.0) {
            return s;
        }
    }
    for precision in (1..=8).rev() {
        let s = format!("{v:.precision$E}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.1E}")
}

fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

fn col_name(j: usize) -> String {
    format!("C{j:07}")
}

fn field_line(out: &mut String, kind: &str, name1: &str, name2: &str, value: f64) {
    // Columns 2-3, 5-12, 15-22, 25-36.
    let _ = writeln!(out, " {kind:<2} {name1:<8}  {name2:<8}  {:>12}", mps_number(value));
}

/// Writes the problem in fixed-layout MPS with `MARKER` blocks for binaries.
///
/// Names are eight characters (`Rnnnnnnn`, `Cnnnnnnn`); values that need more
/// than twelve characters are rounded to fit.
pub fn write_mps(prob: &MilpProblem, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", &name[..name.len().min(8)]);
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (i, row) in prob.rows.iter().enumerate() {
        let s = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {s}  {}", row_name(i));
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); prob.n_vars];
    for (i, row) in prob.rows.iter().enumerate() {
        for &(j, a) in &row.coefs {
            by_col[j].push((i, a));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for j in 0..prob.n_vars {
        if prob.is_binary[j] != in_int {
            let tag = if prob.is_binary[j] { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {tag}");
            marker += 1;
            in_int = prob.is_binary[j];
        }
        let cname = col_name(j);
        if prob.objective[j] != 0.0 || by_col[j].is_empty() {
            field_line(&mut out, "", &cname, "OBJ", prob.objective[j]);
        }
        for &(i, a) in &by_col[j] {
            field_line(&mut out, "", &cname, &row_name(i), a);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for (i, row) in prob.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            field_line(&mut out, "", "RHS", &row_name(i), row.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..prob.n_vars {
        let cname = col_name(j);
        let (lb, ub) = (prob.var_lb[j], prob.var_ub[j]);
        if lb == ub {
            field_line(&mut out, "FX", "BND", &cname, lb);
        } else {
            field_line(&mut out, "LO", "BND", &cname, lb);
            field_line(&mut out, "UP", "BND", &cname, ub);
        }
    }
    out.push_str("ENDATA\n");
    out
}
