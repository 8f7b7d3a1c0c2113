//! CPLEX-LP text rendering of coverage models.

use std::fmt::Write as _;
use std::path::Path;

use super::model::{IlpModel, Sense, Var};

const TERMS_PER_LINE: usize = 8;

/// Round to 12 significant digits and print compactly.
pub fn format_coef(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let a = rounded.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn var_name(v: Var) -> String {
    match v {
        Var::Y(i) => format!("y{i}"),
        Var::Z(j) => format!("z{j}"),
    }
}

fn write_expr(out: &mut String, terms: &[(Var, f64)]) {
    let mut first = true;
    let mut on_line = 0;
    for &(v, c) in terms {
        if c == 0.0 {
            continue;
        }
        if on_line == TERMS_PER_LINE {
            out.push_str("\n   ");
            on_line = 0;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if first {
            if c < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if c.abs() != 1.0 {
            let _ = write!(out, "{} ", format_coef(c.abs()));
        }
        out.push_str(&var_name(v));
        first = false;
        on_line += 1;
    }
    if first {
        // Empty expression: emit a zero-coefficient term to stay parseable.
        out.push_str("0 z0");
    }
}

/// The model as CPLEX-LP text. Feasibility models keep `Σ y` as objective,
/// so an external optimum at or above the ratio row's RHS means feasible.
pub fn to_lp_string(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {:?} model: N = {}, M = {}, k = {}",
        model.kind, model.n_y, model.n_z, model.k
    );
    out.push_str("Maximize\n obj: ");
    let obj: Vec<(Var, f64)> = model
        .objective
        .iter()
        .enumerate()
        .map(|(i, &w)| (Var::Y(i as u32), w))
        .collect();
    write_expr(&mut out, &obj);
    out.push_str("\nSubject To\n");
    for row in model.linear_rows() {
        let _ = write!(out, " {}: ", row.name);
        write_expr(&mut out, &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", format_coef(row.rhs));
    }
    out.push_str("Binary\n");
    for i in 0..model.n_y {
        let _ = writeln!(out, " y{i}");
    }
    for j in 0..model.n_z {
        let _ = writeln!(out, " z{j}");
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(model: &IlpModel, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, to_lp_string(model))
}
