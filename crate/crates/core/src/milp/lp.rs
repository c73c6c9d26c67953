use std::fmt::Write as _;

use super::model::{MilpModel, Sense, VarKind};

const TERMS_PER_LINE: usize = 8;

fn push_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    let mut first = true;
    for (n, &(v, a)) in terms.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.vars[v].name;
        match (first, a < 0.0) {
            (true, false) => write!(out, " {} {name}", fmt(a)),
            (true, true) => write!(out, " -{} {name}", fmt(-a)),
            (false, false) => write!(out, " + {} {name}", fmt(a)),
            (false, true) => write!(out, " - {} {name}", fmt(-a)),
        }
        .unwrap();
        first = false;
    }
    if first {
        // Every row carries at least one variable; keep the syntax valid anyway.
        write!(
            out,
            " 0 {}",
            model.vars[terms.first().map_or(0, |t| t.0)].name
        )
        .unwrap();
    }
}

fn fmt(a: f64) -> String {
    format!("{a}")
}

/// Writes the model in CPLEX LP format. Output is deterministic.
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let ix = &model.index;
    writeln!(
        out,
        "\\ nodes {} platforms {} modules {}+{} variables {} rows {}",
        ix.n,
        ix.kappa,
        ix.mu_p,
        ix.mu_f,
        model.vars.len(),
        model.rows.len()
    )
    .unwrap();
    out.push_str("Minimize\n obj:");
    push_terms(&mut out, model, &model.objective);
    if model.objective_constant != 0.0 {
        write!(out, " + {}", fmt(model.objective_constant)).unwrap();
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        write!(out, " {}:", row.name).unwrap();
        push_terms(&mut out, model, &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " {op} {}", fmt(row.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for var in &model.vars {
        if var.kind == VarKind::Continuous && (var.lb != 0.0 || var.ub.is_finite()) {
            if var.ub.is_finite() {
                writeln!(out, " {} <= {} <= {}", fmt(var.lb), var.name, fmt(var.ub)).unwrap();
            } else {
                writeln!(out, " {} >= {}", var.name, fmt(var.lb)).unwrap();
            }
        }
    }
    out.push_str("Binaries\n");
    let mut n = 0;
    for var in model.vars.iter().filter(|v| v.kind == VarKind::Binary) {
        out.push(' ');
        out.push_str(&var.name);
        n += 1;
        if n % TERMS_PER_LINE == 0 {
            out.push('\n');
        }
    }
    if n % TERMS_PER_LINE != 0 {
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
