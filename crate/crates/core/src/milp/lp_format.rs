//! CPLEX LP text export, mainly for debugging models with external tools.

use std::fmt::Write;

use super::model::{LinearModel, Sense, VarId, VarKind};

fn sanitize(name: &str, id: VarId) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .map(|c| if c == '[' || c == ']' { '_' } else { c })
        .collect();
    format!("{cleaned}_{}", id.0)
}

fn write_terms(out: &mut String, names: &[String], terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names.first().cloned().unwrap_or_else(|| "dummy".into()));
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {}", a.abs(), names[v.0]);
        } else {
            let _ = write!(out, " {sign} {} {}", a.abs(), names[v.0]);
        }
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Renders `model` in CPLEX LP format. Column names get their index appended
/// so that they stay unique after sanitizing.
pub fn to_lp_string(model: &LinearModel) -> String {
    let names: Vec<String> = model.variables.iter().enumerate().map(|(i, v)| sanitize(&v.name, VarId(i))).collect();
    let mut out = String::from("\\ objective constant ");
    let _ = writeln!(out, "{}", model.objective_constant);
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, &names, &model.objective);
    out.push_str("\nSubject To\n");
    for (r, c) in model.constraints.iter().enumerate() {
        let _ = write!(out, " r{r}:");
        write_terms(&mut out, &names, &c.terms);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs + 0.0);
    }
    out.push_str("Bounds\n");
    for (v, n) in model.variables.iter().zip(&names) {
        if v.lower == v.upper {
            let _ = writeln!(out, " {n} = {}", v.lower);
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", fmt_bound(v.lower), fmt_bound(v.upper));
        }
    }
    let ints: Vec<&String> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| matches!(v.kind, VarKind::Binary | VarKind::Integer))
        .map(|(_, n)| n)
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for n in ints {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
