use std::fmt::Write;

use super::{ConstraintSense, Model, VarKind};

/// Renders the model as MPS text.
///
/// Sections: NAME, ROWS, COLUMNS (binary runs wrapped in INTORG/INTEND
/// markers), RHS, BOUNDS (binaries as BV), ENDATA. Name fields are padded to
/// the longest name, with a minimum of 8; when every name fits in 8
/// characters the output is column-exact fixed MPS. Names never contain
/// whitespace, so free-format readers accept it either way. Rows and columns
/// appear in insertion order and numbers use the shortest round-trip form,
/// so equal models give byte-identical text.
pub fn export_mps(model: &Model) -> String {
    let obj_name = if model.constraints.iter().any(|c| c.name == "OBJ") {
        "OBJ_ROW"
    } else {
        "OBJ"
    };
    let width = model
        .vars
        .iter()
        .map(|v| v.name.len())
        .chain(model.constraints.iter().map(|c| c.name.len()))
        .chain([8, obj_name.len()])
        .max()
        .unwrap_or(8);
    let pad = |s: &str| format!("{s:<width$}");

    // column-major view of the matrix, preserving row order
    let mut entries: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.vars.len()];
    for (v, c) in &model.objective {
        entries[v.0].push((obj_name, *c));
    }
    for row in &model.constraints {
        for (v, c) in &row.terms {
            entries[v.0].push((row.name.as_str(), *c));
        }
    }

    let mut out = String::new();
    let name = if model.name.is_empty() { "MODEL" } else { &model.name };
    writeln!(out, "NAME          {name}").unwrap();
    out.push_str("ROWS\n");
    writeln!(out, " N  {obj_name}").unwrap();
    for row in &model.constraints {
        let tag = match row.sense {
            ConstraintSense::Le => "L",
            ConstraintSense::Eq => "E",
            ConstraintSense::Ge => "G",
        };
        writeln!(out, " {tag}  {}", row.name).unwrap();
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for (k, var) in model.vars.iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let mname = format!("MARKER{marker:02}");
            writeln!(out, "    {}  {}  {tag}", pad(&mname), pad("'MARKER'")).unwrap();
            marker += 1;
            in_int = is_int;
        }
        let col = pad(&var.name);
        if entries[k].is_empty() {
            writeln!(out, "    {col}  {}  0", pad(obj_name)).unwrap();
        }
        for (row, c) in &entries[k] {
            writeln!(out, "    {col}  {}  {}", pad(row), num(*c)).unwrap();
        }
    }
    if in_int {
        let mname = format!("MARKER{marker:02}");
        writeln!(out, "    {}  {}  'INTEND'", pad(&mname), pad("'MARKER'")).unwrap();
    }

    out.push_str("RHS\n");
    for row in &model.constraints {
        if row.rhs != 0.0 {
            writeln!(out, "    {}  {}  {}", pad("RHS"), pad(&row.name), num(row.rhs)).unwrap();
        }
    }

    out.push_str("BOUNDS\n");
    for var in &model.vars {
        let col = pad(&var.name);
        let bnd = pad("BND");
        let mut line = |tag: &str, value: Option<f64>| match value {
            Some(v) => writeln!(out, " {tag} {bnd}  {col}  {}", num(v)).unwrap(),
            None => writeln!(out, " {tag} {bnd}  {}", var.name).unwrap(),
        };
        match var.kind {
            VarKind::Binary if var.lo == 0.0 && var.hi == 1.0 => line("BV", None),
            VarKind::Binary => {
                // binary fixed by its bounds
                line("BV", None);
                if var.lo > 0.0 {
                    line("LO", Some(var.lo));
                }
                if var.hi < 1.0 {
                    line("UP", Some(var.hi));
                }
            }
            VarKind::Continuous => {
                let (lo, hi) = (var.lo, var.hi);
                if lo == hi {
                    line("FX", Some(lo));
                } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                    line("FR", None);
                } else {
                    if lo == f64::NEG_INFINITY {
                        line("MI", None);
                    } else if lo != 0.0 {
                        line("LO", Some(lo));
                    }
                    if hi != f64::INFINITY {
                        line("UP", Some(hi));
                    }
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

/// Shortest round-trip decimal, without a trailing `.0` on integers.
fn num(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::ConstraintSense;

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn tiny_model_layout() {
        let mut m = Model::new("tiny");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let y = m.add_binary("y").unwrap();
        m.add_constraint("c1", &[(x, 1.0)], ConstraintSense::Ge, 1.0).unwrap();
        m.add_constraint("c2", &[(x, 1.0), (y, -10.0)], ConstraintSense::Le, 0.0).unwrap();
        m.set_objective(&[(x, 1.0)]).unwrap();
        let text = export_mps(&m);
        let expected = "\
NAME          tiny
ROWS
 N  OBJ
 G  c1
 L  c2
COLUMNS
    x         OBJ       1
    x         c1        1
    x         c2        1
    MARKER00  'MARKER'  'INTORG'
    y         c2        -10
    MARKER01  'MARKER'  'INTEND'
RHS
    RHS       c1        1
BOUNDS
 UP BND       x         10
 BV BND       y
ENDATA
";
        assert_eq!(text, expected);
    }

    #[test]
    fn unused_column_still_declared() {
        let mut m = Model::new("u");
        m.add_continuous("free_col", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let text = export_mps(&m);
        assert!(text.contains("    free_col  OBJ       0\n"));
        assert!(text.contains(" FR BND       free_col\n"));
    }
}
