//! Report rendering shared by the constraint checker and the step
//! diagnostics: JSON via serde and aligned-column text tables.

use crate::params::{ConstraintReport, ConstraintRecord};

/// Render records as an aligned text table.
pub fn constraint_table(report: &ConstraintReport) -> String {
    let mut rows: Vec<[String; 5]> = vec![[
        "constraint".into(),
        "lhs".into(),
        "rhs".into(),
        "ok".into(),
        "margin".into(),
    ]];
    for r in &report.records {
        rows.push(record_row(r));
    }
    align(&rows)
}

fn record_row(r: &ConstraintRecord) -> [String; 5] {
    [
        r.name.clone(),
        format!("{:.6e}", r.lhs),
        format!("{:.6e}", r.rhs),
        if r.satisfied { "yes".into() } else { "NO".into() },
        format!("{:.6e}", r.margin),
    ]
}

/// Generic aligned-column join.
pub fn align<const W: usize>(rows: &[[String; W]]) -> String {
    let mut widths = [0usize; W];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            out.push_str(cell);
            if i + 1 < W {
                for _ in 0..(widths[i] - cell.len() + 2) {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligns_columns() {
        let rows = vec![
            ["a".to_string(), "bb".to_string()],
            ["ccc".to_string(), "d".to_string()],
        ];
        let s = align(&rows);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("a    bb"));
        assert!(lines[1].starts_with("ccc  d"));
    }
}
