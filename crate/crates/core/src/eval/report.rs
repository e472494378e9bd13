//! Plain-text and CSV rendering of evaluation rows.

use super::{EvalRow, PhaseRow};

pub const CSV_HEADER: &str = "config,pred_ratio,comp_ratio,coverage,pct_error,pct_no_parse,n";

/// Which sweep a set of rows came from; decides the first column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Phases,
    EdgeLimit,
}

impl TableKind {
    fn first_header(self) -> &'static str {
        match self {
            TableKind::Phases => "Phases",
            TableKind::EdgeLimit => "Maximum Edge Count",
        }
    }
}

/// Row label for an edge limit, safe inside CSV.
pub fn edge_limit_label(limit: Option<usize>) -> String {
    match limit {
        Some(n) => n.to_string(),
        None => "unlimited".to_string(),
    }
}

/// `15000` becomes `15,000`; anything non-numeric is returned unchanged.
pub fn group_thousands(label: &str) -> String {
    if label.is_empty() || !label.bytes().all(|b| b.is_ascii_digit()) {
        return label.to_string();
    }
    let mut out = String::with_capacity(label.len() + label.len() / 3);
    for (i, c) in label.chars().enumerate() {
        if i > 0 && (label.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn ratio_cells(pred: f64, comp: f64, coverage: f64, error: f64) -> [String; 4] {
    [
        format!("{pred:.2}"),
        format!("{comp:.2}"),
        format!("{coverage:.1}%"),
        format!("{error:.1}%"),
    ]
}

/// A phase-sweep row as compact text, e.g. `I,II,III  4.30  1.28  89.3%  10.7%`.
pub fn phase_sweep_row(label: &str, pred: f64, comp: f64, coverage: f64, error: f64) -> String {
    let mut cells = vec![label.to_string()];
    cells.extend(ratio_cells(pred, comp, coverage, error));
    cells.join("  ")
}

/// An edge-limit row as compact text, e.g. `300  2.50  0.86  79.3%  2.7%`.
pub fn edge_sweep_row(label: &str, pred: f64, comp: f64, coverage: f64, error: f64) -> String {
    phase_sweep_row(&group_thousands(label), pred, comp, coverage, error)
}

/// A by-phase row as compact text, e.g. `I + II  238  97%  77%  3%`.
pub fn by_phase_row(label: &str, n: usize, accuracy: f64, coverage: f64, error: f64) -> String {
    format!("{label}  {n}  {accuracy:.0}%  {coverage:.0}%  {error:.0}%")
}

fn render_grid(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = (usize, &str)>| {
        let parts: Vec<String> = cells
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        parts.join(" | ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(&mut header.iter().copied().enumerate()));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str).enumerate()));
        out.push('\n');
    }
    out
}

/// Aligned table with the sweep's column set.
pub fn render_text(kind: TableKind, rows: &[EvalRow]) -> String {
    let header = [kind.first_header(), "Pred. Ratio", "Comp. Ratio", "Coverage", "%Error"];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let label = match kind {
                TableKind::Phases => r.config.clone(),
                TableKind::EdgeLimit => group_thousands(&r.config),
            };
            let mut cells = vec![label];
            cells.extend(ratio_cells(r.pred_ratio(), r.comp_ratio(), r.coverage(), r.pct_error()));
            cells
        })
        .collect();
    render_grid(&header, &body)
}

/// CSV with a single header line.
pub fn render_csv(rows: &[EvalRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.config.clone(),
            format!("{:.4}", r.pred_ratio()),
            format!("{:.4}", r.comp_ratio()),
            format!("{:.2}", r.coverage()),
            format!("{:.2}", r.pct_error()),
            format!("{:.2}", r.pct_no_parse()),
            r.n.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Aligned by-phase table.
pub fn render_phase_table(rows: &[PhaseRow]) -> String {
    let header = ["Phase", "No.", "Accuracy", "Coverage", "%Error"];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.to_string(),
                r.n.to_string(),
                format!("{:.0}%", r.accuracy()),
                format!("{:.0}%", r.coverage()),
                format!("{:.0}%", r.pct_error()),
            ]
        })
        .collect();
    render_grid(&header, &body)
}
