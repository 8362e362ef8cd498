//! CSV and JSON rendering of result tables.
//!
//! Every table opens with a `#` comment block: two tool lines, then the
//! resolved scenario with each line prefixed by `# `. Stripping the prefix
//! gives a scenario file that reproduces the run.

use crate::run::{Dim, Table};

pub const TOOL: &str = concat!("dispersion ", env!("CARGO_PKG_VERSION"));

const HBAR: f64 = 1.054_571_817e-34;
const C: f64 = 299_792_458.0;

/// Factor from natural units to SI for a reference frequency in rad/s, with the unit label.
fn si(dim: Dim, w: f64) -> (f64, &'static str) {
    match dim {
        Dim::None => (1.0, ""),
        Dim::Length => (C / w, "m"),
        Dim::Time => (1.0 / w, "s"),
        Dim::Frequency => (w, "rad/s"),
        Dim::Energy => (HBAR * w, "J"),
        Dim::Force => (HBAR * w * w / C, "N"),
        Dim::Pressure => (HBAR * w.powi(4) / C.powi(3), "Pa"),
    }
}

/// 17 significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn conversions(t: &Table) -> Vec<(f64, String)> {
    let w = t.scenario.run.omega_ref.filter(|_| t.scenario.run.si_output);
    t.columns
        .iter()
        .map(|c| match w {
            Some(w) => {
                let (f, unit) = si(c.dim, w);
                let name = if unit.is_empty() { c.name.clone() } else { format!("{}[{unit}]", c.name) };
                (f, name)
            }
            None => (1.0, c.name.clone()),
        })
        .collect()
}

pub fn metadata(t: &Table) -> String {
    let units = match t.scenario.run.omega_ref.filter(|_| t.scenario.run.si_output) {
        Some(w) => format!("SI, omega_ref = {w} rad/s"),
        None => "natural (hbar = c = eps0 = mu0 = 1), frequencies in omega_ref, lengths in c/omega_ref".into(),
    };
    let mut out = format!("# # {TOOL}\n# # units: {units}\n");
    for line in t.scenario.to_text().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

pub fn render_csv(t: &Table) -> String {
    let conv = conversions(t);
    let mut out = metadata(t);
    let names: Vec<&str> = conv.iter().map(|(_, n)| n.as_str()).collect();
    out.push_str(&names.join(","));
    out.push_str(",flag\n");
    for row in &t.rows {
        for (v, (f, _)) in row.values.iter().zip(&conv) {
            out.push_str(&format_value(v * f));
            out.push(',');
        }
        out.push_str(row.flags.label());
        out.push('\n');
    }
    out
}

pub fn render_json(t: &Table) -> String {
    let conv = conversions(t);
    let rows: Vec<Vec<f64>> = t
        .rows
        .iter()
        .map(|r| r.values.iter().zip(&conv).map(|(v, (f, _))| v * f).collect())
        .collect();
    let doc = serde_json::json!({
        "tool": TOOL,
        "scenario": t.scenario.to_text(),
        "columns": conv.iter().map(|(_, n)| n).collect::<Vec<_>>(),
        "rows": rows,
        "flags": t.rows.iter().map(|r| r.flags.label()).collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{Column, Flags, Row};
    use crate::scenario::{Command, Run, Scenario};

    fn table(si_output: bool) -> Table {
        let mut run = Run::new(Command::Borderline, 1.5, 2.0, 2);
        run.omega_ref = Some(2.0e15);
        run.si_output = si_output;
        Table {
            scenario: Scenario::new(run),
            columns: vec![
                Column { name: "d".into(), dim: Dim::Length },
                Column { name: "pressure".into(), dim: Dim::Pressure },
            ],
            rows: vec![Row { values: vec![0.1, 1.0 / 3.0], flags: Flags::default() }],
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_value(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(format_value(-2.5e-300), "-2.5000000000000000e-300");
        assert_eq!(format_value(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn csv_layout() {
        let csv = render_csv(&table(false));
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["d,pressure,flag", "1.0000000000000001e-1,3.3333333333333331e-1,ok"]);
        assert!(csv.ends_with('\n'));
        assert_eq!(Scenario::from_metadata(&csv).unwrap(), table(false).scenario);
    }

    #[test]
    fn si_conversion() {
        let csv = render_csv(&table(true));
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "d[m],pressure[Pa],flag");
        let row = csv.lines().last().unwrap();
        let d: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert!((d - 0.1 * C / 2.0e15).abs() < 1e-20);
    }

    #[test]
    fn json_has_columns_and_rows() {
        let v: serde_json::Value = serde_json::from_str(&render_json(&table(false))).unwrap();
        assert_eq!(v["columns"][1], "pressure");
        assert_eq!(v["rows"][0][1].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["flags"][0], "ok");
    }
}
