//! Per-sample serialization. CSV floats carry 17 significant digits, absent
//! values are empty cells, booleans are `true`/`false`, lines end in LF.

use std::io::{BufRead, Write};

use super::DiagnosticsRecord;
use crate::error::Result;

/// Column order of [`write_csv`]; never reordered, only appended to.
pub const CSV_COLUMNS: &[&str] = &[
    "time",
    "l2",
    "h1",
    "h2",
    "h3",
    "l3",
    "grad_l6",
    "lip",
    "e_alpha",
    "dissipation_integral",
    "h1_residual",
    "grad_sq",
    "pdelta_sq",
    "h2_energy",
    "h2_lhs",
    "h2_rhs",
    "h2_convective",
    "h2_stretching",
    "h2_residual",
    "f_value",
    "omega_alpha_l2",
    "lemma1_ratio",
    "cond_lip_ok",
    "cond_l3_ok",
    "lip_margin",
    "l3_margin",
    "grad_ok",
    "grad_margin",
    "gronwall_ok",
    "final_bound_ok",
    "cfl",
    "cfl_ok",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_b(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

fn row(r: &DiagnosticsRecord) -> Vec<String> {
    let n = &r.norms;
    let c = &r.conditions;
    vec![
        fmt_f64(r.time),
        fmt_f64(n.l2),
        fmt_f64(n.h1),
        fmt_f64(n.h2),
        fmt_f64(n.h3),
        fmt_f64(n.l3),
        fmt_f64(n.l6),
        fmt_f64(n.lip),
        fmt_f64(r.e_alpha),
        fmt_f64(r.dissipation_integral),
        fmt_f64(r.h1_residual),
        fmt_f64(r.grad_sq),
        fmt_f64(r.pdelta_sq),
        fmt_f64(r.h2_energy),
        opt_f(r.h2_lhs),
        fmt_f64(r.h2_rhs),
        fmt_f64(r.h2_convective),
        fmt_f64(r.h2_stretching),
        opt_f(r.h2_residual),
        fmt_f64(r.f_value),
        fmt_f64(r.omega_alpha_l2),
        opt_f(r.lemma1_ratio),
        c.lip_ok.to_string(),
        c.l3_ok.to_string(),
        fmt_f64(c.lip_margin),
        fmt_f64(c.l3_margin),
        opt_b(c.grad_ok),
        opt_f(c.grad_margin),
        opt_b(r.gronwall_ok),
        opt_b(r.final_bound_ok),
        fmt_f64(r.cfl),
        r.cfl_ok.to_string(),
    ]
}

pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        writeln!(w, "{}", row(r).join(","))?;
    }
    Ok(())
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> DiagnosticsRecord {
        DiagnosticsRecord {
            time: 0.1,
            norms: Default::default(),
            e_alpha: 1.0 / 3.0,
            dissipation_integral: 0.0,
            h1_residual: 0.0,
            grad_sq: 0.0,
            pdelta_sq: 0.0,
            h2_energy: 0.0,
            h2_lhs: None,
            h2_rhs: 0.0,
            h2_convective: 0.0,
            h2_stretching: 0.0,
            h2_residual: Some(2.0),
            f_value: 0.0,
            omega_alpha_l2: 0.0,
            lemma1_ratio: None,
            conditions: Default::default(),
            gronwall_ok: Some(true),
            final_bound_ok: None,
            cfl: 0.0,
            cfl_ok: true,
        }
    }

    #[test]
    fn csv_shape_and_precision() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[record(), record()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
        for l in &lines[..3] {
            assert_eq!(l.split(',').count(), CSV_COLUMNS.len());
        }
        let e: f64 = lines[1].split(',').nth(8).unwrap().parse().unwrap();
        assert_eq!(e, 1.0 / 3.0);
        assert_eq!(lines[1].split(',').nth(14).unwrap(), "");
    }

    #[test]
    fn jsonl_round_trip() {
        let recs = vec![record(), record()];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &recs).unwrap();
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }
}
