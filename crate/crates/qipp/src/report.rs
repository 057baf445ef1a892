//! CSV rendering of studies and verification tables.

use std::io::Write;

use anyhow::Result;
use qipp_core::orthocheck::{AppendixRow, Family};
use qipp_core::study::{Eoc, RankRow, Study};

/// Sixteen significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.15e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn eoc(e: Option<Eoc>) -> String {
    match e {
        None => String::new(),
        Some(Eoc::Rate(r)) => float(r),
        Some(Eoc::Saturated) => "sat".into(),
    }
}

/// `level,nelems,h,<errors>,<eoc_errors>`; the first row has empty rates.
pub fn write_study(study: &Study, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["level".to_string(), "nelems".into(), "h".into()];
    header.extend(study.columns.iter().cloned());
    header.extend(study.columns.iter().map(|c| format!("eoc_{c}")));
    w.write_record(&header)?;
    for row in &study.rows {
        let mut rec = vec![row.level.to_string(), row.nelems.to_string(), float(row.h)];
        rec.extend(row.errors.iter().copied().map(float));
        rec.extend(row.eocs.iter().copied().map(eoc));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-level mesh constant and largest vicinity order, for stderr.
pub fn study_metadata(study: &Study) -> String {
    let mut s = String::new();
    for (k, r) in study.mesh_constant.iter().enumerate() {
        let v = study.max_vicinity.get(k).copied().flatten().map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        s.push_str(&format!("level {k}: R = {r}, max vicinity order = {v}\n"));
    }
    s
}

pub fn write_rank(rows: &[RankRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "seed", "vertex", "valence", "kernel"])?;
    for r in rows {
        w.write_record([r.trial, r.seed as usize, r.vertex, r.valence, r.kernel].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_appendix(rows: &[AppendixRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "family", "c", "d", "n", "dimension", "expected", "angle", "leading"])?;
    for r in rows {
        let family = match r.family {
            Family::Horizontal => "horizontal",
            Family::Vertical => "vertical",
        };
        w.write_record([
            r.case.clone(),
            family.into(),
            float(r.c),
            float(r.d),
            r.n.to_string(),
            r.dimension.to_string(),
            r.expected.to_string(),
            optional(r.angle),
            optional(r.leading),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qipp_core::study::ConvergenceRow;

    fn tiny() -> Study {
        Study {
            columns: vec!["err".into()],
            rows: vec![
                ConvergenceRow { level: 0, nelems: 32, h: 0.25, errors: vec![0.1], eocs: vec![None] },
                ConvergenceRow {
                    level: 1,
                    nelems: 128,
                    h: 0.125,
                    errors: vec![0.025],
                    eocs: vec![Some(Eoc::Rate(2.0))],
                },
                ConvergenceRow {
                    level: 2,
                    nelems: 512,
                    h: 0.0625,
                    errors: vec![0.0],
                    eocs: vec![Some(Eoc::Saturated)],
                },
            ],
            mesh_constant: vec![2, 2, 2],
            max_vicinity: vec![Some(1), None, Some(2)],
        }
    }

    #[test]
    fn sixteen_digits() {
        assert_eq!(float(0.1), "1.000000000000000e-1");
        assert_eq!(float(1.0 / 3.0), "3.333333333333333e-1");
        assert_eq!(float(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn study_layout() {
        let mut buf = Vec::new();
        write_study(&tiny(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "level,nelems,h,err,eoc_err");
        assert_eq!(lines[1], "0,32,2.500000000000000e-1,1.000000000000000e-1,");
        assert!(lines[2].ends_with(",2.000000000000000e0"));
        assert!(lines[3].ends_with(",sat"));
    }

    #[test]
    fn metadata_lines() {
        let m = study_metadata(&tiny());
        assert!(m.contains("level 0: R = 2, max vicinity order = 1"));
        assert!(m.contains("level 1: R = 2, max vicinity order = -"));
    }
}
