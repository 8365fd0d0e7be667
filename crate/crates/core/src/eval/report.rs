//! CSV renderings of evaluation results. Output is a pure function of the
//! report, so identical runs give byte-identical files.

use std::fmt::Write;

use super::sweep::{ComparisonRow, SweepRow};
use super::trials::EvalReport;
use crate::dictionary::Method;

fn number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,w,k_corr,k_tot\n");
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{},{}",
            number(r.value),
            r.w,
            r.k_corr,
            r.k_tot
        )
        .unwrap();
    }
    out
}

/// Every (true, predicted) pair, zero counts included, in label order.
pub fn confusion_csv(report: &EvalReport) -> String {
    let mut out = String::from("label,predicted_label,count\n");
    for (i, truth) in report.labels.iter().enumerate() {
        for (j, predicted) in report.labels.iter().enumerate() {
            writeln!(out, "{truth},{predicted},{}", report.confusion[i][j]).unwrap();
        }
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("relative_param");
    for m in Method::ALL {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    for r in rows {
        write!(out, "{}", r.relative_param).unwrap();
        for w in r.w {
            write!(out, ",{w:.6}").unwrap();
        }
        out.push('\n');
    }
    out
}
