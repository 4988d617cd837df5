use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::loocv::EvalReport;

pub fn write_report_json(report: &EvalReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// K x K counts with a header row and a leading column of class names.
pub fn write_confusion_csv(report: &EvalReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["class".to_string()];
    header.extend(report.class_names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in report.class_names.iter().zip(&report.confusion) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(usize::to_string));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("writing confusion matrix", e))
}

/// One row per video: `video_id,true,predicted,r_1..r_K,filtered`.
pub fn write_predictions_csv(report: &EvalReport, out: impl Write) -> Result<()> {
    let k = report.class_names.len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["video_id".to_string(), "true".into(), "predicted".into()];
    header.extend((1..=k).map(|c| format!("r_{c}")));
    header.push("filtered".into());
    w.write_record(&header)?;
    for f in &report.folds {
        let mut record = vec![f.video_id.clone(), f.true_label.to_string(), f.predicted.to_string()];
        record.extend(f.pooled.iter().map(|r| format!("{r:.16e}")));
        record.push(f.filtered.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("writing predictions", e))
}

/// `(video_id, true, predicted)` rows of a predictions table.
pub fn read_predictions_csv(input: impl Read) -> Result<Vec<(String, usize, usize)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| -> Result<usize> {
            record
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::input(format!("bad predictions row {:?}", record)))
        };
        let id = record.get(0).unwrap_or_default().to_string();
        rows.push((id, field(1)?, field(2)?));
    }
    Ok(rows)
}

/// Fraction of rows whose prediction equals the true label.
pub fn accuracy_of(rows: &[(String, usize, usize)]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|(_, t, p)| t == p).count() as f64 / rows.len() as f64
}
