//! Scoring predicted labels against ground truth: pixel metrics over mask
//! directories and IoU detection matching over annotation directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pseudolabel::eval::{match_detections, pixel_metrics, PixelMetrics};
use pseudolabel::geometry::Quadrilateral;
use pseudolabel::raster::Mask;

use crate::annotations::{parse_line, ILLEGIBLE};
use crate::batch::{GenerateReport, REPORT_FILE};
use crate::error::CliError;
use crate::imageio::read_mask;

/// Detection IoU threshold.
pub const IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pixel,
    Detect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl From<PixelMetrics> for Scores {
    fn from(m: PixelMetrics) -> Self {
        Self {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            tp: m.tp,
            fp: m.fp,
            fn_: m.fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Instance key in pixel mode, image id in detection mode.
    pub key: String,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    /// Means of the per-record scores; every instance weighs the same.
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    /// Scores of the summed counts.
    pub pooled: Scores,
}

impl Aggregate {
    pub fn of(records: &[Record]) -> Self {
        let n = records.len();
        let mean = |f: fn(&Scores) -> f64| {
            if n == 0 {
                0.0
            } else {
                records.iter().map(|r| f(&r.scores)).sum::<f64>() / n as f64
            }
        };
        let sum = |f: fn(&Scores) -> usize| records.iter().map(|r| f(&r.scores)).sum::<usize>();
        Self {
            count: n,
            mean_precision: mean(|s| s.precision),
            mean_recall: mean(|s| s.recall),
            mean_f1: mean(|s| s.f1),
            pooled: PixelMetrics::from_counts(sum(|s| s.tp), sum(|s| s.fp), sum(|s| s.fn_)).into(),
        }
    }
}

/// Method, config and seed of the run that produced the predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: crate::config::Method,
    pub seed: u64,
    pub config: crate::config::RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub pred: PathBuf,
    pub gt: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Provenance>,
    pub aggregate: Aggregate,
    pub records: Vec<Record>,
}

/// Scores aligned mask pairs; keys must match one to one.
pub fn score_masks(pred: &BTreeMap<String, Mask>, gt: &BTreeMap<String, Mask>) -> Result<Vec<Record>, CliError> {
    check_keys(pred.keys(), gt.keys())?;
    Ok(pred
        .iter()
        .map(|(k, p)| Record {
            key: k.clone(),
            scores: pixel_metrics(p, &gt[k]).into(),
        })
        .collect())
}

fn check_keys<'a>(pred: impl Iterator<Item = &'a String>, gt: impl Iterator<Item = &'a String>) -> Result<(), CliError> {
    let pred: Vec<&String> = pred.collect();
    let gt: Vec<&String> = gt.collect();
    if pred == gt {
        return Ok(());
    }
    let only_pred: Vec<&&String> = pred.iter().filter(|k| !gt.contains(k)).take(3).collect();
    let only_gt: Vec<&&String> = gt.iter().filter(|k| !pred.contains(k)).take(3).collect();
    Err(CliError::Mismatch(format!(
        "{} predictions vs {} ground truths; only in predictions: {only_pred:?}, only in ground truth: {only_gt:?}",
        pred.len(),
        gt.len()
    )))
}

/// Top-level files of `dir` with extension `ext`, keyed by file stem.
fn files_by_stem(dir: &Path, ext: &str) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if !path.is_file() || path.extension().is_none_or(|e| e != ext) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

/// Top-level `*.png` masks of `dir`, keyed by file stem.
pub fn read_masks(dir: &Path) -> Result<BTreeMap<String, Mask>, CliError> {
    files_by_stem(dir, "png")?
        .into_iter()
        .map(|(k, p)| Ok((k, read_mask(&p)?)))
        .collect()
}

/// Quad of an annotation line; the transcription is optional for predictions.
fn parse_quad(line: &str) -> Option<(Quadrilateral, String)> {
    if let Some(parsed) = parse_line(line) {
        return Some(parsed);
    }
    let nums: Vec<f64> = line.split(',').map(|v| v.trim().parse().ok()).collect::<Option<_>>()?;
    let xy: [f64; 8] = nums.try_into().ok()?;
    Some((Quadrilateral::from_xy(xy).ok()?, String::new()))
}

fn read_quads(dir: &Path) -> Result<BTreeMap<String, Vec<(Quadrilateral, String)>>, CliError> {
    let mut out = BTreeMap::new();
    for (id, path) in files_by_stem(dir, "txt")? {
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let mut quads = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            quads.push(parse_quad(line).ok_or_else(|| CliError::MalformedLine {
                file: path.clone(),
                line: n + 1,
            })?);
        }
        out.insert(id, quads);
    }
    Ok(out)
}

fn provenance(pred: &Path) -> Option<Provenance> {
    let text = fs::read_to_string(pred.join(REPORT_FILE)).ok()?;
    let r: GenerateReport = serde_json::from_str(&text).ok()?;
    Some(Provenance {
        method: r.method,
        seed: r.seed,
        config: r.config,
    })
}

/// Scores a prediction directory against a ground-truth directory.
///
/// Pixel mode pairs `<key>.png` masks; detection mode pairs per-image
/// annotation files, treating `###` ground truths as don't-care.
pub fn evaluate_dirs(pred: &Path, gt: &Path, mode: Mode) -> Result<EvalReport, CliError> {
    let records = match mode {
        Mode::Pixel => score_masks(&read_masks(pred)?, &read_masks(gt)?)?,
        Mode::Detect => {
            let p = read_quads(pred)?;
            let g = read_quads(gt)?;
            check_keys(p.keys(), g.keys())?;
            let mut records = Vec::with_capacity(p.len());
            for (id, preds) in &p {
                let gts = &g[id];
                let pq: Vec<Quadrilateral> = preds.iter().map(|(q, _)| *q).collect();
                let gq: Vec<Quadrilateral> = gts.iter().map(|(q, _)| *q).collect();
                let dc: Vec<bool> = gts.iter().map(|(_, t)| t == ILLEGIBLE).collect();
                let r = match_detections(&pq, &gq, &dc, IOU_THRESHOLD)?;
                records.push(Record {
                    key: id.clone(),
                    scores: PixelMetrics::from_counts(r.tp, r.fp, r.fn_).into(),
                });
            }
            records
        }
    };
    Ok(EvalReport {
        mode,
        pred: pred.to_path_buf(),
        gt: gt.to_path_buf(),
        source: provenance(pred),
        aggregate: Aggregate::of(&records),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_means_and_pools() {
        let recs = vec![
            Record {
                key: "a".into(),
                scores: PixelMetrics::from_counts(1, 1, 0).into(),
            },
            Record {
                key: "b".into(),
                scores: PixelMetrics::from_counts(3, 0, 1).into(),
            },
        ];
        let a = Aggregate::of(&recs);
        assert_eq!(a.count, 2);
        assert!((a.mean_precision - 0.75).abs() < 1e-12);
        assert!((a.mean_recall - 0.875).abs() < 1e-12);
        assert!((a.pooled.precision - 0.8).abs() < 1e-12);
        assert!((a.pooled.recall - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mismatched_keys_are_an_error() {
        let m = Mask::new(2, 2, true);
        let pred: BTreeMap<String, Mask> = [("a".to_string(), m.clone())].into();
        let gt: BTreeMap<String, Mask> = [("b".to_string(), m)].into();
        assert!(matches!(score_masks(&pred, &gt), Err(CliError::Mismatch(_))));
    }

    #[test]
    fn quad_lines_without_text() {
        let (q, t) = parse_quad("0,0,4,0,4,2,0,2").unwrap();
        assert_eq!(q.area(), 8.0);
        assert!(t.is_empty());
        assert!(parse_quad("0,0,4,0,4,2").is_none());
    }
}
