//! Evaluation metrics: foreground-restricted adjusted Rand index, Dice and
//! IoU over pixel sets, optimal prediction-to-ground-truth matching, and
//! dataset-level reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::PixelSet;
use crate::inference;
use crate::scene::io as dataset_io;

/// Pixel-count contingency table between two labelings.
#[derive(Debug, Clone, Default)]
pub struct ContingencyTable {
    pub counts: BTreeMap<(u32, u32), u64>,
    pub row_sums: BTreeMap<u32, u64>,
    pub col_sums: BTreeMap<u32, u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn add(&mut self, pred: u32, gt: u32) {
        *self.counts.entry((pred, gt)).or_default() += 1;
        *self.row_sums.entry(pred).or_default() += 1;
        *self.col_sums.entry(gt).or_default() += 1;
        self.total += 1;
    }
}

fn comb2(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Adjusted Rand index between predicted and ground-truth cluster labels,
/// restricted to ground-truth foreground pixels. A degenerate denominator
/// (both sides a single cluster, or all singletons) scores 1.
pub fn fg_ari(pred_labels: &[u32], gt_labels: &[u32], gt_foreground: &[bool]) -> Result<f64> {
    if pred_labels.len() != gt_labels.len() || pred_labels.len() != gt_foreground.len() {
        return Err(Error::InvalidParameter(
            "label maps and foreground mask must have the same size".into(),
        ));
    }
    let mut table = ContingencyTable::default();
    for i in 0..pred_labels.len() {
        if gt_foreground[i] {
            table.add(pred_labels[i], gt_labels[i]);
        }
    }
    if table.total == 0 {
        return Err(Error::InvalidParameter("foreground is empty".into()));
    }
    let index: f64 = table.counts.values().map(|&n| comb2(n)).sum();
    let sum_rows: f64 = table.row_sums.values().map(|&n| comb2(n)).sum();
    let sum_cols: f64 = table.col_sums.values().map(|&n| comb2(n)).sum();
    let pairs = comb2(table.total);
    let expected = sum_rows * sum_cols / pairs.max(1.0);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom.abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Dice coefficient 2|X n Y| / (|X| + |Y|). Two empty masks score 1 (vacuous
/// match, logged).
pub fn dice(x: &PixelSet, y: &PixelSet) -> f64 {
    if x.is_empty() && y.is_empty() {
        log::warn!("dice of two empty masks treated as 1");
        return 1.0;
    }
    let inter = intersection_size(x, y) as f64;
    2.0 * inter / (x.len() + y.len()) as f64
}

/// Intersection over union |X n Y| / |X u Y|. Two empty masks score 1.
pub fn iou(x: &PixelSet, y: &PixelSet) -> f64 {
    if x.is_empty() && y.is_empty() {
        log::warn!("iou of two empty masks treated as 1");
        return 1.0;
    }
    let inter = intersection_size(x, y) as f64;
    let union = (x.len() + y.len()) as f64 - inter;
    inter / union
}

fn intersection_size(x: &PixelSet, y: &PixelSet) -> usize {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    small.iter().filter(|p| large.contains(p)).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// (pred index, gt index, iou, dice) of the optimal one-to-one matching.
    pub pairs: Vec<(usize, usize, f64, f64)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

/// Optimal one-to-one assignment maximizing total IoU (Hungarian algorithm);
/// zero-overlap assignments are reported as unmatched.
pub fn best_match(pred: &[PixelSet], gt: &[PixelSet]) -> MatchResult {
    if pred.is_empty() || gt.is_empty() {
        return MatchResult {
            pairs: vec![],
            unmatched_pred: (0..pred.len()).collect(),
            unmatched_gt: (0..gt.len()).collect(),
        };
    }
    let n = pred.len().max(gt.len());
    // square cost matrix for a minimization problem; padding costs 0
    let mut cost = vec![vec![0.0f64; n]; n];
    let mut ious = vec![vec![0.0f64; n]; n];
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let v = iou(p, g);
            ious[i][j] = v;
            cost[i][j] = -v;
        }
    }
    let assignment = hungarian_min(&cost);
    let mut pairs = Vec::new();
    let mut unmatched_pred = Vec::new();
    let mut matched_gt = vec![false; gt.len()];
    for (i, &j) in assignment.iter().enumerate() {
        if i < pred.len() && j < gt.len() && ious[i][j] > 0.0 {
            pairs.push((i, j, ious[i][j], dice(&pred[i], &gt[j])));
            matched_gt[j] = true;
        } else if i < pred.len() {
            unmatched_pred.push(i);
        }
    }
    let unmatched_gt = (0..gt.len()).filter(|&j| !matched_gt[j]).collect();
    MatchResult {
        pairs,
        unmatched_pred,
        unmatched_gt,
    }
}

/// O(n^3) Hungarian algorithm on a square cost matrix; returns the column
/// assigned to each row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching over 1-based columns; way[j] is the previous
    // column on the alternating path
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j (1-based rows)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Modal,
    Amodal,
}

impl EvalMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "modal" => Ok(EvalMode::Modal),
            "amodal" => Ok(EvalMode::Amodal),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode '{other}' (expected modal|amodal)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalRow {
    pub id: String,
    /// Foreground ARI; only computed in modal mode.
    pub ari: Option<f64>,
    pub mdice: f64,
    pub miou: f64,
    pub n_gt: usize,
    pub n_pred: usize,
    pub n_matched: usize,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub rows: Vec<EvalRow>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    pub mdice_mean: f64,
    pub mdice_std: f64,
    pub miou_mean: f64,
    pub miou_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

/// Per-image scores for one sample: predicted masks against ground truth.
/// Unmatched ground-truth objects contribute 0 to both means.
pub fn score_sample(
    pred_masks: &[PixelSet],
    gt_masks: &[PixelSet],
    pred_labels: Option<(&[u32], &[u32], &[bool])>,
) -> (Option<f64>, f64, f64, usize) {
    let matching = best_match(pred_masks, gt_masks);
    let mut dices: Vec<f64> = matching.pairs.iter().map(|&(_, _, _, d)| d).collect();
    let mut ious: Vec<f64> = matching.pairs.iter().map(|&(_, _, i, _)| i).collect();
    for _ in &matching.unmatched_gt {
        dices.push(0.0);
        ious.push(0.0);
    }
    let mdice = if dices.is_empty() {
        0.0
    } else {
        dices.iter().sum::<f64>() / dices.len() as f64
    };
    let miou = if ious.is_empty() {
        0.0
    } else {
        ious.iter().sum::<f64>() / ious.len() as f64
    };
    let ari = pred_labels.map(|(p, g, f)| fg_ari(p, g, f).unwrap_or(0.0));
    (ari, mdice, miou, matching.pairs.len())
}

/// Evaluates a prediction directory against a ground-truth dataset directory.
/// In modal mode the per-image foreground ARI is included.
pub fn evaluate_dataset(pred_dir: &Path, gt_dir: &Path, mode: EvalMode) -> Result<EvalReport> {
    let manifest = dataset_io::read_manifest(gt_dir)?;
    let rows: Vec<EvalRow> = manifest
        .samples
        .par_iter()
        .map(|sample| -> Result<EvalRow> {
            let n_objects = sample.template_ids.len();
            let gt_masks = match mode {
                EvalMode::Modal => dataset_io::load_modal_masks(gt_dir, &sample.id, n_objects)?,
                EvalMode::Amodal => dataset_io::load_amodal_masks(gt_dir, &sample.id, n_objects)?,
            };
            let pred_masks = inference::load_prediction_masks(pred_dir, &sample.id, mode)?;
            let labels = match mode {
                EvalMode::Modal => {
                    let (h, w, gt_map) = dataset_io::load_modal_label_map(gt_dir, &sample.id)?;
                    let pred_map = inference::load_prediction_label_map(pred_dir, &sample.id, h, w)?;
                    let gt_labels: Vec<u32> = gt_map.iter().map(|&v| v as u32).collect();
                    let fg: Vec<bool> = gt_map.iter().map(|&v| v > 0).collect();
                    Some((pred_map, gt_labels, fg))
                }
                EvalMode::Amodal => None,
            };
            let (ari, mdice, miou, n_matched) = score_sample(
                &pred_masks,
                &gt_masks,
                labels
                    .as_ref()
                    .map(|(p, g, f)| (p.as_slice(), g.as_slice(), f.as_slice())),
            );
            Ok(EvalRow {
                id: sample.id.clone(),
                ari,
                mdice,
                miou,
                n_gt: gt_masks.len(),
                n_pred: pred_masks.len(),
                n_matched,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let aris: Vec<f64> = rows.iter().filter_map(|r| r.ari).collect();
    let (ari_mean, ari_std) = if aris.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&aris);
        (Some(m), Some(s))
    };
    let (mdice_mean, mdice_std) = mean_std(&rows.iter().map(|r| r.mdice).collect::<Vec<_>>());
    let (miou_mean, miou_std) = mean_std(&rows.iter().map(|r| r.miou).collect::<Vec<_>>());
    Ok(EvalReport {
        mode,
        rows,
        ari_mean,
        ari_std,
        mdice_mean,
        mdice_std,
        miou_mean,
        miou_std,
    })
}

/// Writes the report as a delimited table plus a `metric,mean,std` summary
/// block, scaled to 0-100.
pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "# evaluation mode={}; ari restricted to ground-truth foreground; \
         unmatched ground-truth objects score 0; empty-vs-empty mask pairs score 1; \
         values scaled to 0-100\n",
        match report.mode {
            EvalMode::Modal => "modal",
            EvalMode::Amodal => "amodal",
        }
    ));
    out.push_str("id,ari,mdice,miou,n_gt,n_pred,n_matched\n");
    for r in &report.rows {
        let ari = r
            .ari
            .map(|a| format!("{:.4}", 100.0 * a))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{},{},{}\n",
            r.id,
            ari,
            100.0 * r.mdice,
            100.0 * r.miou,
            r.n_gt,
            r.n_pred,
            r.n_matched
        ));
    }
    out.push_str("metric,mean,std\n");
    if let (Some(m), Some(s)) = (report.ari_mean, report.ari_std) {
        out.push_str(&format!("ari,{:.4},{:.4}\n", 100.0 * m, 100.0 * s));
    }
    out.push_str(&format!(
        "mdice,{:.4},{:.4}\n",
        100.0 * report.mdice_mean,
        100.0 * report.mdice_std
    ));
    out.push_str(&format!(
        "miou,{:.4},{:.4}\n",
        100.0 * report.miou_mean,
        100.0 * report.miou_std
    ));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
