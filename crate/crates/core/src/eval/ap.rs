use std::fmt::Write as _;

use super::group_by_frame;
use super::matching::{match_frame, score_order, Detection, GtBox};
use crate::error::{Error, Result};

/// How the precision envelope is integrated over recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Mean of the envelope sampled at recall 0.00, 0.01, …, 1.00.
    Points101,
    /// Exact area under the step-wise envelope.
    AllPoints,
}

/// Operating point at one score threshold (detections with `score ≥ threshold`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApResult {
    pub ap: f64,
    /// One point per distinct score, in descending threshold order.
    pub sweep: Vec<PrPoint>,
    pub num_gt: usize,
}

/// Precision/recall at every distinct score.
///
/// Matching is done once per frame over all detections; because matching
/// visits detections by descending score, the outcome for any threshold is
/// the prefix of that single pass.
pub fn threshold_sweep(dets: &[Detection], gts: &[GtBox], iou_thresh: f64) -> Vec<PrPoint> {
    let gt_frames = group_by_frame(gts.iter().map(|g| (g.frame_id.as_str(), g.bbox)));
    let det_frames = group_by_frame(dets.iter().map(|d| (d.frame_id.as_str(), d.clone())));
    let mut outcomes: Vec<(Detection, bool)> = Vec::with_capacity(dets.len());
    for (frame, fdets) in det_frames {
        let fgts = gt_frames.get(frame).map(Vec::as_slice).unwrap_or(&[]);
        let m = match_frame(&fdets, fgts, iou_thresh);
        outcomes.extend(fdets.into_iter().zip(m.assignment.iter().map(Option::is_some)));
    }
    outcomes.sort_by(|a, b| score_order(&a.0, &b.0));

    let num_gt = gts.len();
    let mut sweep = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (i, (det, hit)) in outcomes.iter().enumerate() {
        if *hit {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_at_score = outcomes
            .get(i + 1)
            .is_none_or(|(next, _)| next.score != det.score);
        if last_at_score {
            sweep.push(PrPoint {
                threshold: det.score,
                precision: tp as f64 / (tp + fp) as f64,
                recall: if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 },
                tp,
                fp,
            });
        }
    }
    sweep
}

/// Envelope value at `recall`: best precision among points reaching it.
fn envelope_at(sweep: &[PrPoint], recall: f64) -> f64 {
    sweep
        .iter()
        .filter(|p| p.recall >= recall)
        .map(|p| p.precision)
        .fold(0.0, f64::max)
}

fn integrate(sweep: &[PrPoint], method: Interpolation) -> f64 {
    match method {
        Interpolation::Points101 => {
            (0..=100)
                .map(|i| envelope_at(sweep, i as f64 / 100.0))
                .sum::<f64>()
                / 101.0
        }
        Interpolation::AllPoints => {
            let mut area = 0.0;
            let mut prev_recall = 0.0;
            for p in sweep {
                if p.recall > prev_recall {
                    area += (p.recall - prev_recall) * envelope_at(sweep, p.recall);
                    prev_recall = p.recall;
                }
            }
            area
        }
    }
}

/// Average precision over detections scoring strictly above `conf_floor`.
pub fn average_precision(
    dets: &[Detection],
    gts: &[GtBox],
    iou_thresh: f64,
    conf_floor: f64,
    method: Interpolation,
) -> Result<ApResult> {
    if gts.is_empty() {
        return Err(Error::Evaluation(
            "no ground-truth boxes; average precision is undefined".into(),
        ));
    }
    let kept: Vec<Detection> = dets
        .iter()
        .filter(|d| d.score > conf_floor)
        .cloned()
        .collect();
    let sweep = threshold_sweep(&kept, gts, iou_thresh);
    Ok(ApResult {
        ap: integrate(&sweep, method),
        sweep,
        num_gt: gts.len(),
    })
}

/// AP at IoU 0.5 with 101-point interpolation.
pub fn average_precision_50(dets: &[Detection], gts: &[GtBox], conf_floor: f64) -> Result<f64> {
    average_precision(dets, gts, 0.5, conf_floor, Interpolation::Points101).map(|r| r.ap)
}

/// Comma-separated `threshold,precision,recall` rows in ascending threshold
/// order, so recall is non-increasing down the file.
pub fn export_pr_curve(sweep: &[PrPoint]) -> String {
    let mut out = String::from("threshold,precision,recall\n");
    let mut rows: Vec<&PrPoint> = sweep.iter().collect();
    rows.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
    for p in rows {
        writeln!(out, "{},{},{}", p.threshold, p.precision, p.recall).expect("string write");
    }
    out
}
