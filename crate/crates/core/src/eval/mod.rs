//! Detection evaluation: box overlap, NMS, matching, P/R/F1 and AP@50.
//!
//! Matching is greedy VOC-style: detections are visited by descending score
//! and each claims the still-unmatched ground-truth box of highest IoU at or
//! above the threshold. Empty denominators in P, R and F1 evaluate to zero.

mod ap;
mod boxes;
mod format;
mod letterbox;
mod matching;
mod nms;

pub use ap::{
    average_precision, average_precision_50, export_pr_curve, threshold_sweep, ApResult,
    Interpolation, PrPoint,
};
pub use boxes::{giou, iou, BBox};
pub use format::{
    parse_detections, parse_ground_truth, read_detections, read_ground_truth, Record,
};
pub use letterbox::{Letterbox, INFERENCE_SIZE};
pub use matching::{f1_score, match_frame, prf1, Detection, GtBox, MatchPair, MatchResult, Prf1};
pub use nms::{nms, nms_per_frame};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// IoU needed for a detection to count as a true positive.
pub const DEFAULT_MATCH_IOU: f64 = 0.5;
/// IoU above which NMS suppresses the lower-scored box.
pub const DEFAULT_NMS_IOU: f64 = 0.65;
/// Detections must score strictly above this to be evaluated.
pub const DEFAULT_CONF_FLOOR: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub match_iou: f64,
    /// `None` skips NMS.
    pub nms_iou: Option<f64>,
    pub conf_floor: f64,
    pub interpolation: Interpolation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            match_iou: DEFAULT_MATCH_IOU,
            nms_iou: Some(DEFAULT_NMS_IOU),
            conf_floor: DEFAULT_CONF_FLOOR,
            interpolation: Interpolation::Points101,
        }
    }
}

/// Headline numbers of one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ap50: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub num_gt: usize,
    pub num_det: usize,
}

impl Summary {
    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        format!(
            "precision={}\nrecall={}\nf1={}\nap50={}\ntp={}\nfp={}\nfn={}\nnum_gt={}\nnum_det={}\n",
            self.precision,
            self.recall,
            self.f1,
            self.ap50,
            self.tp,
            self.fp,
            self.fn_,
            self.num_gt,
            self.num_det
        )
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub summary: Summary,
    pub sweep: Vec<PrPoint>,
}

pub(crate) fn group_by_frame<'a, T>(
    items: impl IntoIterator<Item = (&'a str, T)>,
) -> BTreeMap<&'a str, Vec<T>> {
    let mut map: BTreeMap<&str, Vec<T>> = BTreeMap::new();
    for (frame, item) in items {
        map.entry(frame).or_default().push(item);
    }
    map
}

/// Confidence filter, per-frame NMS, then P/R/F1 over the surviving
/// detections and AP over the score sweep.
pub fn evaluate(dets: &[Detection], gts: &[GtBox], config: &EvalConfig) -> Result<Evaluation> {
    if gts.is_empty() {
        return Err(Error::Evaluation(
            "no ground-truth boxes; average precision is undefined".into(),
        ));
    }
    let kept: Vec<Detection> = dets
        .iter()
        .filter(|d| d.score > config.conf_floor)
        .cloned()
        .collect();
    let kept = match config.nms_iou {
        Some(t) => nms_per_frame(&kept, t),
        None => kept,
    };

    let det_frames = group_by_frame(kept.iter().map(|d| (d.frame_id.as_str(), d.clone())));
    let gt_frames = group_by_frame(gts.iter().map(|g| (g.frame_id.as_str(), g.bbox)));
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let frames: std::collections::BTreeSet<&str> =
        det_frames.keys().chain(gt_frames.keys()).copied().collect();
    for f in frames {
        let d = det_frames.get(f).map(Vec::as_slice).unwrap_or(&[]);
        let g = gt_frames.get(f).map(Vec::as_slice).unwrap_or(&[]);
        let m = match_frame(d, g, config.match_iou);
        tp += m.tp;
        fp += m.fp;
        fn_ += m.fn_;
    }
    let scores = prf1(tp, fp, fn_);
    let ap = average_precision(&kept, gts, config.match_iou, 0.0, config.interpolation)?;
    Ok(Evaluation {
        summary: Summary {
            precision: scores.precision,
            recall: scores.recall,
            f1: scores.f1,
            ap50: ap.ap,
            tp,
            fp,
            fn_,
            num_gt: gts.len(),
            num_det: kept.len(),
        },
        sweep: ap.sweep,
    })
}
