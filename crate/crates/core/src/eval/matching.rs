use std::cmp::Ordering;

use super::boxes::{iou, BBox};
use crate::error::{Error, Result};

/// A scored prediction on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_id: String,
    pub bbox: BBox,
    pub score: f64,
}

impl Detection {
    pub fn new(frame_id: &str, bbox: BBox, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Parameter(format!(
                "detection score {score} outside [0, 1]"
            )));
        }
        Ok(Self {
            frame_id: frame_id.to_string(),
            bbox,
            score,
        })
    }
}

/// A labelled target on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GtBox {
    pub frame_id: String,
    pub bbox: BBox,
}

impl GtBox {
    pub fn new(frame_id: &str, bbox: BBox) -> Self {
        Self {
            frame_id: frame_id.to_string(),
            bbox,
        }
    }
}

/// Score-descending order with coordinate tie-breaks.
pub(crate) fn score_order(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.bbox.x_min.total_cmp(&b.bbox.x_min))
        .then(a.bbox.y_min.total_cmp(&b.bbox.y_min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    /// Index into the detection slice passed to [`match_frame`].
    pub det: usize,
    /// Index into the ground-truth slice.
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub pairs: Vec<MatchPair>,
    /// Matched ground-truth index for each input detection.
    pub assignment: Vec<Option<usize>>,
}

/// Greedy matching of one frame's detections against its ground truth.
///
/// Detections are visited by descending score (ties by `x_min`, then
/// `y_min`, then input order). Each takes the unmatched box of highest IoU,
/// provided it reaches `iou_thresh`; equal IoUs go to the lower box index.
pub fn match_frame(dets: &[Detection], gts: &[BBox], iou_thresh: f64) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| score_order(&dets[a], &dets[b]));
    let mut taken = vec![false; gts.len()];
    let mut assignment = vec![None; dets.len()];
    let mut pairs = Vec::new();
    for di in order {
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if taken[gi] {
                continue;
            }
            let v = iou(&dets[di].bbox, g);
            if v >= iou_thresh && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((gi, v));
            }
        }
        if let Some((gi, v)) = best {
            taken[gi] = true;
            assignment[di] = Some(gi);
            pairs.push(MatchPair {
                det: di,
                gt: gi,
                iou: v,
            });
        }
    }
    let tp = pairs.len();
    MatchResult {
        tp,
        fp: dets.len() - tp,
        fn_: gts.len() - tp,
        pairs,
        assignment,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let s = precision + recall;
    if s > 0.0 {
        2.0 * precision * recall / s
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn prf1(tp: usize, fp: usize, fn_: usize) -> Prf1 {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Prf1 {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn d(bb: BBox, s: f64) -> Detection {
        Detection::new("f", bb, s).unwrap()
    }

    #[test]
    fn no_detections() {
        let gts = vec![b(0., 0., 1., 1.), b(2., 2., 3., 3.), b(4., 4., 5., 5.)];
        let m = match_frame(&[], &gts, 0.5);
        assert_eq!((m.tp, m.fp, m.fn_), (0, 0, 3));
    }

    #[test]
    fn crowd_on_one_target() {
        let gts = vec![b(0., 0., 10., 10.), b(50., 50., 60., 60.)];
        let dets = vec![
            d(b(0., 0., 10., 10.), 0.6),
            d(b(1., 0., 11., 10.), 0.9),
            d(b(0., 1., 10., 11.), 0.7),
        ];
        let m = match_frame(&dets, &gts, 0.5);
        assert_eq!((m.tp, m.fp, m.fn_), (1, 2, 1));
        // the highest score wins the target even though another box fits better
        assert_eq!(m.assignment, vec![None, Some(0), None]);
    }

    #[test]
    fn highest_iou_is_preferred() {
        let gts = vec![b(0., 0., 10., 10.), b(2., 0., 12., 10.)];
        let dets = vec![d(b(2., 0., 12., 10.), 0.9)];
        let m = match_frame(&dets, &gts, 0.5);
        assert_eq!(m.assignment, vec![Some(1)]);
        assert_eq!(m.pairs[0].iou, 1.0);
    }

    #[test]
    fn prf1_cases() {
        assert_eq!(prf1(0, 0, 0), Prf1 { precision: 0.0, recall: 0.0, f1: 0.0 });
        assert_eq!(prf1(0, 3, 2).f1, 0.0);
        let s = prf1(4, 0, 1);
        assert_eq!((s.precision, s.recall), (1.0, 0.8));
        assert!((f1_score(0.938, 0.949) - 0.9435).abs() < 5e-4);
        assert!((f1_score(0.717, 0.738) - 0.727).abs() < 5e-4);
    }

    #[test]
    fn score_range_is_enforced() {
        assert!(Detection::new("f", b(0., 0., 1., 1.), 1.5).is_err());
        assert!(Detection::new("f", b(0., 0., 1., 1.), f64::NAN).is_err());
    }
}
