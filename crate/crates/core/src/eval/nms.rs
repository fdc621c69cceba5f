use super::boxes::iou;
use super::group_by_frame;
use super::matching::{score_order, Detection};

/// Greedy NMS over one frame's detections.
///
/// Candidates are visited by descending score (ties by `x_min`, then
/// `y_min`); a box is dropped when its IoU with an already kept box exceeds
/// `iou_thresh`. The result is in visiting order.
pub fn nms(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let mut order: Vec<&Detection> = dets.iter().collect();
    order.sort_by(|a, b| score_order(a, b));
    let mut kept: Vec<&Detection> = Vec::new();
    for cand in order {
        if kept.iter().all(|k| iou(&k.bbox, &cand.bbox) <= iou_thresh) {
            kept.push(cand);
        }
    }
    kept.into_iter().cloned().collect()
}

/// Applies [`nms`] frame by frame; output is grouped by frame id in
/// lexicographic order.
pub fn nms_per_frame(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let frames = group_by_frame(dets.iter().map(|d| (d.frame_id.as_str(), d.clone())));
    frames
        .into_values()
        .flat_map(|v| nms(&v, iou_thresh))
        .collect()
}
