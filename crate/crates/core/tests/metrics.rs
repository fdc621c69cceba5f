use proptest::prelude::*;
use retina_core::eval::{
    average_precision, evaluate, iou, match_frame, nms, BBox, Detection, EvalConfig, GtBox, Interpolation,
};
use retina_core::rng::SplitMix64;

fn bbox_strategy() -> impl Strategy<Value = BBox> {
    (0.0f64..50.0, 0.0f64..50.0, 0.5f64..20.0, 0.5f64..20.0)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h).unwrap())
}

fn int_box(rng: &mut SplitMix64, span: u64, max_side: u64) -> BBox {
    let x = (rng.next_u64() % span) as f64;
    let y = (rng.next_u64() % span) as f64;
    let w = (1 + rng.next_u64() % max_side) as f64;
    let h = (1 + rng.next_u64() % max_side) as f64;
    BBox::new(x, y, x + w, y + h).unwrap()
}

/// Counts unit cells covered by both boxes and by either box.
fn cell_counts(a: &BBox, b: &BBox) -> (u64, u64) {
    let (mut inter, mut uni) = (0, 0);
    let lo = a.x_min.min(b.x_min) as i64;
    let hi = a.x_max.max(b.x_max) as i64;
    let lo_y = a.y_min.min(b.y_min) as i64;
    let hi_y = a.y_max.max(b.y_max) as i64;
    let inside = |bx: &BBox, x: i64, y: i64| {
        (x as f64) >= bx.x_min && ((x + 1) as f64) <= bx.x_max && (y as f64) >= bx.y_min && ((y + 1) as f64) <= bx.y_max
    };
    for y in lo_y..hi_y {
        for x in lo..hi {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as u64;
            uni += (ia || ib) as u64;
        }
    }
    (inter, uni)
}

#[test]
fn iou_matches_cell_counting_on_integer_boxes() {
    let mut rng = SplitMix64::new(4);
    for _ in 0..2000 {
        let a = int_box(&mut rng, 24, 12);
        let b = int_box(&mut rng, 24, 12);
        let (inter, uni) = cell_counts(&a, &b);
        assert_eq!(iou(&a, &b), inter as f64 / uni as f64, "{a:?} {b:?}");
    }
}

/// Greedy NMS is the unique kept set such that kept boxes never overlap above
/// the threshold and every dropped box overlaps some higher-ranked kept box.
#[test]
fn nms_matches_its_defining_properties() {
    let mut rng = SplitMix64::new(21);
    for _ in 0..300 {
        let dets: Vec<Detection> = (0..20)
            .map(|_| Detection::new("f", int_box(&mut rng, 30, 15), (rng.next_u64() % 1000) as f64 / 1000.0).unwrap())
            .collect();
        let thr = 0.3 + (rng.next_u64() % 5) as f64 * 0.1;
        let kept = nms(&dets, thr);

        // rank: score descending, then x_min, then y_min
        let mut ranked = dets.clone();
        ranked.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.bbox.x_min.total_cmp(&b.bbox.x_min))
                .then(a.bbox.y_min.total_cmp(&b.bbox.y_min))
        });
        let mut expected: Vec<&Detection> = Vec::new();
        for d in &ranked {
            if !expected.iter().any(|k| iou(&k.bbox, &d.bbox) > thr) {
                expected.push(d);
            }
        }
        assert_eq!(kept.len(), expected.len());
        for (k, e) in kept.iter().zip(&expected) {
            assert_eq!(k, *e);
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                assert!(iou(&a.bbox, &b.bbox) <= thr);
            }
        }
    }
}

#[test]
fn extra_detections_on_one_target() {
    let b = |x: f64| BBox::new(x, 0.0, x + 10.0, 10.0).unwrap();
    let gts = [b(0.0), b(50.0)];
    let dets = vec![
        Detection::new("f", b(0.0), 0.9).unwrap(),
        Detection::new("f", b(1.0), 0.8).unwrap(),
        Detection::new("f", b(2.0), 0.7).unwrap(),
    ];
    let m = match_frame(&dets, &gts, 0.5);
    assert_eq!((m.tp, m.fp, m.fn_), (1, 2, 1));
    assert_eq!(m.assignment, vec![Some(0), None, None]);
}

#[test]
fn nms_then_match_through_evaluate() {
    let b = |x: f64| BBox::new(x, 0.0, x + 10.0, 10.0).unwrap();
    let gts = vec![GtBox::new("f", b(0.0)), GtBox::new("f", b(50.0))];
    let dets = vec![
        Detection::new("f", b(0.0), 0.9).unwrap(),
        Detection::new("f", b(1.0), 0.8).unwrap(),
        Detection::new("f", b(50.0), 0.6).unwrap(),
    ];
    let s = evaluate(&dets, &gts, &EvalConfig::default()).unwrap().summary;
    assert_eq!((s.tp, s.fp, s.fn_, s.num_det), (2, 0, 0, 2));
    assert_eq!(s.ap50, 1.0);
}

fn scored_fixture() -> impl Strategy<Value = (Vec<Detection>, Vec<GtBox>)> {
    (
        prop::collection::vec((0usize..3, bbox_strategy()), 1..8),
        prop::collection::vec((0usize..3, bbox_strategy(), 1u32..1000), 0..12),
    )
        .prop_map(|(g, d)| {
            let gts = g.into_iter().map(|(f, b)| GtBox::new(&format!("f{f}"), b)).collect();
            let dets = d
                .into_iter()
                .map(|(f, b, s)| Detection::new(&format!("f{f}"), b, s as f64 / 1000.0).unwrap())
                .collect();
            (dets, gts)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn iou_is_symmetric_and_bounded(a in bbox_strategy(), b in bbox_strategy()) {
        let v = iou(&a, &b);
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn iou_is_translation_invariant(a in bbox_strategy(), b in bbox_strategy(), dx in -30i32..30, dy in -30i32..30) {
        let (dx, dy) = (dx as f64, dy as f64);
        let moved = iou(&a.translate(dx, dy), &b.translate(dx, dy));
        prop_assert!((moved - iou(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn ap_ignores_monotone_rescaling((dets, gts) in scored_fixture()) {
        let base = average_precision(&dets, &gts, 0.5, 0.0, Interpolation::Points101).unwrap().ap;
        let all_point = average_precision(&dets, &gts, 0.5, 0.0, Interpolation::AllPoints).unwrap().ap;
        let maps: [fn(f64) -> f64; 3] = [f64::sqrt, |s| 0.25 + 0.5 * s, |s| s.powi(3)];
        for f in maps {
            let scaled: Vec<Detection> = dets
                .iter()
                .map(|d| Detection::new(&d.frame_id, d.bbox, f(d.score)).unwrap())
                .collect();
            let ap = average_precision(&scaled, &gts, 0.5, 0.0, Interpolation::Points101).unwrap().ap;
            prop_assert_eq!(ap, base);
            let ap = average_precision(&scaled, &gts, 0.5, 0.0, Interpolation::AllPoints).unwrap().ap;
            prop_assert_eq!(ap, all_point);
        }
        prop_assert!((0.0..=1.0).contains(&base));
    }
}
