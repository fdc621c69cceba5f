use retina_core::pmi::{
    cross_attend, pmi_forward, pool_tokens, FeatureBlock, Matrix, PmiConfig, PmiWeights, Upsample,
};

fn small(seed: u64) -> PmiConfig {
    PmiConfig {
        channels: 16,
        heads: 4,
        pooled: (5, 5),
        seed,
        ..PmiConfig::default()
    }
}

/// Direct pooling over explicit bins with the float-bound formula.
fn pool_oracle(block: &FeatureBlock, cfg: &PmiConfig) -> Vec<Vec<f64>> {
    let (c, h, w) = block.shape();
    let (ph, pw) = cfg.pooled;
    let bounds = |i: usize, n: usize, m: usize| {
        let lo = (i as f64 * n as f64 / m as f64).floor() as usize;
        let hi = ((i + 1) as f64 * n as f64 / m as f64).ceil() as usize;
        (lo, hi)
    };
    let mut out = Vec::new();
    for i in 0..ph {
        for j in 0..pw {
            let (y0, y1) = bounds(i, h, ph);
            let (x0, x1) = bounds(j, w, pw);
            let token = (0..c)
                .map(|ch| {
                    let vals: Vec<f64> = (y0..y1)
                        .flat_map(|y| (x0..x1).map(move |x| (y, x)))
                        .map(|(y, x)| block.get(ch, y, x))
                        .collect();
                    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    cfg.w_pool * mean + (1.0 - cfg.w_pool) * max
                })
                .collect();
            out.push(token);
        }
    }
    out
}

#[test]
fn pooling_matches_direct_bins() {
    for (h, w) in [(64, 64), (37, 53), (20, 20), (21, 99)] {
        let block = FeatureBlock::random(8, h, w, 5).unwrap();
        let cfg = PmiConfig {
            channels: 8,
            heads: 2,
            positional_embedding: false,
            w_pool: 0.3,
            ..PmiConfig::default()
        };
        let tokens = pool_tokens(&block, &cfg);
        let oracle = pool_oracle(&block, &cfg);
        for (r, expected) in oracle.iter().enumerate() {
            for (a, b) in tokens.row(r).iter().zip(expected) {
                assert!((a - b).abs() <= 1e-10, "{h}x{w} token {r}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn attention_ignores_key_order() {
    let cfg = small(9);
    let weights = PmiWeights::generate(&cfg).unwrap();
    let q = pool_tokens(&FeatureBlock::random(16, 30, 30, 1).unwrap(), &cfg);
    let kv = pool_tokens(&FeatureBlock::random(16, 30, 30, 2).unwrap(), &cfg);
    // reverse the key/value rows
    let mut reversed = Matrix::zeros(kv.rows, kv.cols);
    for r in 0..kv.rows {
        let src = kv.row(kv.rows - 1 - r);
        reversed.data[r * kv.cols..(r + 1) * kv.cols].copy_from_slice(src);
    }
    let a = cross_attend(&q, &kv, &weights.p_from_m, &cfg).unwrap();
    let b = cross_attend(&q, &reversed, &weights.p_from_m, &cfg).unwrap();
    let diff = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-12, "{diff}");
}

#[test]
fn queries_are_processed_independently() {
    let cfg = small(4);
    let weights = PmiWeights::generate(&cfg).unwrap();
    let q = pool_tokens(&FeatureBlock::random(16, 25, 25, 7).unwrap(), &cfg);
    let kv = pool_tokens(&FeatureBlock::random(16, 25, 25, 8).unwrap(), &cfg);
    let full = cross_attend(&q, &kv, &weights.m_from_p, &cfg).unwrap();
    for r in [0, 7, q.rows - 1] {
        let single = Matrix {
            rows: 1,
            cols: q.cols,
            data: q.row(r).to_vec(),
        };
        let one = cross_attend(&single, &kv, &weights.m_from_p, &cfg).unwrap();
        assert_eq!(one.row(0), full.row(r));
    }
}

#[test]
fn forward_is_seed_deterministic_and_seed_sensitive() {
    let fp = FeatureBlock::random(16, 24, 24, 11).unwrap();
    let fm = FeatureBlock::random(16, 24, 24, 12).unwrap();
    let run = |seed| {
        let cfg = small(seed);
        pmi_forward(&fp, &fm, &PmiWeights::generate(&cfg).unwrap(), &cfg).unwrap()
    };
    let (a, b, c) = (run(1), run(1), run(2));
    assert_eq!(a.fused, b.fused);
    assert_eq!(a.appearance, b.appearance);
    assert_ne!(a.fused, c.fused);
}

#[test]
fn nearest_upsampling_gives_piecewise_constant_residuals() {
    let cfg = PmiConfig {
        upsample: Upsample::Nearest,
        pooled: (4, 4),
        ..small(3)
    };
    let zeros = FeatureBlock::zeros(16, 8, 8).unwrap();
    let out = pmi_forward(&zeros, &zeros, &PmiWeights::generate(&cfg).unwrap(), &cfg).unwrap();
    for ch in 0..16 {
        for y in (0..8).step_by(2) {
            for x in (0..8).step_by(2) {
                let v = out.appearance.get(ch, y, x);
                assert_eq!(out.appearance.get(ch, y + 1, x), v);
                assert_eq!(out.appearance.get(ch, y, x + 1), v);
                assert_eq!(out.appearance.get(ch, y + 1, x + 1), v);
            }
        }
    }
}
