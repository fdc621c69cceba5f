use retina_core::pmi::{
    cross_attend_with_weights, pmi_forward, pool_tokens, FeatureBlock, PmiConfig, PmiWeights,
    Upsample,
};

use crate::{CmdResult, Failure};

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Bilinear,
    Nearest,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, default_value_t = 128)]
    channels: usize,
    #[arg(long, default_value_t = 8)]
    heads: usize,
    /// Feature map side (H = W).
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Pooled token grid side.
    #[arg(long, default_value_t = 20)]
    pooled: usize,
    /// Average/max pooling blend.
    #[arg(long, default_value_t = 0.5)]
    w_pool: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Bilinear)]
    upsample: Mode,
}

pub fn run(args: Args) -> CmdResult {
    let config = PmiConfig {
        channels: args.channels,
        heads: args.heads,
        pooled: (args.pooled, args.pooled),
        w_pool: args.w_pool,
        seed: args.seed,
        upsample: match args.upsample {
            Mode::Bilinear => Upsample::Bilinear,
            Mode::Nearest => Upsample::Nearest,
        },
        ..PmiConfig::default()
    };
    config.validate()?;
    if args.size == 0 {
        return Err(Failure::user("parameter", "--size must be positive"));
    }
    let (c, s) = (args.channels, args.size);
    let f_p = FeatureBlock::random(c, s, s, args.seed.wrapping_add(1))?;
    let f_m = FeatureBlock::random(c, s, s, args.seed.wrapping_add(2))?;
    let weights = PmiWeights::generate(&config)?;

    let out = pmi_forward(&f_p, &f_m, &weights, &config)?;
    let again = pmi_forward(&f_p, &f_m, &PmiWeights::generate(&config)?, &config)?;
    let deterministic = out.appearance == again.appearance
        && out.motion == again.motion
        && out.fused == again.fused;

    let tp = pool_tokens(&f_p, &config);
    let tm = pool_tokens(&f_m, &config);
    let mut softmax_err: f64 = 0.0;
    for (q, kv, dir) in [(&tp, &tm, &weights.p_from_m), (&tm, &tp, &weights.m_from_p)] {
        let att = cross_attend_with_weights(q, kv, dir, &config)?;
        for head in &att.attention {
            for r in 0..head.rows {
                softmax_err = softmax_err.max((head.row(r).iter().sum::<f64>() - 1.0).abs());
            }
        }
    }

    let mut zero_phi = weights.clone();
    zero_phi.zero_phi();
    let ident = pmi_forward(&f_p, &f_m, &zero_phi, &config)?;
    let residual_identity = ident.appearance == f_p && ident.motion == f_m;

    let shape = |b: &FeatureBlock| format!("{}x{}x{}", b.channels(), b.height(), b.width());
    println!("channels={}", config.channels);
    println!("heads={}", config.heads);
    println!("head_dim={}", config.head_dim());
    println!("pooled={}x{}", config.pooled.0, config.pooled.1);
    println!("tokens={}", tp.rows);
    println!("input_shape={}", shape(&f_p));
    println!("appearance_out_shape={}", shape(&out.appearance));
    println!("motion_out_shape={}", shape(&out.motion));
    println!("fused_shape={}", shape(&out.fused));
    println!("softmax_row_sum_max_error={softmax_err:e}");
    println!("softmax_rows_ok={}", softmax_err <= 1e-6);
    println!("zero_phi_residual_identity={residual_identity}");
    println!("deterministic={deterministic}");

    if softmax_err > 1e-6 || !residual_identity || !deterministic {
        return Err(Failure::Internal("PMI invariant check failed".into()));
    }
    Ok(())
}
