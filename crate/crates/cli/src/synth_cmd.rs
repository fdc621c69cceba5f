use std::path::PathBuf;

use retina_core::synth::{self, SynthConfig, TargetSpec};

use crate::output::Staged;
use crate::{CmdResult, Failure};

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Preset {
    /// One faint blob crossing a noisy 256×256 frame at 2 px/frame.
    MovingBlob,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Output directory; must not exist or be empty.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    frames: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::MovingBlob)]
    preset: Preset,
    /// Manifest file stem.
    #[arg(long, default_value = "sequence")]
    name: String,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Replace the preset targets: `x,y,vx,vy,sigma,amplitude` (repeatable).
    #[arg(long = "target", value_parser = parse_target)]
    targets: Vec<TargetSpec>,
    #[arg(long)]
    background: Option<f64>,
    /// Standard deviation of the per-pixel Gaussian noise.
    #[arg(long)]
    noise: Option<f64>,
    /// Amplitude of the sinusoidal background texture.
    #[arg(long)]
    texture_amplitude: Option<f64>,
    #[arg(long)]
    texture_period: Option<f64>,
    /// Texture drift `dx,dy` in px/frame.
    #[arg(long, value_parser = parse_pair)]
    drift: Option<(f64, f64)>,
    /// Ground-truth half-width in target sigmas.
    #[arg(long)]
    gt_halfwidth: Option<f64>,
}

fn parse_numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_target(s: &str) -> Result<TargetSpec, String> {
    let v = parse_numbers(s, 6)?;
    Ok(TargetSpec {
        start: (v[0], v[1]),
        velocity: (v[2], v[3]),
        sigma: v[4],
        amplitude: v[5],
    })
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn build_config(args: &Args) -> SynthConfig {
    let mut cfg = match args.preset {
        Preset::MovingBlob => SynthConfig::moving_blob(args.frames, args.seed),
    };
    if let Some(h) = args.height {
        cfg.height = h;
    }
    if let Some(w) = args.width {
        cfg.width = w;
    }
    if !args.targets.is_empty() {
        cfg.targets = args.targets.clone();
    }
    let bg = &mut cfg.background;
    if let Some(v) = args.background {
        bg.level = v;
    }
    if let Some(v) = args.noise {
        bg.noise_sigma = v;
    }
    if let Some(v) = args.texture_amplitude {
        bg.texture_amplitude = v;
    }
    if let Some(v) = args.texture_period {
        bg.texture_period = v;
    }
    if let Some(v) = args.drift {
        bg.drift = v;
    }
    if let Some(v) = args.gt_halfwidth {
        cfg.gt_halfwidth_sigmas = v;
    }
    cfg
}

pub fn run(args: Args) -> CmdResult {
    if args.name.is_empty() || args.name.contains(['/', '\\']) {
        return Err(Failure::user("parameter", "--name must be a plain file stem"));
    }
    let cfg = build_config(&args);
    let seq = synth::generate(&cfg)?;
    let out = Staged::new(&args.out)?;
    synth::write_sequence(out.path(), &args.name, &seq)?;
    out.publish()
}
