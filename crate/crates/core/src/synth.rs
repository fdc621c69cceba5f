//! Seeded synthetic infrared sequences with exact ground truth.
//!
//! Frame `t` (zero-based) is
//!
//! ```text
//! clamp(background(t) + Σ amplitude·exp(−|p − c_t|² / 2σ²) + σ_n·n(t, p), 0, 1)
//! ```
//!
//! where `c_t = start + t·velocity` and `n` is a standard normal keyed by
//! `(seed, t, pixel index)` (see [`crate::rng::keyed_normal`]), so any frame
//! can be regenerated on its own. Coordinates are `x = column`, `y = row`.

use std::f64::consts::TAU;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::BBox;
use crate::grid::Grid;
use crate::io::{self, quantize_u8};
use crate::rng;

pub const MIN_SIDE: usize = 32;

/// A Gaussian blob moving at constant velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub start: (f64, f64),
    pub velocity: (f64, f64),
    pub sigma: f64,
    pub amplitude: f64,
}

impl TargetSpec {
    /// Centre `(x, y)` at zero-based frame `t`.
    pub fn centre(&self, t: usize) -> (f64, f64) {
        (
            self.start.0 + t as f64 * self.velocity.0,
            self.start.1 + t as f64 * self.velocity.1,
        )
    }
}

/// Base level plus an optional drifting sinusoidal texture and i.i.d. noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSpec {
    pub level: f64,
    /// Texture drift in px/frame, `(x, y)`.
    pub drift: (f64, f64),
    pub noise_sigma: f64,
    /// Peak amplitude of the texture; zero disables it.
    pub texture_amplitude: f64,
    /// Texture wavelength in pixels.
    pub texture_period: f64,
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        Self {
            level: 0.2,
            drift: (0.0, 0.0),
            noise_sigma: 0.0,
            texture_amplitude: 0.0,
            texture_period: 32.0,
        }
    }
}

impl BackgroundSpec {
    fn value(&self, t: usize, row: usize, col: usize) -> f64 {
        if self.texture_amplitude == 0.0 {
            return self.level;
        }
        let x = col as f64 - self.drift.0 * t as f64;
        let y = row as f64 - self.drift.1 * t as f64;
        self.level
            + self.texture_amplitude
                * (TAU * x / self.texture_period).sin()
                * (TAU * y / self.texture_period).sin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub height: usize,
    pub width: usize,
    pub num_frames: usize,
    pub seed: u64,
    pub targets: Vec<TargetSpec>,
    pub background: BackgroundSpec,
    /// Ground-truth half-width in units of the target sigma.
    pub gt_halfwidth_sigmas: f64,
}

impl SynthConfig {
    /// The `moving-blob` scenario: one σ = 1.5 px blob of amplitude 0.6
    /// crossing a 256×256 frame at 2 px/frame over a 0.2 background with
    /// noise σ = 0.05.
    pub fn moving_blob(num_frames: usize, seed: u64) -> Self {
        Self {
            height: 256,
            width: 256,
            num_frames,
            seed,
            targets: vec![TargetSpec {
                start: (64.0, 128.0),
                velocity: (2.0, 0.0),
                sigma: 1.5,
                amplitude: 0.6,
            }],
            background: BackgroundSpec {
                level: 0.2,
                noise_sigma: 0.05,
                ..BackgroundSpec::default()
            },
            gt_halfwidth_sigmas: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Generation(m));
        if self.height < MIN_SIDE || self.width < MIN_SIDE {
            return bad(format!(
                "frame size {}x{} is below the {MIN_SIDE}x{MIN_SIDE} minimum",
                self.height, self.width
            ));
        }
        if self.num_frames == 0 {
            return bad("num_frames must be at least 1".into());
        }
        let bg = &self.background;
        if !(0.0..=1.0).contains(&bg.level) {
            return bad(format!("background level {} outside [0, 1]", bg.level));
        }
        if !(bg.noise_sigma >= 0.0 && bg.noise_sigma.is_finite()) {
            return bad(format!("noise sigma {} must be non-negative", bg.noise_sigma));
        }
        if !(bg.texture_amplitude >= 0.0 && bg.texture_amplitude.is_finite())
            || !(bg.texture_period > 0.0 && bg.texture_period.is_finite())
            || !(bg.drift.0.is_finite() && bg.drift.1.is_finite())
        {
            return bad("background texture parameters must be finite, amplitude ≥ 0, period > 0".into());
        }
        if !(self.gt_halfwidth_sigmas > 0.0 && self.gt_halfwidth_sigmas.is_finite()) {
            return bad("gt half-width must be positive".into());
        }
        let (xmax, ymax) = ((self.width - 1) as f64, (self.height - 1) as f64);
        for (i, tg) in self.targets.iter().enumerate() {
            if !(tg.sigma > 0.0 && tg.sigma.is_finite()) {
                return bad(format!("target {i}: sigma {} must be positive", tg.sigma));
            }
            if !(tg.amplitude > 0.0 && tg.amplitude <= 1.0) {
                return bad(format!("target {i}: amplitude {} outside (0, 1]", tg.amplitude));
            }
            for t in 0..self.num_frames {
                let (x, y) = tg.centre(t);
                if !(0.0..=xmax).contains(&x) || !(0.0..=ymax).contains(&y) {
                    return bad(format!(
                        "target {i} leaves the frame at t={t} (centre {x:.2}, {y:.2})"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Frames and per-frame ground-truth boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSequence {
    pub frames: Vec<Grid>,
    pub boxes: Vec<Vec<BBox>>,
}

/// Ground-truth square of half-width `gt_halfwidth_sigmas·σ`, clipped to the frame.
pub fn gt_box(config: &SynthConfig, target: &TargetSpec, t: usize) -> BBox {
    let (x, y) = target.centre(t);
    let hw = config.gt_halfwidth_sigmas * target.sigma;
    let (xmax, ymax) = ((config.width - 1) as f64, (config.height - 1) as f64);
    BBox::new(
        (x - hw).clamp(0.0, xmax),
        (y - hw).clamp(0.0, ymax),
        (x + hw).clamp(0.0, xmax),
        (y + hw).clamp(0.0, ymax),
    )
    .expect("clipped box is ordered")
}

/// Renders frame `t` (zero-based) of the sequence.
pub fn render_frame(config: &SynthConfig, t: usize) -> Result<Grid> {
    let (h, w) = (config.height, config.width);
    let bg = &config.background;
    Grid::from_fn(h, w, |r, c| {
        let mut v = bg.value(t, r, c);
        for tg in &config.targets {
            let (cx, cy) = tg.centre(t);
            let (dx, dy) = (c as f64 - cx, r as f64 - cy);
            v += tg.amplitude * (-(dx * dx + dy * dy) / (2.0 * tg.sigma * tg.sigma)).exp();
        }
        if bg.noise_sigma > 0.0 {
            v += bg.noise_sigma * rng::keyed_normal(config.seed, t as u64, (r * w + c) as u64);
        }
        v.clamp(0.0, 1.0)
    })
}

pub fn generate(config: &SynthConfig) -> Result<SynthSequence> {
    config.validate()?;
    let frames = (0..config.num_frames)
        .map(|t| render_frame(config, t))
        .collect::<Result<Vec<_>>>()?;
    let boxes = (0..config.num_frames)
        .map(|t| config.targets.iter().map(|tg| gt_box(config, tg, t)).collect())
        .collect();
    Ok(SynthSequence { frames, boxes })
}

/// File stem of frame `t`; also its identifier in ground-truth files.
pub fn frame_id(t: usize) -> String {
    format!("frame_{t:04}")
}

/// Writes `<id>.pgm` frames (8-bit), `<name>.manifest` and `gt.txt` into `dir`.
pub fn write_sequence(dir: &Path, name: &str, seq: &SynthSequence) -> Result<()> {
    let mut manifest = String::new();
    let mut gt = String::from("# frame_id x_min y_min x_max y_max\n");
    for (t, frame) in seq.frames.iter().enumerate() {
        let id = frame_id(t);
        let file = format!("{id}.pgm");
        let bytes: Vec<u8> = frame.data().iter().map(|&v| quantize_u8(255.0 * v)).collect();
        io::write_gray8(&dir.join(&file), frame.width(), frame.height(), &bytes)?;
        manifest.push_str(&file);
        manifest.push('\n');
        for b in &seq.boxes[t] {
            gt.push_str(&format!(
                "{id} {:?} {:?} {:?} {:?}\n",
                b.x_min, b.y_min, b.x_max, b.y_max
            ));
        }
    }
    let mpath = dir.join(format!("{name}.manifest"));
    std::fs::write(&mpath, manifest).map_err(|e| Error::io(&mpath, e))?;
    let gpath = dir.join("gt.txt");
    std::fs::write(&gpath, gt).map_err(|e| Error::io(&gpath, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank(num_frames: usize) -> SynthConfig {
        SynthConfig {
            height: 32,
            width: 40,
            num_frames,
            seed: 1,
            targets: vec![],
            background: BackgroundSpec {
                level: 0.3,
                ..BackgroundSpec::default()
            },
            gt_halfwidth_sigmas: 2.0,
        }
    }

    #[test]
    fn empty_scene_is_constant() {
        let seq = generate(&blank(3)).unwrap();
        for (f, b) in seq.frames.iter().zip(&seq.boxes) {
            assert!(f.data().iter().all(|&v| v == 0.3));
            assert!(b.is_empty());
        }
    }

    #[test]
    fn linear_motion() {
        let tg = TargetSpec {
            start: (10.0, 12.0),
            velocity: (2.0, 0.5),
            sigma: 1.0,
            amplitude: 0.5,
        };
        assert_eq!(tg.centre(5), (20.0, 14.5));
        let mut cfg = blank(6);
        cfg.targets.push(tg);
        let seq = generate(&cfg).unwrap();
        let b = &seq.boxes[5][0];
        assert_eq!((b.x_min, b.x_max), (18.0, 22.0));
        // brightest pixel sits on the centre
        let f = &seq.frames[5];
        let (mut best, mut at) = (0.0, (0, 0));
        for r in 0..f.height() {
            for c in 0..f.width() {
                if f.get(r, c) > best {
                    best = f.get(r, c);
                    at = (r, c);
                }
            }
        }
        assert_eq!(at.1, 20);
    }

    #[test]
    fn seeded_determinism() {
        let cfg = SynthConfig::moving_blob(3, 7);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 8;
        let (a, b) = (generate(&cfg).unwrap(), generate(&other).unwrap());
        assert_ne!(a.frames, b.frames);
        assert_eq!(a.boxes, b.boxes);
    }

    #[test]
    fn leaving_target_is_an_error() {
        let mut cfg = SynthConfig::moving_blob(50, 7);
        cfg.targets[0].velocity = (5.0, 0.0);
        assert!(matches!(generate(&cfg), Err(Error::Generation(_))));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = blank(1);
        cfg.height = 16;
        assert!(generate(&cfg).is_err());
        let mut cfg = blank(0);
        assert!(generate(&cfg).is_err());
        cfg.num_frames = 1;
        cfg.targets.push(TargetSpec {
            start: (5.0, 5.0),
            velocity: (0.0, 0.0),
            sigma: 0.0,
            amplitude: 0.5,
        });
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn boxes_are_clipped() {
        let mut cfg = blank(1);
        cfg.targets.push(TargetSpec {
            start: (0.5, 31.0),
            velocity: (0.0, 0.0),
            sigma: 2.0,
            amplitude: 1.0,
        });
        let b = gt_box(&cfg, &cfg.targets[0], 0);
        assert_eq!(b.x_min, 0.0);
        assert_eq!(b.y_max, 31.0);
    }
}
