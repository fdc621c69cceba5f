//! The five-layer retinal cellular automaton.
//!
//! Each layer is exposed as a free function so it can be checked in
//! isolation; [`RcaEngine`] chains them in order and owns the temporal
//! memory of one sequence.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{self, Kernel};
use crate::params::RcaParams;
use crate::state::{LayerTrace, RcaState};

/// Below this maximum the enhanced map is treated as blank.
pub const ENHANCE_ZERO_MAX: f64 = 1e-12;

/// Layer 1: `g_p·tanh(v − θ_p)` above threshold, `0.1·v` otherwise.
pub fn photoreceptor_adapt(frame: &Grid, theta_p: f64, g_p: f64) -> Grid {
    frame.map(|v| adapt_pixel(v, theta_p, g_p))
}

#[inline]
pub fn adapt_pixel(v: f64, theta_p: f64, g_p: f64) -> f64 {
    if v > theta_p {
        g_p * (v - theta_p).tanh()
    } else {
        0.1 * v
    }
}

/// Layer 2: lateral inhibition, `max(S_p − σ_h·(K_h ∗ S_p), 0)`.
pub fn horizontal_inhibit(s_p: &Grid, k_h: &Kernel, sigma_h: f64) -> Grid {
    let n = kernel::convolve(s_p, k_h);
    s_p.zip_map(&n, |p, n| (p - sigma_h * n).max(0.0))
}

/// ON, OFF and summed contrast channels of the bipolar layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipolar {
    pub on: Grid,
    pub off: Grid,
    pub contrast: Grid,
}

/// Layer 3: rectified ON/OFF responses and their sum `C_t`.
pub fn bipolar_onoff(s_h: &Grid, theta_b: f64, g_b: f64) -> Bipolar {
    let on = s_h.map(|v| (g_b * (v - theta_b)).max(0.0));
    let off = s_h.map(|v| (g_b * (-v - theta_b)).max(0.0));
    let contrast = on.zip_map(&off, |a, b| a + b);
    Bipolar { on, off, contrast }
}

/// Temporal response `R_t` and smoothed amacrine state `S_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amacrine {
    pub response: Grid,
    pub state: Grid,
}

/// Layer 4: temporal extraction with exponential memory.
///
/// On the first frame of a sequence (`state.t() == 0`) the response is the
/// Sobel gradient magnitude of `c_t`; afterwards it is the absolute change
/// from the stored contrast map. The state itself is not modified.
pub fn amacrine_update(c_t: &Grid, state: &RcaState, alpha: f64, beta: f64) -> Result<Amacrine> {
    c_t.ensure_same_shape(&state.s_prev_b, "contrast map vs amacrine memory")?;
    let response = if state.t == 0 {
        kernel::sobel_gradient_magnitude(c_t).map(|g| beta * g)
    } else {
        c_t.zip_map(&state.s_prev_b, |c, prev| beta * (c - prev).abs())
    };
    let smoothed = state
        .s_prev_a
        .zip_map(&response, |prev, r| alpha * prev + (1.0 - alpha) * r);
    Ok(Amacrine {
        response,
        state: smoothed,
    })
}

/// Intermediate and final grids of the magnocellular layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Magno {
    /// `C_t + γ_a·S_a`.
    pub merged: Grid,
    /// Centre–surround response `K_m ∗ I_t`.
    pub spatial: Grid,
    /// `γ_τ·S_a`.
    pub temporal: Grid,
    /// `g_m·max(0, tanh(M_s + M_τ − θ_m))`.
    pub state: Grid,
}

/// `g_m·max(0, tanh(x − θ_m))`; tanh keeps the sign of its argument.
#[inline]
pub fn magno_threshold(x: f64, theta_m: f64, g_m: f64) -> f64 {
    let u = x - theta_m;
    if u > 0.0 {
        g_m * u.tanh()
    } else {
        0.0
    }
}

/// Layer 5: spatial–temporal motion integration.
pub fn magno_integrate(c_t: &Grid, s_a: &Grid, k_m: &Kernel, params: &RcaParams) -> Result<Magno> {
    c_t.ensure_same_shape(s_a, "contrast map vs amacrine state")?;
    let merged = c_t.zip_map(s_a, |c, a| c + params.gamma_a * a);
    let spatial = kernel::convolve(&merged, k_m);
    let temporal = s_a.map(|a| params.gamma_tau * a);
    let state = spatial.zip_map(&temporal, |s, t| {
        magno_threshold(s + t, params.theta_m, params.g_m)
    });
    Ok(Magno {
        merged,
        spatial,
        temporal,
        state,
    })
}

/// Rectified power law, bilateral smoothing, then max-normalisation to `[0, 255]`.
///
/// Maps whose filtered maximum is at most [`ENHANCE_ZERO_MAX`] come back as zeros.
pub fn enhance(raw: &Grid, params: &RcaParams) -> Result<Grid> {
    let gamma = params.gamma_p;
    let compressed = raw.map(|v| if v > 0.0 { v.powf(gamma) } else { 0.0 });
    let filtered = kernel::bilateral_filter(
        &compressed,
        params.bilateral_d,
        params.bilateral_sigma_color,
        params.bilateral_sigma_space,
    )?;
    let peak = filtered.max();
    if peak > ENHANCE_ZERO_MAX {
        Ok(filtered.map(|z| 255.0 * (z / peak)))
    } else {
        Ok(filtered.zeros_like())
    }
}

/// Result of one automaton step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// Motion map in `[0, 255]`, aligned with the input frame.
    pub motion: Grid,
    /// Present when tracing is enabled on the engine.
    pub trace: Option<LayerTrace>,
}

/// Runs the automaton over the frames of one sequence.
///
/// Frames must arrive in temporal order. The first frame fixes the grid
/// size; a frame of a different size mid-sequence is rejected.
#[derive(Debug, Clone)]
pub struct RcaEngine {
    params: RcaParams,
    k_h: Kernel,
    k_m: Kernel,
    state: Option<RcaState>,
    trace_enabled: bool,
}

impl RcaEngine {
    pub fn new(params: RcaParams) -> Result<Self> {
        params.validate()?;
        let k_h = kernel::gaussian_kernel(params.kh_size, params.kh_sigma)?;
        let k_m = kernel::mexican_hat_kernel(
            params.dog_size_param,
            params.dog_sigma1,
            params.dog_sigma2,
            params.dog_w_surr,
        )?;
        Ok(Self {
            params,
            k_h,
            k_m,
            state: None,
            trace_enabled: false,
        })
    }

    pub fn with_trace(mut self, enabled: bool) -> Self {
        self.trace_enabled = enabled;
        self
    }

    pub fn set_trace(&mut self, enabled: bool) {
        self.trace_enabled = enabled;
    }

    pub fn params(&self) -> &RcaParams {
        &self.params
    }

    pub fn horizontal_kernel(&self) -> &Kernel {
        &self.k_h
    }

    pub fn magno_kernel(&self) -> &Kernel {
        &self.k_m
    }

    /// Current state, `None` before the first frame.
    pub fn state(&self) -> Option<&RcaState> {
        self.state.as_ref()
    }

    /// Frames committed in the current sequence.
    pub fn frames_seen(&self) -> u64 {
        self.state.as_ref().map_or(0, |s| s.t)
    }

    /// Starts a new sequence: zeroes all state and the frame counter.
    pub fn reset(&mut self) {
        if let Some(state) = self.state.as_mut() {
            state.reset();
        }
    }

    fn prepare_state(&mut self, frame: &Grid) -> Result<()> {
        let (h, w) = frame.dims();
        match self.state.as_mut() {
            Some(state) if state.dims() == (h, w) => Ok(()),
            Some(state) if state.t > 0 => Err(Error::Sequence(format!(
                "frame {} is {h}x{w} but the sequence started at {}x{}",
                state.t + 1,
                state.dims().0,
                state.dims().1
            ))),
            _ => {
                self.state = Some(RcaState::new(h, w)?);
                Ok(())
            }
        }
    }

    /// Processes the next frame and commits temporal memory.
    pub fn step(&mut self, frame: &Grid) -> Result<StepOutput> {
        self.prepare_state(frame)?;
        let p = &self.params;
        let state = self.state.as_mut().expect("state prepared");

        let s_p = photoreceptor_adapt(frame, p.theta_p, p.g_p);
        let s_h = horizontal_inhibit(&s_p, &self.k_h, p.sigma_h);
        let bipolar = bipolar_onoff(&s_h, p.theta_b, p.g_b);
        let amacrine = amacrine_update(&bipolar.contrast, state, p.alpha, p.beta)?;
        let magno = magno_integrate(&bipolar.contrast, &amacrine.state, &self.k_m, p)?;
        let blend = magno
            .state
            .zip_map(&amacrine.state, |m, a| p.eta_m * m + (1.0 - p.eta_m) * a);
        let motion = enhance(&blend, p)?;

        let t = state.t + 1;
        let trace = self.trace_enabled.then(|| LayerTrace {
            t,
            s_p: s_p.clone(),
            s_h: s_h.clone(),
            s_b_on: bipolar.on.clone(),
            s_b_off: bipolar.off.clone(),
            c_t: bipolar.contrast.clone(),
            r_t: amacrine.response.clone(),
            s_a: amacrine.state.clone(),
            i_t: magno.merged.clone(),
            m_s: magno.spatial.clone(),
            m_tau: magno.temporal.clone(),
            s_m: magno.state.clone(),
            m_t: motion.clone(),
        });

        state.s_p = s_p;
        state.s_h = s_h;
        state.s_prev_a = amacrine.state.clone();
        state.s_a = amacrine.state;
        state.s_m = magno.state;
        state.s_prev_b = bipolar.contrast;
        state.t = t;

        Ok(StepOutput { motion, trace })
    }

    /// Resets, then steps through `frames` in order, returning one map per frame.
    pub fn process_sequence(&mut self, frames: &[Grid]) -> Result<Vec<Grid>> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Parameter("cannot process an empty sequence".into()))?;
        if let Some((i, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| !f.same_shape(first))
        {
            return Err(Error::Sequence(format!(
                "frame {} is {}x{} but frame 1 is {}x{}",
                i + 1,
                f.height(),
                f.width(),
                first.height(),
                first.width()
            )));
        }
        self.reset();
        frames
            .iter()
            .map(|f| self.step(f).map(|out| out.motion))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RcaParams {
        RcaParams::default()
    }

    fn uniform(v: f64) -> Grid {
        Grid::new(6, 6, v).unwrap()
    }

    #[test]
    fn photoreceptor_branches() {
        let p = params();
        assert_eq!(adapt_pixel(0.0, p.theta_p, p.g_p), 0.0);
        assert_eq!(adapt_pixel(0.05, p.theta_p, p.g_p), 0.1 * 0.05);
        assert!((adapt_pixel(0.05, p.theta_p, p.g_p) - 0.005).abs() < 1e-18);
        // 1.5 tanh(0.4), 30-digit reference
        assert!((adapt_pixel(0.5, p.theta_p, p.g_p) - 0.569_923_443_382_837_3).abs() < 1e-12);
        // exactly at threshold takes the linear branch
        assert_eq!(adapt_pixel(0.1, p.theta_p, p.g_p), 0.1 * 0.1);
    }

    #[test]
    fn horizontal_constant_and_impulse() {
        let k = kernel::gaussian_kernel(3, 1.0).unwrap();
        let out = horizontal_inhibit(&uniform(0.5), &k, 0.3);
        assert!(out.data().iter().all(|&v| (v - 0.35).abs() < 1e-15));
        let z = uniform(0.0);
        assert_eq!(horizontal_inhibit(&z, &k, 0.3), z);
        let mut imp = Grid::zeros(7, 7).unwrap();
        imp.set(3, 3, 1.0);
        let out = horizontal_inhibit(&imp, &k, 0.3);
        assert!((out.get(3, 3) - 0.938_746_013_328_502_6).abs() < 1e-12);
        // neighbours are pure inhibition, rectified to zero
        assert_eq!(out.get(3, 4), 0.0);
    }

    #[test]
    fn bipolar_cases() {
        let b = bipolar_onoff(&uniform(0.0), 0.2, 2.0);
        assert!(b.contrast.data().iter().all(|&v| v == 0.0));
        let b = bipolar_onoff(&uniform(0.5), 0.2, 2.0);
        assert!(b.on.data().iter().all(|&v| (v - 0.6).abs() < 1e-15));
        assert!(b.off.data().iter().all(|&v| v == 0.0));
        assert_eq!(b.on, b.contrast);
        let b = bipolar_onoff(&uniform(0.2), 0.2, 2.0);
        assert!(b.contrast.data().iter().all(|&v| v == 0.0));
        // negative input drives the OFF channel
        let b = bipolar_onoff(&uniform(-0.5), 0.2, 2.0);
        assert!(b.off.data().iter().all(|&v| (v - 0.6).abs() < 1e-15));
    }

    #[test]
    fn amacrine_cases() {
        let p = params();
        let state = RcaState::new(6, 6).unwrap();
        let out = amacrine_update(&uniform(0.8), &state, p.alpha, p.beta).unwrap();
        assert!(out.state.data().iter().all(|&v| v == 0.0));

        let mut state = RcaState::new(6, 6).unwrap();
        state.t = 3;
        state.s_prev_b = uniform(0.4);
        state.s_prev_a = uniform(0.3);
        let out = amacrine_update(&uniform(0.4), &state, p.alpha, p.beta).unwrap();
        assert!(out.state.data().iter().all(|&v| v == 0.8 * 0.3));

        state.s_prev_a = uniform(0.0);
        let mut c = uniform(0.4);
        c.set(2, 2, 1.4);
        let out = amacrine_update(&c, &state, p.alpha, p.beta).unwrap();
        assert!((out.state.get(2, 2) - 0.24).abs() < 1e-12);
        assert_eq!(out.state.get(0, 0), 0.0);

        let wrong = Grid::zeros(5, 6).unwrap();
        assert!(matches!(
            amacrine_update(&wrong, &state, p.alpha, p.beta),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn magno_cases() {
        let p = params();
        let k_m = kernel::mexican_hat_kernel(4, 1.0, 2.0, 0.5).unwrap();
        let z = uniform(0.0);
        let out = magno_integrate(&z, &z, &k_m, &p).unwrap();
        assert!(out.state.data().iter().all(|&v| v == 0.0));

        assert_eq!(magno_threshold(p.theta_m, p.theta_m, p.g_m), 0.0);
        // 2.5 tanh(1), 30-digit reference
        let expected = 1.903_985_389_889_412_2;
        assert!((magno_threshold(p.theta_m + 1.0, p.theta_m, p.g_m) - expected).abs() < 1e-12);

        // uniform S_a chosen so that M_s + M_tau = theta_m + 1 everywhere
        let a = (p.theta_m + 1.0) / (p.gamma_a * k_m.sum() + p.gamma_tau);
        let out = magno_integrate(&z, &uniform(a), &k_m, &p).unwrap();
        for &v in out.state.data() {
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn enhance_cases() {
        let p = params();
        assert_eq!(enhance(&uniform(0.0), &p).unwrap(), uniform(0.0));
        assert_eq!(enhance(&uniform(-3.0), &p).unwrap(), uniform(0.0));
        let out = enhance(&uniform(0.3), &p).unwrap();
        assert!(out.data().iter().all(|&v| v == 255.0));
        let g = Grid::from_fn(8, 8, |r, c| ((r * 8 + c) as f64 * 0.37).sin()).unwrap();
        let out = enhance(&g, &p).unwrap();
        assert_eq!(out.max(), 255.0);
        assert!(out.min() >= 0.0);
    }

    #[test]
    fn zero_frames_give_zero_maps() {
        let mut engine = RcaEngine::new(params()).unwrap();
        let frames = vec![Grid::zeros(12, 10).unwrap(); 4];
        for m in engine.process_sequence(&frames).unwrap() {
            assert!(m.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identical_frames_decay_memory() {
        let mut engine = RcaEngine::new(params()).unwrap();
        let f = Grid::from_fn(16, 16, |r, c| if (r / 4 + c / 4) % 2 == 0 { 0.9 } else { 0.1 }).unwrap();
        engine.step(&f).unwrap();
        let first = engine.state().unwrap().s_a().clone();
        assert!(first.max() > 0.0);
        engine.step(&f).unwrap();
        let second = engine.state().unwrap().s_a();
        for (a, b) in second.data().iter().zip(first.data()) {
            assert_eq!(*a, 0.8 * b);
        }
    }

    #[test]
    fn dimension_change_mid_sequence_is_rejected() {
        let mut engine = RcaEngine::new(params()).unwrap();
        engine.step(&Grid::zeros(8, 8).unwrap()).unwrap();
        assert!(matches!(
            engine.step(&Grid::zeros(8, 9).unwrap()),
            Err(Error::Sequence(_))
        ));
        // a reset starts a new sequence that may use a new size
        engine.reset();
        engine.step(&Grid::zeros(8, 9).unwrap()).unwrap();
    }

    #[test]
    fn process_sequence_errors() {
        let mut engine = RcaEngine::new(params()).unwrap();
        assert!(matches!(
            engine.process_sequence(&[]),
            Err(Error::Parameter(_))
        ));
        let frames = vec![Grid::zeros(4, 4).unwrap(), Grid::zeros(4, 5).unwrap()];
        assert!(matches!(
            engine.process_sequence(&frames),
            Err(Error::Sequence(_))
        ));
    }

    #[test]
    fn trace_does_not_change_output() {
        let frames: Vec<Grid> = (0..3)
            .map(|t| Grid::from_fn(10, 10, |r, c| if r == 5 && c == 2 + 2 * t { 0.9 } else { 0.15 }).unwrap())
            .collect();
        let mut plain = RcaEngine::new(params()).unwrap();
        let mut traced = RcaEngine::new(params()).unwrap().with_trace(true);
        for f in &frames {
            let a = plain.step(f).unwrap();
            let b = traced.step(f).unwrap();
            assert!(a.trace.is_none());
            let trace = b.trace.unwrap();
            assert_eq!(a.motion, b.motion);
            assert_eq!(trace.m_t, b.motion);
            for (_, g) in trace.layers() {
                assert_eq!(g.dims(), f.dims());
            }
        }
    }
}
