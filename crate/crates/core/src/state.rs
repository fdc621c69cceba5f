//! Per-sequence automaton state and optional per-step layer captures.

use crate::error::Result;
use crate::grid::Grid;

/// Mutable state carried across the frames of one sequence.
///
/// All grids share the frame dimensions. `t` counts the frames already
/// committed, so `t == 0` means the next frame is the first of its sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RcaState {
    pub(crate) s_p: Grid,
    pub(crate) s_h: Grid,
    pub(crate) s_a: Grid,
    pub(crate) s_m: Grid,
    pub(crate) s_prev_b: Grid,
    pub(crate) s_prev_a: Grid,
    pub(crate) t: u64,
}

impl RcaState {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        let z = Grid::zeros(height, width)?;
        Ok(Self {
            s_p: z.clone(),
            s_h: z.clone(),
            s_a: z.clone(),
            s_m: z.clone(),
            s_prev_b: z.clone(),
            s_prev_a: z,
            t: 0,
        })
    }

    /// Zeroes every grid and rewinds the frame counter.
    pub fn reset(&mut self) {
        for g in [
            &mut self.s_p,
            &mut self.s_h,
            &mut self.s_a,
            &mut self.s_m,
            &mut self.s_prev_b,
            &mut self.s_prev_a,
        ] {
            g.fill(0.0);
        }
        self.t = 0;
    }

    pub fn dims(&self) -> (usize, usize) {
        self.s_p.dims()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn s_p(&self) -> &Grid {
        &self.s_p
    }

    pub fn s_h(&self) -> &Grid {
        &self.s_h
    }

    pub fn s_a(&self) -> &Grid {
        &self.s_a
    }

    pub fn s_m(&self) -> &Grid {
        &self.s_m
    }

    /// Contrast map of the previous frame.
    pub fn s_prev_b(&self) -> &Grid {
        &self.s_prev_b
    }

    /// Amacrine state of the previous frame.
    pub fn s_prev_a(&self) -> &Grid {
        &self.s_prev_a
    }

    #[cfg(test)]
    pub(crate) fn is_zeroed(&self) -> bool {
        self.t == 0
            && [
                &self.s_p,
                &self.s_h,
                &self.s_a,
                &self.s_m,
                &self.s_prev_b,
                &self.s_prev_a,
            ]
            .iter()
            .all(|g| g.data().iter().all(|&v| v == 0.0))
    }
}

/// Copies of every intermediate grid of a single automaton step.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    /// 1-based index of the frame within its sequence.
    pub t: u64,
    pub s_p: Grid,
    pub s_h: Grid,
    pub s_b_on: Grid,
    pub s_b_off: Grid,
    pub c_t: Grid,
    pub r_t: Grid,
    pub s_a: Grid,
    pub i_t: Grid,
    pub m_s: Grid,
    pub m_tau: Grid,
    pub s_m: Grid,
    pub m_t: Grid,
}

impl LayerTrace {
    /// `(name, grid)` pairs in pipeline order; names are file-system safe.
    pub fn layers(&self) -> [(&'static str, &Grid); 12] {
        [
            ("s_p", &self.s_p),
            ("s_h", &self.s_h),
            ("s_b_on", &self.s_b_on),
            ("s_b_off", &self.s_b_off),
            ("c_t", &self.c_t),
            ("r_t", &self.r_t),
            ("s_a", &self.s_a),
            ("i_t", &self.i_t),
            ("m_s", &self.m_s),
            ("m_tau", &self.m_tau),
            ("s_m", &self.s_m),
            ("m_t", &self.m_t),
        ]
    }
}
