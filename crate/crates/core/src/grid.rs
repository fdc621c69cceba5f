//! Dense row-major grid of `f64` values.
//!
//! A [`Grid`] carries input frames, every intermediate layer state, and the
//! motion maps. Indexing is `(row, col)` with the origin at the top-left.

use crate::error::{Error, Result};

/// Largest element count accepted for a single grid.
const MAX_ELEMENTS: usize = (isize::MAX as usize) / std::mem::size_of::<f64>();

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

fn checked_len(height: usize, width: usize) -> Result<usize> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    match height.checked_mul(width) {
        Some(n) if n <= MAX_ELEMENTS => Ok(n),
        _ => Err(Error::Dimension(format!(
            "grid dimensions {height}x{width} overflow addressable memory"
        ))),
    }
}

impl Grid {
    /// A `height`×`width` grid with every element set to `fill`.
    pub fn new(height: usize, width: usize, fill: f64) -> Result<Self> {
        let len = checked_len(height, width)?;
        if !fill.is_finite() {
            return Err(Error::Parameter(format!("fill value {fill} is not finite")));
        }
        Ok(Self {
            height,
            width,
            data: vec![fill; len],
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, 0.0)
    }

    /// Wraps row-major `data`. The length must equal `height * width`.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        let len = checked_len(height, width)?;
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "expected {len} values for a {height}x{width} grid, got {}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("grid value {v} is not finite")));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds a grid by evaluating `f(row, col)` at every cell.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let len = checked_len(height, width)?;
        let mut data = Vec::with_capacity(len);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec(height, width, data)
    }

    /// Same shape as `self`, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: vec![0.0; self.data.len()],
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; grids have at least one cell.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// Value at `(row, col)` with coordinates clamped to the grid (replicate border).
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dims() == other.dims()
    }

    pub(crate) fn ensure_same_shape(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two equally shaped grids.
    ///
    /// Panics on shape mismatch; callers validate shapes first.
    pub fn zip_map(&self, other: &Grid, f: impl Fn(f64, f64) -> f64) -> Grid {
        assert!(self.same_shape(other), "zip_map on mismatched grids");
        Grid {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute element-wise difference.
    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        assert!(self.same_shape(other), "max_abs_diff on mismatched grids");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
