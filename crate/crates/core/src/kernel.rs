//! Fixed convolution kernels and the spatial filters built on them.
//!
//! Every filter here uses replicate (clamp-to-edge) borders and correlation
//! orientation: output `(r, c)` is `Σ w[ky][kx] · in[r + ky − h][c + kx − h]`
//! with `h = size / 2`. Accumulation always runs row-major over the kernel,
//! so results are bitwise reproducible.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// How a kernel's weights were scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Weights sum to one.
    Sum,
    /// Absolute weights sum to one.
    L1,
    None,
}

/// Square odd-sized kernel, weights row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
    normalization: Normalization,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::Parameter(format!("kernel size {size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::Dimension(format!(
                "kernel of size {size} needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("kernel weights must be finite".into()));
        }
        Ok(Self {
            size,
            weights,
            normalization,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Weight at offset `(dy, dx)` from the centre.
    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let h = self.radius() as isize;
        self.weights[((dy + h) as usize) * self.size + (dx + h) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

fn offsets(radius: usize) -> impl Iterator<Item = (isize, isize)> {
    let h = radius as isize;
    (-h..=h).flat_map(move |y| (-h..=h).map(move |x| (y, x)))
}

/// Sum-normalised Gaussian on integer offsets.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "gaussian kernel size {size} must be odd"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!(
            "gaussian sigma {sigma} must be positive"
        )));
    }
    let denom = 2.0 * sigma * sigma;
    let raw: Vec<f64> = offsets(size / 2)
        .map(|(y, x)| (-((x * x + y * y) as f64) / denom).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Kernel::new(size, raw.iter().map(|w| w / total).collect(), Normalization::Sum)
}

/// Difference of Gaussians before normalisation.
///
/// Support is `size_param + 1` on a side (offsets in `[−size_param/2, size_param/2]`).
pub fn mexican_hat_raw(size_param: usize, sigma1: f64, sigma2: f64, w_surr: f64) -> Result<Kernel> {
    if size_param < 2 || !size_param.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "mexican hat size parameter {size_param} must be even and at least 2"
        )));
    }
    for (name, s) in [("sigma1", sigma1), ("sigma2", sigma2)] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Parameter(format!(
                "mexican hat {name} = {s} must be positive"
            )));
        }
    }
    if !w_surr.is_finite() {
        return Err(Error::Parameter("mexican hat w_surr must be finite".into()));
    }
    let d1 = 2.0 * sigma1 * sigma1;
    let d2 = 2.0 * sigma2 * sigma2;
    let weights = offsets(size_param / 2)
        .map(|(y, x)| {
            let r2 = (x * x + y * y) as f64;
            (-r2 / d1).exp() - w_surr * (-r2 / d2).exp()
        })
        .collect();
    Kernel::new(size_param + 1, weights, Normalization::None)
}

/// Centre–surround kernel scaled to unit L1 norm.
pub fn mexican_hat_kernel(size_param: usize, sigma1: f64, sigma2: f64, w_surr: f64) -> Result<Kernel> {
    let raw = mexican_hat_raw(size_param, sigma1, sigma2, w_surr)?;
    let norm = raw.l1_norm();
    if norm <= 0.0 {
        return Err(Error::Parameter("mexican hat kernel is identically zero".into()));
    }
    let size = raw.size;
    Kernel::new(
        size,
        raw.weights.into_iter().map(|w| w / norm).collect(),
        Normalization::L1,
    )
}

/// Copy of `input` extended by `pad` cells on every side with replicated edges.
pub(crate) fn pad_replicate(input: &Grid, pad: usize) -> (Vec<f64>, usize) {
    let (h, w) = input.dims();
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    let mut out = Vec::with_capacity(pw * ph);
    for pr in 0..ph {
        let r = (pr as isize - pad as isize).clamp(0, h as isize - 1) as usize;
        let row = input.row(r);
        let first = row[0];
        let last = row[w - 1];
        out.extend(std::iter::repeat_n(first, pad));
        out.extend_from_slice(row);
        out.extend(std::iter::repeat_n(last, pad));
    }
    (out, pw)
}

fn correlate(input: &Grid, size: usize, weights: &[f64]) -> Grid {
    let (h, w) = input.dims();
    let pad = size / 2;
    let (padded, pw) = pad_replicate(input, pad);
    let mut out = vec![0.0; h * w];
    // Taps outer, pixels inner: each pixel still sums its taps in row-major
    // order, but a whole row is updated per tap.
    for (r, acc) in out.chunks_exact_mut(w).enumerate() {
        for ky in 0..size {
            let prow = &padded[(r + ky) * pw..(r + ky + 1) * pw];
            for kx in 0..size {
                let wk = weights[ky * size + kx];
                for (a, v) in acc.iter_mut().zip(&prow[kx..kx + w]) {
                    *a += wk * v;
                }
            }
        }
    }
    Grid::from_vec(h, w, out).expect("shape preserved")
}

/// Same-size correlation with replicate borders.
pub fn convolve(input: &Grid, kernel: &Kernel) -> Grid {
    correlate(input, kernel.size, &kernel.weights)
}

/// `sqrt(gx² + gy²)` of the unscaled 3×3 Sobel responses.
///
/// Each response is formed from differences of mirrored taps, so flat regions
/// give exactly zero.
pub fn sobel_gradient_magnitude(input: &Grid) -> Grid {
    let (h, w) = input.dims();
    let (p, pw) = pad_replicate(input, 1);
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let up = &p[r * pw..(r + 1) * pw];
        let mid = &p[(r + 1) * pw..(r + 2) * pw];
        let down = &p[(r + 2) * pw..(r + 3) * pw];
        for c in 0..w {
            let gx = (up[c + 2] - up[c]) + 2.0 * (mid[c + 2] - mid[c]) + (down[c + 2] - down[c]);
            let gy = (down[c] - up[c]) + 2.0 * (down[c + 1] - up[c + 1]) + (down[c + 2] - up[c + 2]);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Grid::from_vec(h, w, out).expect("shape preserved")
}

/// Classical bilateral filter over a `d`×`d` window with replicate borders.
///
/// Spatial distance is in pixels. Each output is
/// `Σ w·v / Σ w` with `w = exp(−r²/2σ_s²)·exp(−(v − v_c)²/2σ_c²)`, accumulated
/// over the window in row-major order. The window includes the centre pixel,
/// so the normaliser is always at least one.
pub fn bilateral_filter(input: &Grid, d: usize, sigma_color: f64, sigma_space: f64) -> Result<Grid> {
    if d == 0 || d.is_multiple_of(2) {
        return Err(Error::Parameter(format!("bilateral diameter {d} must be odd")));
    }
    for (name, s) in [("sigma_color", sigma_color), ("sigma_space", sigma_space)] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Parameter(format!(
                "bilateral {name} = {s} must be positive"
            )));
        }
    }
    let (h, w) = input.dims();
    let pad = d / 2;
    let taps = d * d;
    let centre_tap = taps / 2;
    let space_denom = 2.0 * sigma_space * sigma_space;
    let color_denom = 2.0 * sigma_color * sigma_color;
    let spatial: Vec<f64> = offsets(pad)
        .map(|(y, x)| (-((x * x + y * y) as f64) / space_denom).exp())
        .collect();
    let (padded, pw) = pad_replicate(input, pad);

    // When the off-centre spatial weights are all far below one ulp of 1,
    // the normaliser rounds to exactly 1 and the numerator rounds to the
    // centre value wherever the neighbours' total contribution is under half
    // the float spacing around it. Those pixels are copied through; the
    // result is the same bits the full sum would give.
    let off_centre: f64 = spatial
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != centre_tap)
        .map(|(_, w)| w)
        .sum();
    let certifiable = off_centre < 2f64.powi(-60);
    let half_gap = 2f64.powi(-55);
    let mut bound = vec![0.0; w];
    let color = |diff: f64| {
        if diff == 0.0 {
            1.0
        } else {
            (-(diff * diff) / color_denom).exp()
        }
    };
    // Around a zero centre the range weight depends on the neighbour alone,
    // so it is tabulated once per padded pixel.
    let zero_centre: Vec<f64> = if input.data().contains(&0.0) {
        padded.iter().map(|&v| color(v)).collect()
    } else {
        Vec::new()
    };

    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let window_row = |ky: usize| &padded[(r + ky) * pw..(r + ky + 1) * pw];
        let centre_row = &window_row(pad)[pad..pad + w];
        if certifiable {
            bound.fill(0.0);
            for k in (0..taps).filter(|&k| k != centre_tap) {
                let (ky, kx) = (k / d, k % d);
                let ws = spatial[k];
                for (b, v) in bound.iter_mut().zip(&window_row(ky)[kx..kx + w]) {
                    *b += ws * v.abs();
                }
            }
        }
        for c in 0..w {
            let centre = centre_row[c];
            if certifiable
                && centre.abs() >= f64::MIN_POSITIVE
                && 1.01 * bound[c] < centre.abs() * half_gap
            {
                out.push(centre);
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for ky in 0..d {
                let start = (r + ky) * pw + c;
                let row = &padded[start..start + d];
                let ws_row = &spatial[ky * d..(ky + 1) * d];
                if centre == 0.0 {
                    for ((ws, &v), wc) in ws_row.iter().zip(row).zip(&zero_centre[start..start + d]) {
                        let wt = ws * wc;
                        num += wt * v;
                        den += wt;
                    }
                } else {
                    for (ws, &v) in ws_row.iter().zip(row) {
                        let wt = ws * color(v - centre);
                        num += wt * v;
                        den += wt;
                    }
                }
            }
            out.push(num / den);
        }
    }
    Grid::from_vec(h, w, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
    const SOBEL_Y: [f64; 9] = [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0];

    fn impulse(n: usize) -> Grid {
        let mut g = Grid::zeros(n, n).unwrap();
        g.set(n / 2, n / 2, 1.0);
        g
    }

    #[test]
    fn gaussian_contracts() {
        let k = gaussian_kernel(3, 1.0).unwrap();
        assert!((k.sum() - 1.0).abs() < 1e-12);
        // 1 / (1 + 4 e^{-1/2} + 4 e^{-1})
        assert!((k.at(0, 0) - 0.204_179_955_571_658_1).abs() < 1e-12);
        let one = gaussian_kernel(1, 1.0).unwrap();
        assert_eq!(one.weights(), &[1.0]);
        assert!(matches!(gaussian_kernel(4, 1.0), Err(Error::Parameter(_))));
        assert!(gaussian_kernel(3, 0.0).is_err());
    }

    #[test]
    fn mexican_hat_contracts() {
        let raw = mexican_hat_raw(4, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(raw.size(), 5);
        assert_eq!(raw.at(0, 0), 0.5);
        // e^{-2} - 0.5 e^{-1/2}
        assert!((raw.at(0, 2) - (-0.167_930_046_619_704)).abs() < 1e-12);
        let k = mexican_hat_kernel(4, 1.0, 2.0, 0.5).unwrap();
        assert!((k.l1_norm() - 1.0).abs() < 1e-12);
        assert_eq!(k.normalization(), Normalization::L1);
        assert!(mexican_hat_kernel(4, 0.0, 2.0, 0.5).is_err());
        assert!(mexican_hat_kernel(4, 1.0, -2.0, 0.5).is_err());
    }

    #[test]
    fn kernels_are_symmetric() {
        for k in [
            gaussian_kernel(5, 1.3).unwrap(),
            mexican_hat_kernel(4, 1.0, 2.0, 0.5).unwrap(),
        ] {
            let h = k.radius() as isize;
            for y in -h..=h {
                for x in -h..=h {
                    assert_eq!(k.at(y, x), k.at(-y, -x));
                    assert_eq!(k.at(y, x), k.at(x, y));
                }
            }
        }
    }

    #[test]
    fn convolve_constant_and_zero() {
        let k = gaussian_kernel(3, 1.0).unwrap();
        let c = Grid::new(6, 7, 0.375).unwrap();
        let out = convolve(&c, &k);
        assert!(out.data().iter().all(|&v| (v - 0.375).abs() < 1e-15));
        let z = Grid::zeros(4, 4).unwrap();
        assert_eq!(convolve(&z, &k), z);
    }

    #[test]
    fn impulse_stamps_kernel() {
        let k = gaussian_kernel(3, 1.0).unwrap();
        let out = convolve(&impulse(9), &k);
        for r in 0..9isize {
            for c in 0..9isize {
                let (dy, dx) = (r - 4, c - 4);
                let expected = if dy.abs() <= 1 && dx.abs() <= 1 {
                    k.at(dy, dx)
                } else {
                    0.0
                };
                assert_eq!(out.get(r as usize, c as usize), expected);
            }
        }
    }

    #[test]
    fn kernel_larger_than_grid() {
        let k = mexican_hat_kernel(4, 1.0, 2.0, 0.5).unwrap();
        let g = Grid::from_vec(1, 2, vec![1.0, 3.0]).unwrap();
        let out = convolve(&g, &k);
        assert_eq!(out.dims(), (1, 2));
        assert!(out.all_finite());
    }

    #[test]
    fn sobel_constant_and_ramp() {
        let c = Grid::new(5, 5, 0.7).unwrap();
        assert!(sobel_gradient_magnitude(&c).data().iter().all(|&v| v == 0.0));
        let delta = 0.125;
        let ramp = Grid::from_fn(6, 8, |_, c| c as f64 * delta).unwrap();
        let g = sobel_gradient_magnitude(&ramp);
        for r in 0..6 {
            for c in 1..7 {
                assert!((g.get(r, c) - 8.0 * delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sobel_impulse_pattern() {
        let g = sobel_gradient_magnitude(&impulse(7));
        // Direct oracle: the impulse picks up one Sobel tap per axis.
        for r in 0..7isize {
            for c in 0..7isize {
                let (dy, dx) = (3 - r, 3 - c);
                let (gx, gy) = if dy.abs() <= 1 && dx.abs() <= 1 {
                    let i = ((dy + 1) * 3 + dx + 1) as usize;
                    (SOBEL_X[i], SOBEL_Y[i])
                } else {
                    (0.0, 0.0)
                };
                let expected = (gx * gx + gy * gy).sqrt();
                assert_eq!(g.get(r as usize, c as usize), expected);
            }
        }
        assert_eq!(g.get(3, 2), g.get(3, 4));
        assert_eq!(g.get(2, 3), g.get(4, 3));
        assert_eq!(g.get(3, 3), 0.0);
    }

    #[test]
    fn bilateral_constant_and_zero() {
        let c = Grid::new(6, 6, 0.42).unwrap();
        assert_eq!(bilateral_filter(&c, 5, 0.1, 0.1).unwrap(), c);
        let z = Grid::zeros(3, 5).unwrap();
        assert_eq!(bilateral_filter(&z, 5, 0.1, 0.1).unwrap(), z);
        assert!(matches!(
            bilateral_filter(&z, 4, 0.1, 0.1),
            Err(Error::Parameter(_))
        ));
        assert!(bilateral_filter(&z, 5, 0.0, 0.1).is_err());
    }

    fn bilateral_direct(input: &Grid, d: usize, sc: f64, ss: f64) -> Grid {
        let (h, w) = input.dims();
        let r = (d / 2) as isize;
        Grid::from_fn(h, w, |y, x| {
            let centre = input.get(y, x);
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = input.get_clamped(y as isize + dy, x as isize + dx);
                    let ws = (-((dx * dx + dy * dy) as f64) / (2.0 * ss * ss)).exp();
                    let diff = v - centre;
                    let wt = ws * (-(diff * diff) / (2.0 * sc * sc)).exp();
                    num += wt * v;
                    den += wt;
                }
            }
            num / den
        })
        .unwrap()
    }

    #[test]
    fn bilateral_matches_direct_sum_bitwise() {
        let mut rng = crate::rng::SplitMix64::new(5);
        for (h, w, d, sc, ss) in [
            (9, 11, 5, 0.1, 0.1),
            (7, 6, 5, 0.3, 1.5),
            (1, 4, 3, 0.2, 0.8),
            (5, 5, 7, 0.5, 2.0),
            (3, 2, 1, 0.1, 0.1),
        ] {
            let g = Grid::from_fn(h, w, |_, _| rng.uniform(0.0, 1.5)).unwrap();
            let fast = bilateral_filter(&g, d, sc, ss).unwrap();
            assert_eq!(fast, bilateral_direct(&g, d, sc, ss), "{h}x{w} d={d}");
        }
        // zeros, tiny values and wide dynamic range next to each other
        let g = Grid::from_fn(24, 24, |r, c| match (r * 5 + c * 3) % 7 {
            0 | 1 => 0.0,
            2 => 1e-300,
            3 => rng.uniform(0.0, 1e-18),
            4 => rng.uniform(0.0, 255.0),
            _ => rng.uniform(0.0, 1.0),
        })
        .unwrap();
        for (sc, ss) in [(0.1, 0.1), (0.1, 0.05), (1.0, 0.1), (0.1, 0.3)] {
            let fast = bilateral_filter(&g, 5, sc, ss).unwrap();
            let direct = bilateral_direct(&g, 5, sc, ss);
            let same = fast
                .data()
                .iter()
                .zip(direct.data())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "sc={sc} ss={ss}");
        }
    }
}
