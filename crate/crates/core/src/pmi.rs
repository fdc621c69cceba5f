//! Forward-only toy of the bidirectional appearance/motion cross-attention block.
//!
//! Weights are seeded pseudo-random, so the module is useful for checking
//! shapes, softmax normalisation, residual semantics and the pooling and
//! upsampling contracts, not for producing meaningful features.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const LN_EPS: f64 = 1e-5;

/// `C×H×W` feature tensor, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureBlock {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "feature block {channels}x{height}x{width} has an empty axis"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::Dimension(format!(
                "feature block {channels}x{height}x{width} needs {} values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("feature values must be finite".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    /// Uniform values in `[-1, 1)` from `seed`.
    pub fn random(channels: usize, height: usize, width: usize, seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::new(seed);
        let data = (0..channels * height * width)
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect();
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn max_abs_diff(&self, other: &FeatureBlock) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense row-major matrix; token matrices are `tokens × channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Upsample {
    /// Half-pixel-centre bilinear interpolation (inference).
    Bilinear,
    /// Floor-index nearest neighbour (training).
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmiConfig {
    pub channels: usize,
    pub heads: usize,
    pub pooled: (usize, usize),
    pub ffn_expansion: usize,
    pub w_pool: f64,
    pub seed: u64,
    pub upsample: Upsample,
    pub positional_embedding: bool,
}

impl Default for PmiConfig {
    fn default() -> Self {
        Self {
            channels: 128,
            heads: 8,
            pooled: (20, 20),
            ffn_expansion: 4,
            w_pool: 0.5,
            seed: 0,
            upsample: Upsample::Bilinear,
            positional_embedding: true,
        }
    }
}

impl PmiConfig {
    pub fn head_dim(&self) -> usize {
        self.channels / self.heads.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.channels == 0 || !self.channels.is_multiple_of(self.heads) {
            return Err(Error::Parameter(format!(
                "channels {} must be a positive multiple of heads {}",
                self.channels, self.heads
            )));
        }
        if self.positional_embedding && !self.channels.is_multiple_of(4) {
            return Err(Error::Parameter(format!(
                "2D sinusoidal embeddings need channels divisible by 4, got {}",
                self.channels
            )));
        }
        if self.pooled.0 == 0 || self.pooled.1 == 0 {
            return Err(Error::Parameter("pooled size must be at least 1x1".into()));
        }
        if self.ffn_expansion == 0 {
            return Err(Error::Parameter("ffn expansion must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.w_pool) {
            return Err(Error::Parameter(format!(
                "w_pool {} outside [0, 1]",
                self.w_pool
            )));
        }
        Ok(())
    }
}

/// Affine map `y = W x + b` with `W` stored `out × in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub inputs: usize,
    pub outputs: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    fn random(inputs: usize, outputs: usize, bound: f64, rng: &mut SplitMix64) -> Self {
        let weight = (0..inputs * outputs)
            .map(|_| rng.uniform(-bound, bound))
            .collect();
        let bias = (0..outputs).map(|_| rng.uniform(-bound, bound)).collect();
        Self {
            inputs,
            outputs,
            weight,
            bias,
        }
    }

    pub fn zero(&mut self) {
        self.weight.fill(0.0);
        self.bias.fill(0.0);
    }

    fn apply_row(&self, x: &[f64], out: &mut [f64]) {
        for (o, y) in out.iter_mut().enumerate() {
            let w = &self.weight[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.bias[o];
            for (wi, xi) in w.iter().zip(x) {
                acc += wi * xi;
            }
            *y = acc;
        }
    }

    /// Applies the map to every row of `x`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows, self.outputs);
        for r in 0..x.rows {
            self.apply_row(x.row(r), out.row_mut(r));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LayerNorm {
    fn identity(dim: usize) -> Self {
        Self {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
        }
    }

    fn apply_row(&self, x: &mut [f64]) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        for (i, v) in x.iter_mut().enumerate() {
            *v = (*v - mean) * inv * self.gamma[i] + self.beta[i];
        }
    }
}

/// One attention direction: queries from one pathway, keys and values from the other.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionWeights {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub norm1: LayerNorm,
    pub norm2: LayerNorm,
    pub ffn_in: Linear,
    pub ffn_out: Linear,
    /// Projection of the interaction signal back into feature space.
    pub phi: Linear,
}

impl DirectionWeights {
    fn generate(c: usize, expansion: usize, rng: &mut SplitMix64) -> Self {
        let bound = 1.0 / (c as f64).sqrt();
        Self {
            query: Linear::random(c, c, bound, rng),
            key: Linear::random(c, c, bound, rng),
            value: Linear::random(c, c, bound, rng),
            output: Linear::random(c, c, bound, rng),
            norm1: LayerNorm::identity(c),
            norm2: LayerNorm::identity(c),
            ffn_in: Linear::random(c, c * expansion, bound, rng),
            ffn_out: Linear::random(c * expansion, c, bound, rng),
            phi: Linear::random(c, c, bound, rng),
        }
    }

    fn linears_mut(&mut self) -> [&mut Linear; 7] {
        [
            &mut self.query,
            &mut self.key,
            &mut self.value,
            &mut self.output,
            &mut self.ffn_in,
            &mut self.ffn_out,
            &mut self.phi,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmiWeights {
    /// Appearance queries attending to motion keys/values.
    pub p_from_m: DirectionWeights,
    /// Motion queries attending to appearance keys/values.
    pub m_from_p: DirectionWeights,
    /// `2C → C` projection of the concatenated outputs.
    pub fusion: Linear,
}

impl PmiWeights {
    /// Every weight and bias uniform in `[-1/√C, 1/√C)`; layer norms start as identity.
    pub fn generate(config: &PmiConfig) -> Result<Self> {
        config.validate()?;
        let c = config.channels;
        let mut rng = SplitMix64::new(config.seed);
        let p_from_m = DirectionWeights::generate(c, config.ffn_expansion, &mut rng);
        let m_from_p = DirectionWeights::generate(c, config.ffn_expansion, &mut rng);
        let fusion = Linear::random(2 * c, c, 1.0 / (c as f64).sqrt(), &mut rng);
        Ok(Self {
            p_from_m,
            m_from_p,
            fusion,
        })
    }

    pub fn zero_biases(&mut self) {
        for dir in [&mut self.p_from_m, &mut self.m_from_p] {
            for lin in dir.linears_mut() {
                lin.bias.fill(0.0);
            }
        }
        self.fusion.bias.fill(0.0);
    }

    pub fn zero_phi(&mut self) {
        self.p_from_m.phi.zero();
        self.m_from_p.phi.zero();
    }
}

/// Bin `[⌊i·n/m⌋, ⌈(i+1)·n/m⌉)` of an `n → m` adaptive pooling.
pub fn adaptive_bin(i: usize, n: usize, m: usize) -> (usize, usize) {
    (i * n / m, ((i + 1) * n).div_ceil(m))
}

/// 2D sinusoidal embedding for grid cell `(y, x)`: the first half of the
/// channels encodes the row, the second half the column.
pub fn positional_embedding(y: usize, x: usize, channels: usize) -> Vec<f64> {
    let half = channels / 2;
    let mut out = vec![0.0; channels];
    for (axis, pos) in [(0usize, y), (1, x)] {
        let dst = &mut out[axis * half..(axis + 1) * half];
        for i in 0..half / 2 {
            let freq = 10000f64.powf(-((2 * i) as f64) / half as f64);
            let angle = pos as f64 * freq;
            dst[2 * i] = angle.sin();
            dst[2 * i + 1] = angle.cos();
        }
    }
    out
}

/// Pools a block to `H_a·W_a` tokens of `C` channels, row-major over the pooled grid.
pub fn pool_tokens(block: &FeatureBlock, config: &PmiConfig) -> Matrix {
    let (c, h, w) = block.shape();
    let (ph, pw) = config.pooled;
    let mut tokens = Matrix::zeros(ph * pw, c);
    for i in 0..ph {
        let (y0, y1) = adaptive_bin(i, h, ph);
        for j in 0..pw {
            let (x0, x1) = adaptive_bin(j, w, pw);
            let count = ((y1 - y0) * (x1 - x0)) as f64;
            let pe = config
                .positional_embedding
                .then(|| positional_embedding(i, j, c));
            let row = tokens.row_mut(i * pw + j);
            for (ch, slot) in row.iter_mut().enumerate() {
                let mut sum = 0.0;
                let mut peak = f64::NEG_INFINITY;
                for y in y0..y1 {
                    for x in x0..x1 {
                        let v = block.get(ch, y, x);
                        sum += v;
                        peak = peak.max(v);
                    }
                }
                let mut v = config.w_pool * (sum / count) + (1.0 - config.w_pool) * peak;
                if let Some(pe) = &pe {
                    v += pe[ch];
                }
                *slot = v;
            }
        }
    }
    tokens
}

/// Result of one attention direction.
#[derive(Debug, Clone)]
pub struct Attended {
    pub output: Matrix,
    /// Per head, `queries × keys` softmax weights.
    pub attention: Vec<Matrix>,
}

/// Multi-head cross-attention, then residual + layer norm, then a ReLU FFN
/// with residual + layer norm.
pub fn cross_attend(
    queries_from: &Matrix,
    keys_values_from: &Matrix,
    weights: &DirectionWeights,
    config: &PmiConfig,
) -> Result<Matrix> {
    cross_attend_with_weights(queries_from, keys_values_from, weights, config).map(|a| a.output)
}

pub fn cross_attend_with_weights(
    queries_from: &Matrix,
    keys_values_from: &Matrix,
    weights: &DirectionWeights,
    config: &PmiConfig,
) -> Result<Attended> {
    config.validate()?;
    let c = config.channels;
    if queries_from.cols != c || keys_values_from.cols != c {
        return Err(Error::Dimension(format!(
            "token matrices need {c} columns, got {} and {}",
            queries_from.cols, keys_values_from.cols
        )));
    }
    let dk = config.head_dim();
    let scale = 1.0 / (dk as f64).sqrt();
    let q = weights.query.apply(queries_from);
    let k = weights.key.apply(keys_values_from);
    let v = weights.value.apply(keys_values_from);
    let nq = q.rows;
    let nk = k.rows;

    let mut concat = Matrix::zeros(nq, c);
    let mut attention = Vec::with_capacity(config.heads);
    for head in 0..config.heads {
        let lo = head * dk;
        let hi = lo + dk;
        let mut a = Matrix::zeros(nq, nk);
        for i in 0..nq {
            let qi = &q.row(i)[lo..hi];
            let scores = a.row_mut(i);
            for (j, s) in scores.iter_mut().enumerate() {
                let kj = &k.row(j)[lo..hi];
                *s = qi.iter().zip(kj).map(|(x, y)| x * y).sum::<f64>() * scale;
            }
            let peak = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - peak).exp();
                total += *s;
            }
            for s in scores.iter_mut() {
                *s /= total;
            }
            let out = &mut concat.row_mut(i)[lo..hi];
            for (j, &wt) in a.row(i).iter().enumerate() {
                for (o, vj) in out.iter_mut().zip(&v.row(j)[lo..hi]) {
                    *o += wt * vj;
                }
            }
        }
        attention.push(a);
    }

    let mut x1 = weights.output.apply(&concat);
    for r in 0..nq {
        let row = x1.row_mut(r);
        for (o, x) in row.iter_mut().zip(queries_from.row(r)) {
            *o += x;
        }
        weights.norm1.apply_row(row);
    }
    let mut hidden = weights.ffn_in.apply(&x1);
    for h in hidden.data.iter_mut() {
        *h = h.max(0.0);
    }
    let mut out = weights.ffn_out.apply(&hidden);
    for r in 0..nq {
        let row = out.row_mut(r);
        for (o, x) in row.iter_mut().zip(x1.row(r)) {
            *o += x;
        }
        weights.norm2.apply_row(row);
    }
    Ok(Attended {
        output: out,
        attention,
    })
}

/// Source index and blend weight for half-pixel-centre bilinear resampling.
fn bilinear_taps(dst: usize, n_in: usize, n_out: usize) -> (usize, usize, f64) {
    let src = ((dst as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).max(0.0);
    let i0 = (src.floor() as usize).min(n_in - 1);
    let i1 = (i0 + 1).min(n_in - 1);
    (i0, i1, src - i0 as f64)
}

/// Resamples a `ph·pw × C` token grid to a `C×H×W` block.
pub fn upsample_tokens(
    tokens: &Matrix,
    pooled: (usize, usize),
    height: usize,
    width: usize,
    mode: Upsample,
) -> Result<FeatureBlock> {
    let (ph, pw) = pooled;
    let c = tokens.cols;
    if tokens.rows != ph * pw {
        return Err(Error::Dimension(format!(
            "{} tokens cannot form a {ph}x{pw} grid",
            tokens.rows
        )));
    }
    let mut data = vec![0.0; c * height * width];
    for y in 0..height {
        for x in 0..width {
            match mode {
                Upsample::Nearest => {
                    let sy = (y * ph / height).min(ph - 1);
                    let sx = (x * pw / width).min(pw - 1);
                    let t = tokens.row(sy * pw + sx);
                    for ch in 0..c {
                        data[(ch * height + y) * width + x] = t[ch];
                    }
                }
                Upsample::Bilinear => {
                    let (y0, y1, ly) = bilinear_taps(y, ph, height);
                    let (x0, x1, lx) = bilinear_taps(x, pw, width);
                    let t00 = tokens.row(y0 * pw + x0);
                    let t01 = tokens.row(y0 * pw + x1);
                    let t10 = tokens.row(y1 * pw + x0);
                    let t11 = tokens.row(y1 * pw + x1);
                    for ch in 0..c {
                        let top = (1.0 - lx) * t00[ch] + lx * t01[ch];
                        let bottom = (1.0 - lx) * t10[ch] + lx * t11[ch];
                        data[(ch * height + y) * width + x] = (1.0 - ly) * top + ly * bottom;
                    }
                }
            }
        }
    }
    FeatureBlock::new(c, height, width, data)
}

#[derive(Debug, Clone)]
pub struct PmiOutput {
    pub appearance: FeatureBlock,
    pub motion: FeatureBlock,
    /// Concatenation of both outputs projected back to `C` channels.
    pub fused: FeatureBlock,
}

fn pixel_project(inputs: &[&FeatureBlock], proj: &Linear) -> Result<FeatureBlock> {
    let (_, h, w) = inputs[0].shape();
    let hw = h * w;
    let mut data = vec![0.0; proj.outputs * hw];
    let mut x = Vec::with_capacity(proj.inputs);
    let mut y = vec![0.0; proj.outputs];
    for p in 0..hw {
        x.clear();
        for b in inputs {
            x.extend((0..b.channels).map(|ch| b.data[ch * hw + p]));
        }
        proj.apply_row(&x, &mut y);
        for (o, v) in y.iter().enumerate() {
            data[o * hw + p] = *v;
        }
    }
    FeatureBlock::new(proj.outputs, h, w, data)
}

/// Full block: pool, attend both ways, project with `Φ` on the token grid,
/// upsample, add residually, then fuse.
pub fn pmi_forward(
    f_p: &FeatureBlock,
    f_m: &FeatureBlock,
    weights: &PmiWeights,
    config: &PmiConfig,
) -> Result<PmiOutput> {
    config.validate()?;
    if f_p.shape() != f_m.shape() {
        return Err(Error::Dimension(format!(
            "appearance {:?} and motion {:?} feature shapes differ",
            f_p.shape(),
            f_m.shape()
        )));
    }
    if f_p.channels != config.channels {
        return Err(Error::Dimension(format!(
            "features have {} channels, config expects {}",
            f_p.channels, config.channels
        )));
    }
    let (_, h, w) = f_p.shape();
    let tp = pool_tokens(f_p, config);
    let tm = pool_tokens(f_m, config);

    let residual = |base: &FeatureBlock, q: &Matrix, kv: &Matrix, dir: &DirectionWeights| {
        let attended = cross_attend(q, kv, dir, config)?;
        let projected = dir.phi.apply(&attended);
        let up = upsample_tokens(&projected, config.pooled, h, w, config.upsample)?;
        let data = base.data.iter().zip(&up.data).map(|(a, b)| a + b).collect();
        FeatureBlock::new(base.channels, h, w, data)
    };
    let appearance = residual(f_p, &tp, &tm, &weights.p_from_m)?;
    let motion = residual(f_m, &tm, &tp, &weights.m_from_p)?;
    let fused = pixel_project(&[&appearance, &motion], &weights.fusion)?;
    Ok(PmiOutput {
        appearance,
        motion,
        fused,
    })
}
