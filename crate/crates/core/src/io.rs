//! Frame loading, motion-map writing, manifests and paired samples.
//!
//! Supported inputs are binary (P5) and ASCII (P2) PGM, and PNG in 8/16-bit
//! grayscale or RGB(A). Colour is reduced to luminance with
//! `0.299 R + 0.587 G + 0.114 B`. Samples are divided by the format's full
//! scale (255, 65535, or the PGM maxval), giving values in `[0, 1]`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::grid::Grid;

const PNG_SIGNATURE: &[u8] = &[0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Rounds half away from zero and saturates to a byte.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn luminance(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Loads one frame as a grid in `[0, 1]`.
pub fn load_frame(path: &Path) -> Result<Grid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        decode_pgm(&bytes, path)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(&bytes, path)
    } else {
        Err(Error::format(path, "not a PGM (P2/P5) or PNG file"))
    }
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Grid> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::format(path, "image has a zero dimension"));
    }
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 255.0)
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 255.0)
            .collect(),
        DynamicImage::ImageRgb16(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 65535.0)
            .collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 65535.0)
            .collect(),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported PNG pixel layout {:?}", other.color()),
            ))
        }
    };
    Grid::from_vec(h, w, data).map_err(|e| Error::format(path, e.to_string()))
}

/// Splits a PGM header into its four fields and the offset just past it.
fn pgm_header(bytes: &[u8], path: &Path) -> Result<([u32; 3], bool, usize)> {
    let binary = bytes.starts_with(b"P5");
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::format(path, "truncated PGM header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "malformed PGM header"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(path, "malformed PGM header")),
    }
    Ok((fields, binary, pos))
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Grid> {
    let ([w, h, maxval], binary, start) = pgm_header(bytes, path)?;
    let (w, h) = (w as usize, h as usize);
    if w == 0 || h == 0 {
        return Err(Error::format(path, "image has a zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(path, format!("invalid maxval {maxval}")));
    }
    let n = w
        .checked_mul(h)
        .ok_or_else(|| Error::format(path, "image dimensions overflow"))?;
    let scale = maxval as f64;
    let samples: Vec<u32> = if binary {
        let raster = &bytes[start..];
        if maxval < 256 {
            if raster.len() < n {
                return Err(Error::format(path, "truncated PGM raster"));
            }
            raster[..n].iter().map(|&b| b as u32).collect()
        } else {
            if raster.len() < 2 * n {
                return Err(Error::format(path, "truncated PGM raster"));
            }
            raster[..2 * n]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        }
    } else {
        let text = std::str::from_utf8(&bytes[start..])
            .map_err(|_| Error::format(path, "P2 raster is not ASCII"))?;
        let values: Vec<u32> = text
            .lines()
            .flat_map(|l| l.split('#').next().unwrap_or("").split_ascii_whitespace())
            .take(n)
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(path, "malformed P2 sample"))?;
        if values.len() < n {
            return Err(Error::format(path, "truncated PGM raster"));
        }
        values
    };
    if let Some(v) = samples.iter().find(|&&v| v > maxval) {
        return Err(Error::format(path, format!("sample {v} exceeds maxval {maxval}")));
    }
    let data = samples.into_iter().map(|v| v as f64 / scale).collect();
    Grid::from_vec(h, w, data).map_err(|e| Error::format(path, e.to_string()))
}

/// Encodes 8-bit samples as a binary PGM.
pub fn encode_pgm(width: usize, height: usize, bytes: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(bytes);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ImageKind {
    Pgm,
    Png,
}

fn kind_for(path: &Path) -> Result<ImageKind> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("pgm") => Ok(ImageKind::Pgm),
        Some("png") => Ok(ImageKind::Png),
        _ => Err(Error::format(path, "output extension must be .pgm or .png")),
    }
}

/// Writes single-channel bytes as PGM or PNG depending on the extension.
pub fn write_gray8(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    match kind_for(path)? {
        ImageKind::Pgm => {
            std::fs::write(path, encode_pgm(width, height, bytes)).map_err(|e| Error::io(path, e))
        }
        ImageKind::Png => image::save_buffer(
            path,
            bytes,
            width as u32,
            height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::format(path, other.to_string()),
        }),
    }
}

/// Bytes of a `[0, 255]` map after half-away-from-zero rounding.
pub fn quantize_map(map: &Grid) -> Result<Vec<u8>> {
    if let Some(v) = map.data().iter().find(|v| !(0.0..=255.0).contains(*v)) {
        return Err(Error::Parameter(format!(
            "motion map value {v} lies outside [0, 255]"
        )));
    }
    Ok(map.data().iter().map(|&v| quantize_u8(v)).collect())
}

/// Writes a motion map in `[0, 255]` as 8-bit PGM (`.pgm`) or PNG (`.png`).
pub fn save_motion_map(map: &Grid, path: &Path) -> Result<()> {
    let bytes = quantize_map(map)?;
    write_gray8(path, map.width(), map.height(), &bytes)
}

/// Writes `grid` scaled so its maximum maps to 255; a non-positive maximum
/// yields a black image. Negative values clamp to zero.
pub fn save_normalized(grid: &Grid, path: &Path) -> Result<()> {
    let peak = grid.max();
    let bytes: Vec<u8> = if peak > 0.0 {
        grid.data().iter().map(|&v| quantize_u8(255.0 * (v / peak))).collect()
    } else {
        vec![0; grid.len()]
    };
    write_gray8(path, grid.width(), grid.height(), &bytes)
}

/// Plain-text dump: `height width` on the first line, then one row per line.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn grid_to_text(grid: &Grid) -> String {
    let mut out = format!("{} {}\n", grid.height(), grid.width());
    for r in 0..grid.height() {
        let row: Vec<String> = grid.row(r).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn grid_from_text(text: &str) -> Result<Grid> {
    let mut lines = text.lines();
    let bad = |line: usize, detail: &str| Error::Parse {
        line,
        detail: detail.to_string(),
    };
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(1, "header must be `height width`"))?;
    let [h, w] = dims[..] else {
        return Err(bad(1, "header must be `height width`"));
    };
    let mut data = Vec::with_capacity(h.saturating_mul(w));
    for (i, line) in lines.enumerate().take(h) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(i + 2, "malformed value"))?;
        if row.len() != w {
            return Err(bad(i + 2, "wrong number of values"));
        }
        data.extend(row);
    }
    Grid::from_vec(h, w, data)
}

/// Output file name for a frame: `x.pgm` becomes `x_motion.pgm`.
pub fn motion_file_name(frame: &Path) -> PathBuf {
    let stem = frame
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = frame
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pgm".into());
    let name = format!("{stem}_motion.{ext}");
    match frame.parent() {
        Some(parent) => parent.join(name),
        None => PathBuf::from(name),
    }
}

/// Ordered frame list of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub sequence_id: String,
    /// Paths as written in the manifest, in temporal order.
    pub entries: Vec<PathBuf>,
    /// Directory that relative entries are resolved against.
    pub base_dir: PathBuf,
}

impl SequenceManifest {
    /// Parses manifest text: one path per line, `#` comments and blank lines
    /// ignored, order preserved.
    pub fn parse(text: &str, sequence_id: &str, base_dir: &Path, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let entry = PathBuf::from(line);
            if !seen.insert(base_dir.join(&entry)) {
                return Err(Error::format(origin, format!("duplicate frame `{line}`")));
            }
            entries.push(entry);
        }
        if entries.is_empty() {
            return Err(Error::format(origin, "manifest lists no frames"));
        }
        Ok(Self {
            sequence_id: sequence_id.to_string(),
            entries,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frame paths resolved against the manifest directory.
    pub fn frame_paths(&self) -> Vec<PathBuf> {
        self.entries.iter().map(|e| self.base_dir.join(e)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.to_string_lossy());
            out.push('\n');
        }
        out
    }
}

/// Reads a manifest; the sequence id is the manifest's file stem.
pub fn load_manifest(path: &Path) -> Result<SequenceManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    SequenceManifest::parse(&text, &id, base, path)
}

/// Appearance frame and motion map, both as interleaved 3-channel bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    height: usize,
    width: usize,
    appearance: Vec<u8>,
    motion: Vec<u8>,
}

fn replicate3(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| [b, b, b]).collect()
}

impl PairedSample {
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Interleaved RGB bytes of the appearance frame.
    pub fn appearance(&self) -> &[u8] {
        &self.appearance
    }

    /// Interleaved RGB bytes of the motion map.
    pub fn motion(&self) -> &[u8] {
        &self.motion
    }

    /// One channel (0, 1 or 2) of the motion image.
    pub fn motion_channel(&self, channel: usize) -> Vec<u8> {
        self.motion.iter().skip(channel).step_by(3).copied().collect()
    }

    pub fn appearance_channel(&self, channel: usize) -> Vec<u8> {
        self.appearance.iter().skip(channel).step_by(3).copied().collect()
    }
}

/// Pairs a `[0, 1]` frame with its `[0, 255]` motion map as 3-channel bytes.
pub fn make_paired(appearance: &Grid, motion: &Grid) -> Result<PairedSample> {
    appearance.ensure_same_shape(motion, "appearance vs motion")?;
    let app: Vec<u8> = appearance
        .data()
        .iter()
        .map(|&v| quantize_u8(255.0 * v.clamp(0.0, 1.0)))
        .collect();
    let mot = quantize_map(motion)?;
    Ok(PairedSample {
        height: appearance.height(),
        width: appearance.width(),
        appearance: replicate3(&app),
        motion: replicate3(&mot),
    })
}
