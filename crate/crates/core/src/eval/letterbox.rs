use super::boxes::BBox;

/// Square canvas side used at inference.
pub const INFERENCE_SIZE: usize = 512;

/// Aspect-preserving resize onto a square canvas with centred zero padding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Letterbox {
    pub scale: f64,
    pub pad_x: f64,
    pub pad_y: f64,
    pub canvas: usize,
}

impl Letterbox {
    /// Geometry for a `width`×`height` source on a `canvas`×`canvas` target.
    pub fn fit(width: usize, height: usize, canvas: usize) -> Self {
        let scale = (canvas as f64 / width as f64).min(canvas as f64 / height as f64);
        let new_w = (width as f64 * scale).round();
        let new_h = (height as f64 * scale).round();
        Self {
            scale,
            pad_x: (canvas as f64 - new_w) / 2.0,
            pad_y: (canvas as f64 - new_h) / 2.0,
            canvas,
        }
    }

    pub fn to_canvas(&self, b: &BBox) -> BBox {
        BBox {
            x_min: b.x_min * self.scale + self.pad_x,
            y_min: b.y_min * self.scale + self.pad_y,
            x_max: b.x_max * self.scale + self.pad_x,
            y_max: b.y_max * self.scale + self.pad_y,
        }
    }

    /// Maps a canvas box back to source pixel coordinates.
    pub fn to_source(&self, b: &BBox) -> BBox {
        BBox {
            x_min: (b.x_min - self.pad_x) / self.scale,
            y_min: (b.y_min - self.pad_y) / self.scale,
            x_max: (b.x_max - self.pad_x) / self.scale,
            y_max: (b.y_max - self.pad_y) / self.scale,
        }
    }
}
