use std::path::Path;

use super::boxes::BBox;
use super::matching::{Detection, GtBox};
use crate::error::{Error, Result};

/// One parsed line: `frame_id x_min y_min x_max y_max [score]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub frame_id: String,
    pub bbox: BBox,
    pub score: Option<f64>,
}

fn parse_records(text: &str) -> Result<Vec<(usize, Record)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |detail: String| Error::Parse {
            line: line_no,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(err(format!(
                "expected `frame_id x_min y_min x_max y_max [score]`, got {} fields",
                fields.len()
            )));
        }
        let nums: Vec<f64> = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err("non-numeric coordinate or score".into()))?;
        let bbox = BBox::new(nums[0], nums[1], nums[2], nums[3]).map_err(|e| err(e.to_string()))?;
        let score = nums.get(4).copied();
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(err(format!("score {s} outside [0, 1]")));
            }
        }
        out.push((
            line_no,
            Record {
                frame_id: fields[0].to_string(),
                bbox,
                score,
            },
        ));
    }
    Ok(out)
}

/// Ground-truth lines must not carry a score.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GtBox>> {
    parse_records(text)?
        .into_iter()
        .map(|(line, r)| match r.score {
            None => Ok(GtBox::new(&r.frame_id, r.bbox)),
            Some(_) => Err(Error::Parse {
                line,
                detail: "ground-truth records take no score".into(),
            }),
        })
        .collect()
}

/// Prediction lines must carry a score.
pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    parse_records(text)?
        .into_iter()
        .map(|(line, r)| match r.score {
            Some(s) => Detection::new(&r.frame_id, r.bbox, s),
            None => Err(Error::Parse {
                line,
                detail: "prediction records need a score".into(),
            }),
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GtBox>> {
    parse_ground_truth(&read(path)?)
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    parse_detections(&read(path)?)
}
