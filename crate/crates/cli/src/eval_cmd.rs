use std::path::PathBuf;

use retina_core::eval::{self, EvalConfig, Interpolation};

use crate::output::write;
use crate::{CmdResult, Failure};

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Interp {
    /// 101 recall points.
    #[value(name = "101")]
    Points101,
    /// Area under the full envelope.
    All,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Predictions: `frame_id x_min y_min x_max y_max score` per line.
    #[arg(long)]
    pred: PathBuf,
    /// Ground truth: `frame_id x_min y_min x_max y_max` per line.
    #[arg(long)]
    gt: PathBuf,
    /// IoU needed for a detection to match a ground-truth box.
    #[arg(long, default_value_t = eval::DEFAULT_MATCH_IOU)]
    iou: f64,
    /// IoU above which NMS suppresses the lower-scored box.
    #[arg(long, default_value_t = eval::DEFAULT_NMS_IOU)]
    nms: f64,
    /// Skip NMS entirely.
    #[arg(long)]
    no_nms: bool,
    /// Detections must score strictly above this.
    #[arg(long, default_value_t = eval::DEFAULT_CONF_FLOOR)]
    conf: f64,
    /// AP interpolation.
    #[arg(long, value_enum, default_value_t = Interp::Points101)]
    interpolation: Interp,
    /// Write the precision-recall curve as CSV.
    #[arg(long)]
    pr_out: Option<PathBuf>,
}

pub fn run(args: Args) -> CmdResult {
    for (flag, v) in [("--iou", args.iou), ("--nms", args.nms)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Failure::user("parameter", format!("{flag} {v} outside [0, 1]")));
        }
    }
    if !(0.0..=1.0).contains(&args.conf) {
        return Err(Failure::user("parameter", format!("--conf {} outside [0, 1]", args.conf)));
    }
    let dets = eval::read_detections(&args.pred).map_err(|e| Failure::in_file(&args.pred, e))?;
    let gts = eval::read_ground_truth(&args.gt).map_err(|e| Failure::in_file(&args.gt, e))?;
    let config = EvalConfig {
        match_iou: args.iou,
        nms_iou: (!args.no_nms).then_some(args.nms),
        conf_floor: args.conf,
        interpolation: match args.interpolation {
            Interp::Points101 => Interpolation::Points101,
            Interp::All => Interpolation::AllPoints,
        },
    };
    let result = eval::evaluate(&dets, &gts, &config).map_err(|e| match e {
        retina_core::Error::Evaluation(d) => {
            Failure::user("evaluation", format!("{}: {d}", args.gt.display()))
        }
        other => other.into(),
    })?;
    print!("{}", result.summary.to_key_value());
    if let Some(path) = &args.pr_out {
        write(path, eval::export_pr_curve(&result.sweep))?;
    }
    Ok(())
}
