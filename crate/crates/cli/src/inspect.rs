use std::path::PathBuf;

use retina_core::{io, RcaEngine};

use crate::output::Staged;
use crate::precompute::write_trace;
use crate::{resolve_params, CmdResult, Failure};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Sequence manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// 1-based frame to dump; earlier frames are run to build up state.
    #[arg(long)]
    frame: usize,
    /// Output directory for `<layer>.pgm` previews and `<layer>.txt` values.
    #[arg(long)]
    out: PathBuf,
    /// Parameter file (`key=value` lines).
    #[arg(long, env = "RETINA_PARAMS")]
    params: Option<PathBuf>,
}

pub fn run(args: Args) -> CmdResult {
    let params = resolve_params(args.params.as_deref())?;
    let manifest = io::load_manifest(&args.manifest)?;
    if args.frame == 0 || args.frame > manifest.len() {
        return Err(Failure::user(
            "parameter",
            format!(
                "{}: --frame {} is outside 1..={}",
                args.manifest.display(),
                args.frame,
                manifest.len()
            ),
        ));
    }
    let mut engine = RcaEngine::new(params)?;
    let mut trace = None;
    for (i, path) in manifest.frame_paths().iter().take(args.frame).enumerate() {
        let frame = io::load_frame(path)?;
        engine.set_trace(i + 1 == args.frame);
        trace = engine.step(&frame)?.trace;
    }
    let trace = trace.ok_or_else(|| Failure::Internal("trace missing for the requested frame".into()))?;
    let out = Staged::new(&args.out)?;
    write_trace(out.path(), &trace)?;
    out.publish()
}
