use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use retina_core::io::{self, SequenceManifest};
use retina_core::{LayerTrace, RcaEngine, RcaParams};

use crate::output::{create_dir, write, Staged};
use crate::{resolve_params, CmdResult, Failure};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Sequence manifest (one frame path per line); repeat for several sequences.
    #[arg(long = "manifest", required = true)]
    manifests: Vec<PathBuf>,
    /// Output directory; must not exist or be empty.
    #[arg(long)]
    out: PathBuf,
    /// Parameter file (`key=value` lines).
    #[arg(long, env = "RETINA_PARAMS")]
    params: Option<PathBuf>,
    /// Also dump every layer of one frame into this directory.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// 1-based frame whose layers are dumped with --trace.
    #[arg(long, default_value_t = 1)]
    trace_frame: usize,
    /// Sequences processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Output path of a frame relative to the sequence directory: the manifest
/// entry with `_motion` appended to its stem. Entries that would escape the
/// directory keep only their file name.
fn mirrored(entry: &Path) -> PathBuf {
    let contained = entry
        .components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
    let rel = if contained {
        entry.to_path_buf()
    } else {
        PathBuf::from(entry.file_name().unwrap_or(entry.as_os_str()))
    };
    io::motion_file_name(&rel)
}

pub fn write_trace(dir: &Path, trace: &LayerTrace) -> CmdResult {
    create_dir(dir)?;
    for (name, grid) in trace.layers() {
        io::save_normalized(grid, &dir.join(format!("{name}.pgm")))?;
        write(&dir.join(format!("{name}.txt")), io::grid_to_text(grid))?;
    }
    Ok(())
}

fn process(
    manifest: &SequenceManifest,
    params: &RcaParams,
    seq_dir: &Path,
    trace: Option<(&Path, usize)>,
) -> CmdResult {
    let mut engine = RcaEngine::new(params.clone())?;
    create_dir(seq_dir)?;
    for (i, (entry, path)) in manifest
        .entries
        .iter()
        .zip(manifest.frame_paths())
        .enumerate()
    {
        let frame = io::load_frame(&path)?;
        let traced = trace.is_some_and(|(_, k)| k == i + 1);
        engine.set_trace(traced);
        let out = engine.step(&frame)?;
        let dest = seq_dir.join(mirrored(entry));
        if let Some(parent) = dest.parent() {
            create_dir(parent)?;
        }
        io::save_motion_map(&out.motion, &dest)?;
        if let (Some(t), Some((dir, _))) = (out.trace, trace) {
            write_trace(dir, &t)?;
        }
    }
    Ok(())
}

pub fn run(args: Args) -> CmdResult {
    if args.jobs == 0 {
        return Err(Failure::user("parameter", "--jobs must be at least 1"));
    }
    if args.trace_frame == 0 {
        return Err(Failure::user("parameter", "--trace-frame is 1-based"));
    }
    let params = resolve_params(args.params.as_deref())?;
    let manifests = args
        .manifests
        .iter()
        .map(|p| io::load_manifest(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ids = std::collections::HashSet::new();
    for (m, path) in manifests.iter().zip(&args.manifests) {
        if !ids.insert(m.sequence_id.as_str()) {
            return Err(Failure::user(
                "format",
                format!("{}: sequence id `{}` appears twice", path.display(), m.sequence_id),
            ));
        }
        if args.trace.is_some() && args.trace_frame > m.len() {
            return Err(Failure::user(
                "parameter",
                format!(
                    "{}: --trace-frame {} exceeds the {} frames listed",
                    path.display(),
                    args.trace_frame,
                    m.len()
                ),
            ));
        }
    }

    let out = Staged::new(&args.out)?;
    let trace = args.trace.as_deref().map(Staged::new).transpose()?;
    let single = manifests.len() == 1;
    let seq_dir = |m: &SequenceManifest| {
        if single {
            out.path().to_path_buf()
        } else {
            out.path().join(&m.sequence_id)
        }
    };
    let trace_dir = |m: &SequenceManifest| {
        trace.as_ref().map(|t| {
            if single {
                t.path().to_path_buf()
            } else {
                t.path().join(&m.sequence_id)
            }
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    let results: Vec<CmdResult> = pool.install(|| {
        manifests
            .par_iter()
            .map(|m| {
                let td = trace_dir(m);
                process(
                    m,
                    &params,
                    &seq_dir(m),
                    td.as_deref().map(|d| (d, args.trace_frame)),
                )
            })
            .collect()
    });
    results.into_iter().collect::<Result<Vec<()>, _>>()?;

    params.save(&out.path().join("params.txt"))?;
    out.publish()?;
    if let Some(t) = trace {
        t.publish()?;
    }
    Ok(())
}
