//! The `synth` subcommand: render a scene-set file into rasters with
//! ground-truth and detection sidecars.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rimfit_core::detections::detections_to_json;
use rimfit_core::eval::GroundTruth;
use rimfit_core::synth::{generate_scene, load_scene_specs, SceneSpec};

use crate::{CliError, SynthArgs};

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    let specs = load_scene_specs(&args.spec).map_err(CliError::Synth)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;

    let results: Vec<Result<Option<GroundTruth>, CliError>> = crate::with_pool(args.jobs, || {
        specs
            .par_iter()
            .enumerate()
            .map(|(index, spec)| write_scene(index, spec, &args.out_dir))
            .collect()
    })?;

    let mut combined = Vec::new();
    for r in results {
        if let Some(entry) = r? {
            combined.push(entry);
        }
    }
    let gt_path = args.out_dir.join("gt.json");
    let json = serde_json::to_string_pretty(&combined).expect("ground truth serializes");
    fs::write(&gt_path, json + "\n").map_err(|e| CliError::io(&gt_path, e))?;

    println!("{} scene(s) written to {}", specs.len(), args.out_dir.display());
    Ok(())
}

/// Renders one scene into `<id>.png`, `<id>.det.json` and `<id>.gt.json`;
/// returns the ground truth when the scene has rims, for the combined
/// annotation file.
fn write_scene(
    index: usize,
    spec: &SceneSpec,
    out_dir: &Path,
) -> Result<Option<GroundTruth>, CliError> {
    let id = format!("scene_{index:03}");
    let (raster, gt, dets) = generate_scene(spec, &id).map_err(CliError::Synth)?;

    let png_path = out_dir.join(format!("{id}.png"));
    raster
        .save(&png_path)
        .map_err(|e| CliError::Image { path: png_path.clone(), source: e })?;

    let det_path = out_dir.join(format!("{id}.det.json"));
    fs::write(&det_path, detections_to_json(&dets) + "\n")
        .map_err(|e| CliError::io(&det_path, e))?;

    let entries: &[GroundTruth] =
        if gt.ellipses.is_empty() { &[] } else { std::slice::from_ref(&gt) };
    let json = serde_json::to_string_pretty(entries).expect("ground truth serializes");
    let gt_path = out_dir.join(format!("{id}.gt.json"));
    fs::write(&gt_path, json + "\n").map_err(|e| CliError::io(&gt_path, e))?;

    Ok((!gt.ellipses.is_empty()).then_some(gt))
}
