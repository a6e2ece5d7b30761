//! The `fit` subcommand: run the pipeline over images and write one
//! prediction file per image.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rimfit_core::config::Config;
use rimfit_core::detections::load_detections;
use rimfit_core::eval::{load_ground_truth, GroundTruth};
use rimfit_core::pipeline::run_pipeline;
use rimfit_core::Ellipse;

use crate::{overlay, CliError, FitArgs};

pub fn run(args: &FitArgs) -> Result<(), CliError> {
    let config = crate::resolve_config(args.config.as_deref())?;
    let images = collect_images(&args.images)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;

    let gt = match &args.gt {
        Some(path) => load_ground_truth(path).map_err(CliError::Eval)?,
        None => Vec::new(),
    };

    let results: Vec<Result<bool, CliError>> = crate::with_pool(args.jobs, || {
        images.par_iter().map(|path| fit_one(path, args, &config, &gt)).collect()
    })?;

    let mut written = 0usize;
    for r in results {
        if r? {
            written += 1;
        }
    }
    println!("{written} of {} images fitted into {}", images.len(), args.out_dir.display());
    Ok(())
}

/// A single PNG path stays as given; a directory yields its `*.png`
/// entries in name order.
fn collect_images(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| CliError::io(path, e))? {
        let entry = entry.map_err(|e| CliError::io(path, e))?;
        let p = entry.path();
        if p.extension().is_some_and(|ext| ext == "png") && !is_overlay(&p) {
            found.push(p);
        }
    }
    found.sort();
    Ok(found)
}

fn is_overlay(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".overlay.png"))
}

fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Processes one image; `Ok(false)` means it was skipped with a warning.
fn fit_one(
    path: &Path,
    args: &FitArgs,
    config: &Config,
    gt: &[GroundTruth],
) -> Result<bool, CliError> {
    let id = image_id(path);
    let skip = |msg: String| {
        if args.strict {
            Err(CliError::Strict(msg))
        } else {
            log::warn!("{msg}; skipping");
            Ok(false)
        }
    };

    let rgb = match image::open(path) {
        Ok(img) => img.to_rgb8(),
        Err(e) => return skip(format!("cannot read image {}: {e}", path.display())),
    };

    let detections = if args.no_detections {
        None
    } else {
        let dir = match &args.detections_dir {
            Some(d) => d.clone(),
            None => path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        };
        let det_path = dir.join(format!("{id}.det.json"));
        match load_detections(&det_path, config.detector_floor) {
            Ok(scene) => Some(scene),
            Err(e) => {
                return skip(format!("no usable detections at {}: {e}", det_path.display()))
            }
        }
    };

    let candidates = match run_pipeline(&rgb, detections.as_ref(), config) {
        Ok(c) => c,
        Err(e) => return skip(format!("pipeline failed on {}: {e}", path.display())),
    };
    let ellipses: Vec<Ellipse> = candidates.iter().map(|c| c.ellipse).collect();
    log::info!("{id}: {} rim(s)", ellipses.len());

    let entry = GroundTruth { image_id: id.clone(), ellipses };
    let json = serde_json::to_string_pretty(std::slice::from_ref(&entry))
        .expect("prediction entries serialize");
    let pred_path = args.out_dir.join(format!("{id}.pred.json"));
    fs::write(&pred_path, json + "\n").map_err(|e| CliError::io(&pred_path, e))?;

    if args.overlay {
        let gt_ellipses = gt
            .iter()
            .find(|g| g.image_id == id)
            .map(|g| g.ellipses.as_slice())
            .unwrap_or(&[]);
        let canvas = overlay::draw(&rgb, &entry.ellipses, gt_ellipses);
        let overlay_path = args.out_dir.join(format!("{id}.overlay.png"));
        canvas
            .save(&overlay_path)
            .map_err(|e| CliError::Image { path: overlay_path.clone(), source: e })?;
    }
    Ok(true)
}
