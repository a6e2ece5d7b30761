//! The `eval` subcommand: score prediction files against ground truth and
//! report aggregate statistics.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rimfit_core::config::Config;
use rimfit_core::eval::{
    aggregate, eval_method_a, eval_method_b, load_ground_truth, load_predictions, EvalReport,
    GroundTruth, Method,
};

use crate::{CliError, EvalArgs, MethodArg};

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let config = crate::resolve_config(args.config.as_deref())?;
    let gt = load_ground_truth(&args.gt).map_err(CliError::Eval)?;
    let preds = collect_predictions(&args.preds_dir)?;

    let methods: &[Method] = match args.method {
        MethodArg::A => &[Method::A],
        MethodArg::B => &[Method::B],
        MethodArg::Both => &[Method::A, Method::B],
    };

    for &method in methods {
        let report = score(method, &gt, &preds, &config);
        print!("{report}");
        let name = match method {
            Method::A => "report_a.json",
            Method::B => "report_b.json",
        };
        let path = args.preds_dir.join(name);
        let json = serde_json::to_string_pretty(&report).expect("reports serialize");
        fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

/// Reads every `*.pred.json` in the directory, in name order.
fn collect_predictions(dir: &Path) -> Result<Vec<GroundTruth>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let p = entry.path();
        let named_pred =
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".pred.json"));
        if named_pred {
            files.push(p);
        }
    }
    files.sort();
    let mut entries = Vec::new();
    for f in &files {
        entries.extend(load_predictions(f).map_err(CliError::Eval)?);
    }
    Ok(entries)
}

/// Chamfer values per predicted image, folded into one report. Images
/// without a prediction entry contribute nothing; a predicted image
/// missing from the ground truth scores against an empty annotation.
fn score(method: Method, gt: &[GroundTruth], preds: &[GroundTruth], config: &Config) -> EvalReport {
    let mut values = BTreeMap::new();
    for entry in preds {
        let fallback = GroundTruth { image_id: entry.image_id.clone(), ellipses: Vec::new() };
        let gt_entry = gt.iter().find(|g| g.image_id == entry.image_id).unwrap_or(&fallback);
        let vals = match method {
            Method::A => eval_method_a(
                gt_entry,
                &entry.ellipses,
                config.n_samples,
                config.chamfer_normalized,
            ),
            Method::B => eval_method_b(
                gt_entry,
                &entry.ellipses,
                config.n_samples,
                config.chamfer_normalized,
            ),
        };
        values.insert(entry.image_id.clone(), vals);
    }
    aggregate(method, &values)
}
