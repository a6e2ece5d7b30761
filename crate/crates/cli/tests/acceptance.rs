//! Whole-system acceptance checks, one test per numbered criterion. Each
//! test line is the pass/fail verdict for its criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rimfit_core::config::{load_config, parse_config, Config};
use rimfit_core::contour::{filter_rim, filter_straight, Contour, HyperParams, RimContext};
use rimfit_core::detections::{BoundingBox, Label};
use rimfit_core::eval::{
    aggregate, chamfer, eval_method_a, eval_method_b, GroundTruth, Method,
};
use rimfit_core::filtering::{filter_by_food_distance, filter_by_plate_box, CandidateEllipse};
use rimfit_core::geometry::fit_ellipse_dls;
use rimfit_core::pipeline::run_pipeline;
use rimfit_core::synth::{generate_scene, EllipseSpec, SceneSpec};
use rimfit_core::{Ellipse, Point};

#[test]
fn criterion_1_fit_recovers_noise_free_ellipses() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    for round in 0..200 {
        let a = rng.gen_range(20.0..=200.0);
        let b = a * rng.gen_range(0.3..=1.0);
        let theta = rng.gen_range(0.0..PI);
        let cx = rng.gen_range(-400.0..400.0);
        let cy = rng.gen_range(-400.0..400.0);
        let truth = Ellipse::new(cx, cy, a, b, theta).expect("random ellipse is valid");
        let fit = fit_ellipse_dls(&truth.sample_points(12)).expect("12 exact samples fit");
        assert!(
            (fit.cx - truth.cx).abs() < 1e-6 && (fit.cy - truth.cy).abs() < 1e-6,
            "round {round}: center ({}, {}) vs ({}, {})",
            fit.cx,
            fit.cy,
            truth.cx,
            truth.cy
        );
        assert!(
            (fit.a - truth.a).abs() / truth.a < 1e-6 && (fit.b - truth.b).abs() / truth.b < 1e-6,
            "round {round}: axes ({}, {}) vs ({}, {})",
            fit.a,
            fit.b,
            truth.a,
            truth.b
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "200 fits took {elapsed:?}");
}

/// Brute force through a full distance matrix, mirroring the production
/// arithmetic step for step so the values must agree exactly.
fn chamfer_oracle(a: &[Point], b: &[Point], normalized: bool) -> f64 {
    let d2: Vec<Vec<f64>> =
        a.iter().map(|p| b.iter().map(|q| p.distance_sq(*q)).collect()).collect();
    let forward: f64 =
        d2.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min).sqrt()).sum();
    let backward: f64 = (0..b.len())
        .map(|j| d2.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min).sqrt())
        .sum();
    if normalized {
        0.5 * (forward / a.len() as f64 + backward / b.len() as f64)
    } else {
        0.5 * (forward + backward)
    }
}

#[test]
fn criterion_2_chamfer_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let start = Instant::now();
    for round in 0..100 {
        let na = rng.gen_range(1..=500);
        let nb = rng.gen_range(1..=500);
        let cloud = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Point> {
            (0..n)
                .map(|_| Point::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)))
                .collect()
        };
        let a = cloud(&mut rng, na);
        let b = cloud(&mut rng, nb);
        for normalized in [false, true] {
            let got = chamfer(&a, &b, normalized).expect("non-empty sets");
            let want = chamfer_oracle(&a, &b, normalized);
            assert!(
                got == want,
                "round {round} normalized={normalized}: {got} vs oracle {want}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "100 pairs took {elapsed:?}");
}

/// A short hook whose lowest point sits `d` below the rim band's top.
fn band_contour(band_top: f64, d: f64) -> Contour {
    let y = band_top + d;
    Contour {
        points: vec![
            Point::new(40.0, y - 6.0),
            Point::new(44.0, y),
            Point::new(48.0, y - 6.0),
        ],
    }
}

#[test]
fn criterion_3_rim_filter_matches_the_hand_trace() {
    let hp = HyperParams::set_a();
    let food = BoundingBox::new(Label::Food, 20.0, 40.0, 80.0, 100.0, 0.9).unwrap();
    let plate = BoundingBox::new(Label::Plate, 0.0, 0.0, 100.0, 200.0, 0.9).unwrap();
    let ctx = RimContext::new(food, plate);
    let build = |ds: &[f64]| -> Vec<Contour> {
        ds.iter().map(|d| band_contour(food.y_max, *d)).collect()
    };

    let c = build(&[10.0, 12.0, 40.0]);
    let kept = filter_rim(&c, &ctx, &hp).unwrap();
    assert_eq!(kept, vec![c[0].clone(), c[1].clone()], "expected only d = 40 removed");

    let c = build(&[10.0, 40.0]);
    let kept = filter_rim(&c, &ctx, &hp).unwrap();
    assert_eq!(kept, vec![c[0].clone()], "expected d = 40 removed");

    let c = build(&[10.0, 12.0]);
    let kept = filter_rim(&c, &ctx, &hp).unwrap();
    assert_eq!(kept, c, "expected nothing removed");
}

/// Deterministic corpus scene: scenes alternate between bowls (lower wall
/// band visible) and plain dishes, with one or two rims and a handful of
/// clutter polylines.
fn corpus_scene(i: usize) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(4000 + i as u64);
    let second_rim = i % 2 == 0;
    let two_dishes = i % 5 < 2;
    let dish = |rng: &mut ChaCha8Rng, cx: f64, cy: f64, a: f64, b: f64, theta: f64| {
        let (stroke, fill) = if second_rim {
            (0.95, 0.55)
        } else {
            let v = [0.65, 0.75, 0.85][rng.gen_range(0..3)];
            (v, v)
        };
        EllipseSpec {
            ellipse: Ellipse::new(cx, cy, a, b, theta).expect("corpus ellipse is valid"),
            stroke,
            fill,
        }
    };

    let mut ellipses = Vec::new();
    if two_dishes {
        for cy_base in [112.0, 300.0] {
            let a = rng.gen_range(75.0..100.0);
            let b = rng.gen_range(55.0..66.0);
            let cx = rng.gen_range(a + 8.0..412.0 - a);
            let cy = cy_base + rng.gen_range(0.0..8.0);
            ellipses.push(dish(&mut rng, cx, cy, a, b, 0.0));
        }
    } else {
        let a = rng.gen_range(80.0..130.0);
        let b = a * rng.gen_range(0.72..0.95);
        let cx = rng.gen_range(160.0..260.0);
        let cy = rng.gen_range(195.0..225.0);
        let theta = rng.gen_range(0.0..PI);
        ellipses.push(dish(&mut rng, cx, cy, a, b, theta));
    }

    SceneSpec {
        width: 420,
        height: 420,
        ellipses,
        clutter: rng.gen_range(3..=6),
        second_rim,
        seed: 5000 + i as u64,
    }
}

#[test]
fn criterion_4_synthetic_scenes_round_trip() {
    let config = Config::default();
    let start = Instant::now();
    let (mut gt_total, mut gt_hit) = (0usize, 0usize);
    let mut stray: Vec<(String, f64)> = Vec::new();

    for i in 0..50 {
        let id = format!("scene_{i:03}");
        let (raster, gt, dets) = generate_scene(&corpus_scene(i), &id).expect("scene renders");
        let cands = run_pipeline(&raster, Some(&dets), &config).expect("pipeline runs");
        let preds: Vec<Ellipse> = cands.iter().map(|c| c.ellipse).collect();

        let va = eval_method_a(&gt, &preds, config.n_samples, true);
        let vb = eval_method_b(&gt, &preds, config.n_samples, true);
        gt_total += gt.ellipses.len();
        gt_hit += va.iter().filter(|v| **v < 5.0).count();
        stray.extend(vb.iter().filter(|v| **v >= 8.0).map(|v| (id.clone(), *v)));
    }

    let elapsed = start.elapsed();
    assert!(stray.is_empty(), "predictions beyond 8 px: {stray:?}");
    assert!(
        gt_hit * 5 >= gt_total * 4,
        "recovered {gt_hit} of {gt_total} rims under 5 px"
    );
    assert!(elapsed < Duration::from_secs(60), "50 scenes took {elapsed:?}");
}

#[test]
fn criterion_5_clutter_only_scenes_stay_empty() {
    let config = Config::default();
    let mut silent = 0usize;
    for i in 0..30u64 {
        let spec = SceneSpec {
            width: 360,
            height: 360,
            ellipses: Vec::new(),
            clutter: 3 + (i as usize % 4),
            second_rim: false,
            seed: 700 + i,
        };
        let (raster, gt, dets) =
            generate_scene(&spec, &format!("clutter_{i:02}")).expect("scene renders");
        assert!(gt.ellipses.is_empty());
        let cands = run_pipeline(&raster, Some(&dets), &config).expect("pipeline runs");
        if cands.is_empty() {
            silent += 1;
        }
    }
    assert!(silent >= 27, "only {silent} of 30 clutter scenes stayed empty");
}

fn is_submultiset<T: PartialEq>(sub: &[T], sup: &[T]) -> bool {
    sub.iter().all(|x| {
        let need = sub.iter().filter(|y| *y == x).count();
        let have = sup.iter().filter(|y| *y == x).count();
        need <= have
    })
}

fn random_contour(rng: &mut ChaCha8Rng) -> Contour {
    let n = rng.gen_range(3..120);
    let points = match rng.gen_range(0..3) {
        0 => {
            let e = Ellipse::new(
                rng.gen_range(50.0..350.0),
                rng.gen_range(50.0..350.0),
                rng.gen_range(30.0..120.0),
                rng.gen_range(20.0..30.0),
                rng.gen_range(0.0..PI),
            )
            .unwrap();
            let t0 = rng.gen_range(0.0..2.0 * PI);
            let span = rng.gen_range(0.5..2.5);
            (0..n).map(|k| e.point_at(t0 + span * k as f64 / n as f64)).collect()
        }
        1 => {
            let (x0, y0) = (rng.gen_range(0.0..400.0), rng.gen_range(0.0..400.0));
            let (dx, dy) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            (0..n).map(|k| Point::new(x0 + dx * k as f64, y0 + dy * k as f64)).collect()
        }
        _ => {
            let mut p = Point::new(rng.gen_range(0.0..400.0), rng.gen_range(0.0..400.0));
            (0..n)
                .map(|_| {
                    p = Point::new(p.x + rng.gen_range(-2.0..2.0), p.y + rng.gen_range(-2.0..2.0));
                    p
                })
                .collect()
        }
    };
    Contour { points }
}

fn random_candidates(rng: &mut ChaCha8Rng) -> Vec<CandidateEllipse> {
    (0..rng.gen_range(0..8))
        .map(|_| {
            let a = rng.gen_range(20.0..150.0);
            CandidateEllipse {
                ellipse: Ellipse::new(
                    rng.gen_range(0.0..400.0),
                    rng.gen_range(0.0..400.0),
                    a,
                    a * rng.gen_range(0.3..1.0),
                    rng.gen_range(0.0..PI),
                )
                .unwrap(),
                source_contour_size: rng.gen_range(10..300),
                score: rng.gen_range(0.0..200.0),
            }
        })
        .collect()
}

fn random_box(rng: &mut ChaCha8Rng, label: Label) -> BoundingBox {
    let x0 = rng.gen_range(0.0..300.0);
    let y0 = rng.gen_range(0.0..300.0);
    BoundingBox::new(
        label,
        x0,
        y0,
        x0 + rng.gen_range(20.0..120.0),
        y0 + rng.gen_range(20.0..120.0),
        rng.gen_range(0.4..1.0),
    )
    .unwrap()
}

#[test]
fn criterion_6_filters_are_monotone_and_idempotent() {
    let hp = HyperParams::set_a();
    let mut rng = ChaCha8Rng::seed_from_u64(606);

    for round in 0..100 {
        let contours: Vec<Contour> = (0..rng.gen_range(0..8)).map(|_| random_contour(&mut rng)).collect();

        let once = filter_straight(&contours, &hp, false);
        assert!(is_submultiset(&once, &contours), "round {round}: straight output grew");
        assert_eq!(filter_straight(&once, &hp, false), once, "round {round}: straight not stable");

        let food = random_box(&mut rng, Label::Food);
        let plate = BoundingBox::new(
            Label::Plate,
            food.x_min - 10.0,
            food.y_min - 10.0,
            food.x_max + 10.0,
            food.y_max + rng.gen_range(10.0..80.0),
            0.9,
        )
        .unwrap();
        let ctx = RimContext::new(food, plate);
        let once = filter_rim(&contours, &ctx, &hp).unwrap();
        assert!(is_submultiset(&once, &contours), "round {round}: rim output grew");
        assert_eq!(filter_rim(&once, &ctx, &hp).unwrap(), once, "round {round}: rim not stable");

        let cands = random_candidates(&mut rng);
        let plates: Vec<BoundingBox> =
            (0..rng.gen_range(0..3)).map(|_| random_box(&mut rng, Label::Plate)).collect();
        let once = filter_by_plate_box(&cands, &plates, &hp);
        assert!(is_submultiset(&once, &cands), "round {round}: plate output grew");
        assert_eq!(filter_by_plate_box(&once, &plates, &hp), once, "round {round}: plate not stable");

        let foods: Vec<BoundingBox> =
            (0..rng.gen_range(0..3)).map(|_| random_box(&mut rng, Label::Food)).collect();
        let once = filter_by_food_distance(&cands, &foods, &hp, false);
        assert!(is_submultiset(&once, &cands), "round {round}: food output grew");
        assert_eq!(
            filter_by_food_distance(&once, &foods, &hp, false),
            once,
            "round {round}: food not stable"
        );
    }
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output dir readable") {
        let path = entry.expect("dir entry").path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        out.insert(name, std::fs::read(&path).expect("output file readable"));
    }
    out
}

#[test]
fn criterion_7_cli_runs_are_reproducible() {
    let bin = env!("CARGO_BIN_EXE_rimfit");
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();

    let mut specs: Vec<SceneSpec> = (0..4).map(corpus_scene).collect();
    specs.push(SceneSpec {
        width: 360,
        height: 360,
        ellipses: Vec::new(),
        clutter: 4,
        second_rim: false,
        seed: 31,
    });
    let spec_path = root.join("scenes.json");
    std::fs::write(&spec_path, serde_json::to_string_pretty(&specs).unwrap()).unwrap();

    let synth = |out: &Path| {
        let status = Command::new(bin)
            .args(["synth", spec_path.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
            .status()
            .expect("synth runs");
        assert!(status.success(), "synth exited with {status}");
    };
    let (s1, s2) = (root.join("s1"), root.join("s2"));
    synth(&s1);
    synth(&s2);
    assert_eq!(dir_bytes(&s1), dir_bytes(&s2), "synth reruns differ");

    let fit = |out: &Path| {
        let status = Command::new(bin)
            .args(["fit", s1.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
            .status()
            .expect("fit runs");
        assert!(status.success(), "fit exited with {status}");
    };
    let (p1, p2) = (root.join("p1"), root.join("p2"));
    fit(&p1);
    fit(&p2);
    assert_eq!(dir_bytes(&p1), dir_bytes(&p2), "fit reruns differ");
}

#[test]
fn criterion_8_config_defaults_and_round_trip() {
    let c = Config::default();
    assert_eq!(c.hp, HyperParams::set_a());
    assert_eq!(
        (c.hp.g_m, c.hp.s, c.hp.epsilon, c.hp.l_min),
        (0.6, 8, 2.0, 60),
        "set A first half"
    );
    assert_eq!(
        (c.hp.d_chord, c.hp.h_gap, c.hp.m_score, c.hp.a_p, c.hp.d_f),
        (7.0, 10.0, 150.0, 0.08, 450.0),
        "set A second half"
    );

    let set_b = "g_m = 0.7\ns = 7\nepsilon = 2\nl_min = 60\nd_chord = 7.5\n\
                 h_gap = 10\nm_score = 125\na_p = 0.06\nd_f = 450\n";
    let tmp = tempfile::tempdir().expect("tempdir");
    let path = tmp.path().join("set_b.conf");
    std::fs::write(&path, set_b).unwrap();
    let loaded = load_config(&path).expect("set B parses");
    assert_eq!(loaded.hp, HyperParams::set_b());
    let reparsed = parse_config(&loaded.to_text()).expect("serialized config parses");
    assert_eq!(reparsed, loaded, "config round-trip changed a value");
}

#[test]
fn criterion_9_aggregate_matches_hand_arithmetic() {
    let gt = |vals: &[(&str, &[f64])]| -> BTreeMap<String, Vec<f64>> {
        vals.iter().map(|(id, v)| (id.to_string(), v.to_vec())).collect()
    };

    let r = aggregate(Method::A, &gt(&[("img1", &[4.0, 6.0])]));
    assert_eq!((r.mu, r.sigma, r.n_images), (Some(5.0), Some(1.0), 1));

    let r = aggregate(Method::A, &gt(&[("img1", &[3.0]), ("img2", &[3.0])]));
    assert_eq!((r.mu, r.sigma, r.n_images), (Some(3.0), Some(0.0), 2));

    let r = aggregate(Method::B, &BTreeMap::new());
    assert_eq!((r.mu, r.sigma, r.n_images), (None, None, 0));
    assert_eq!(r.per_image_mean, None);
}

#[test]
fn fit_writes_a_prediction_within_chamfer_tolerance() {
    let bin = env!("CARGO_BIN_EXE_rimfit");
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();

    let spec = vec![corpus_scene(1)];
    let spec_path = root.join("scene.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    let scene_dir = root.join("scene");
    let status = Command::new(bin)
        .args(["synth", spec_path.to_str().unwrap(), "--out-dir", scene_dir.to_str().unwrap()])
        .status()
        .expect("synth runs");
    assert!(status.success());

    let pred_dir = root.join("preds");
    let status = Command::new(bin)
        .args([
            "fit",
            scene_dir.to_str().unwrap(),
            "--out-dir",
            pred_dir.to_str().unwrap(),
        ])
        .status()
        .expect("fit runs");
    assert!(status.success());

    let preds = rimfit_core::eval::load_predictions(&pred_dir.join("scene_000.pred.json"))
        .expect("prediction file parses");
    assert_eq!(preds.len(), 1);
    assert_eq!(preds[0].ellipses.len(), 1, "expected exactly one rim");

    let gt = rimfit_core::eval::load_ground_truth(&scene_dir.join("gt.json")).unwrap();
    let config = Config::default();
    let va = eval_method_a(&gt[0], &preds[0].ellipses, config.n_samples, true);
    assert!(va.iter().all(|v| *v < 3.0), "chamfer to ground truth was {va:?}");
}

#[test]
fn eval_reports_near_zero_when_predictions_equal_ground_truth() {
    let bin = env!("CARGO_BIN_EXE_rimfit");
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();

    let gt = vec![GroundTruth {
        image_id: "img1".to_string(),
        ellipses: vec![Ellipse::new(150.0, 140.0, 90.0, 70.0, 0.3).unwrap()],
    }];
    let gt_path = root.join("gt.json");
    std::fs::write(&gt_path, serde_json::to_string(&gt).unwrap()).unwrap();
    let preds_dir = root.join("preds");
    std::fs::create_dir(&preds_dir).unwrap();
    std::fs::write(
        preds_dir.join("img1.pred.json"),
        serde_json::to_string(&gt).unwrap(),
    )
    .unwrap();

    let status = Command::new(bin)
        .args([
            "eval",
            "--preds-dir",
            preds_dir.to_str().unwrap(),
            "--gt",
            gt_path.to_str().unwrap(),
        ])
        .status()
        .expect("eval runs");
    assert!(status.success());

    for name in ["report_a.json", "report_b.json"] {
        let text = std::fs::read_to_string(preds_dir.join(name)).expect("report written");
        let report: rimfit_core::eval::EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.n_images, 1);
        assert!(report.mu.unwrap() < 0.1, "{name} mu was {:?}", report.mu);
    }
}
