//! Acceptance suite. Each test covers one criterion at full scale and prints
//! a `criterion N: PASS/FAIL` line (run with `--nocapture` to see them).
//!
//! 1. clean tetromino reproduction (train 2000 / test 320, scores >= 99)
//! 2. clean multi-part reproduction (ARI and mIoU >= 95)
//! 3. occlusion fill-in against amodal ground truth (mIoU >= 0.85)
//! 4. textured-background robustness (mIoU >= 0.85, prediction stability)
//! 5. clustering oracle equivalence on 500 random graphs
//! 6. comparison-count bound and wall-time scaling
//! 7. planarity bound on the adjacency graph
//! 8. metric identities
//! 9. determinism and persistence

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::{LazyLock, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ecoscope::discovery::{
    brute_force_discover, discover_objects, partition_of, DiscoveryConfig,
};
use ecoscope::graph::{adjacency_pairs, extract_parts, DescriptorParams, Part, PartGraph};
use ecoscope::grid::PixelSet;
use ecoscope::inference::{
    discover_in_image, infer_dataset, train_memory, InferenceParams, TrainOptions, TrainReport,
};
use ecoscope::memory::ObjectMemory;
use ecoscope::metrics::{self, best_match, dice, fg_ari, iou, EvalMode};
use ecoscope::scene::io::{
    generate_dataset, generate_sample, DatasetFamily, GenerateOptions,
};
use ecoscope::segment::{felzenszwalb_segment, SegmentationParams};

/// Criteria run one at a time so that the wall-time measurements of
/// criterion 6 (and the criterion 1 runtime budget) see an unloaded machine;
/// each criterion still parallelizes internally.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

struct Trained {
    #[allow(dead_code)]
    dir: tempfile::TempDir,
    root: PathBuf,
    memory: ObjectMemory,
    report: TrainReport,
}

fn train_family(family: DatasetFamily, count: usize, seed: u64) -> Trained {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path().to_path_buf();
    let train_dir = root.join("train");
    generate_dataset(family, count, seed, &train_dir, &GenerateOptions::default())
        .expect("generate training set");
    let (memory, report) = train_memory(&train_dir, &TrainOptions::default()).expect("train");
    Trained {
        dir,
        root,
        memory,
        report,
    }
}

/// Multi-part training artifacts shared by criteria 2, 3, and 4.
static MULTIPART: LazyLock<Trained> =
    LazyLock::new(|| train_family(DatasetFamily::Multipart, 2000, 11));

fn run_eval(
    trained: &Trained,
    family: DatasetFamily,
    count: usize,
    seed: u64,
    mode: EvalMode,
    tag: &str,
) -> metrics::EvalReport {
    let test_dir = trained.root.join(format!("test_{tag}"));
    generate_dataset(family, count, seed, &test_dir, &GenerateOptions::default())
        .expect("generate test set");
    let pred_dir = trained.root.join(format!("pred_{tag}"));
    infer_dataset(&test_dir, &trained.memory, &InferenceParams::default(), Some(&pred_dir))
        .expect("infer");
    metrics::evaluate_dataset(&pred_dir, &test_dir, mode).expect("evaluate")
}

fn report_line(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_tetromino_reproduction() {
    let _serial = serial();
    let start = Instant::now();
    let trained = train_family(DatasetFamily::Tetromino, 2000, 7);
    let report = run_eval(&trained, DatasetFamily::Tetromino, 320, 5_000_000, EvalMode::Modal, "tet");
    let ari = report.ari_mean.expect("modal mode computes ari");
    let elapsed = start.elapsed();
    let pass = ari >= 0.99
        && report.mdice_mean >= 0.99
        && report.miou_mean >= 0.99
        && elapsed < Duration::from_secs(600);
    report_line(
        "1 (tetromino reproduction)",
        pass,
        &format!(
            "ari={:.2} mdice={:.2} miou={:.2} runtime={:.1?}",
            100.0 * ari,
            100.0 * report.mdice_mean,
            100.0 * report.miou_mean,
            elapsed
        ),
    );
    assert!(trained.report.max_comparison_ratio <= 4.0);
}

#[test]
fn criterion_2_multipart_reproduction() {
    let _serial = serial();
    let trained = &*MULTIPART;
    let report = run_eval(trained, DatasetFamily::Multipart, 320, 6_000_000, EvalMode::Modal, "clean");
    let ari = report.ari_mean.expect("modal mode computes ari");
    let pass = ari >= 0.95 && report.miou_mean >= 0.95;
    report_line(
        "2 (multi-part reproduction)",
        pass,
        &format!(
            "ari={:.2} mdice={:.2} miou={:.2}",
            100.0 * ari,
            100.0 * report.mdice_mean,
            100.0 * report.miou_mean
        ),
    );
}

#[test]
fn criterion_3_occlusion_fill_in() {
    let _serial = serial();
    let trained = &*MULTIPART;
    let report = run_eval(
        trained,
        DatasetFamily::Occluded,
        320,
        7_000_000,
        EvalMode::Amodal,
        "occluded",
    );
    let pass = report.miou_mean >= 0.85;
    report_line(
        "3 (occlusion fill-in)",
        pass,
        &format!(
            "amodal mdice={:.2} miou={:.2} over {} scenes",
            100.0 * report.mdice_mean,
            100.0 * report.miou_mean,
            report.rows.len()
        ),
    );
}

#[test]
fn criterion_4_ood_robustness() {
    let _serial = serial();
    let trained = &*MULTIPART;
    // the ood family shares the layout stream with the clean generator, so
    // the same seed yields identical object layouts
    let seed = 8_000_000;
    let report = run_eval(trained, DatasetFamily::Ood, 320, seed, EvalMode::Modal, "ood");

    let params = InferenceParams::default();
    let opts = GenerateOptions::default();
    let mut stability = Vec::new();
    for index in 0..320 {
        let (_, clean) = generate_sample(DatasetFamily::Multipart, seed, index, &opts).unwrap();
        let (_, ood) = generate_sample(DatasetFamily::Ood, seed, index, &opts).unwrap();
        let pc = discover_in_image(&clean.image, &trained.memory, &params).unwrap();
        let po = discover_in_image(&ood.image, &trained.memory, &params).unwrap();
        let masks_c: Vec<PixelSet> = pc.objects.iter().map(|o| o.modal.clone()).collect();
        let masks_o: Vec<PixelSet> = po.objects.iter().map(|o| o.modal.clone()).collect();
        let m = best_match(&masks_c, &masks_o);
        for &(i, j, _, _) in &m.pairs {
            stability.push(iou(&masks_c[i], &masks_o[j]));
        }
    }
    let mean_stability = stability.iter().sum::<f64>() / stability.len().max(1) as f64;
    let pass = report.miou_mean >= 0.85 && mean_stability >= 0.95;
    report_line(
        "4 (ood robustness)",
        pass,
        &format!(
            "miou={:.2} clean-vs-ood stability={:.4} over {} object pairs",
            100.0 * report.miou_mean,
            mean_stability,
            stability.len()
        ),
    );
}

/// Random part graphs: a few exact shape classes scattered over positions,
/// some of them duplicated as translated motifs, with random extra adjacency.
fn random_small_graph(rng: &mut ChaCha8Rng) -> PartGraph {
    let classes: Vec<Vec<[f64; 2]>> = (0..4)
        .map(|c| {
            let phase = c as f64 * 0.9 + 0.3;
            (0..6)
                .map(|k| {
                    let a = phase + k as f64;
                    [a.cos(), a.sin()]
                })
                .collect()
        })
        .collect();
    let m = rng.gen_range(2..=12);
    let mut parts = Vec::new();
    let motif = rng.gen_bool(0.7);
    for id in 0..m {
        let class = rng.gen_range(0..classes.len());
        // duplicated motifs share positions modulo a translation
        let (base_r, base_c) = if motif && id >= m / 2 {
            let anchor = id - m / 2;
            (40 + 4 * anchor as u32, 7 * anchor as u32)
        } else {
            (rng.gen_range(0..30), rng.gen_range(0..30))
        };
        let px: PixelSet = [(base_r, base_c)].into_iter().collect();
        parts.push(
            Part::from_pixels(id, (id >= m / 2) as usize, px, [0.0; 3], 6)
                .with_descriptor(classes[class].clone()),
        );
    }
    let mut adjacent = BTreeSet::new();
    for _ in 0..rng.gen_range(0..2 * m) {
        let a = rng.gen_range(0..m);
        let b = rng.gen_range(0..m);
        if a != b && parts[a].image_index == parts[b].image_index {
            adjacent.insert((a.min(b), a.max(b)));
        }
    }
    let adjacent: Vec<(usize, usize)> = adjacent.into_iter().collect();
    PartGraph::from_parts_with_adjacency(parts, &adjacent)
}

#[test]
fn criterion_5_oracle_equivalence() {
    let _serial = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agree = 0usize;
    const TRIALS: usize = 500;
    for trial in 0..TRIALS {
        let graph = random_small_graph(&mut rng);
        let config = DiscoveryConfig {
            deterministic_order: trial % 2 == 0,
            rng_seed: trial as u64,
            ..Default::default()
        };
        let (clusters, _) = discover_objects(&graph, &config).unwrap();
        let brute = brute_force_discover(&graph, &config).unwrap();
        if partition_of(&clusters) == partition_of(&brute) {
            agree += 1;
        } else {
            eprintln!("divergence at trial {trial}");
        }
    }
    report_line(
        "5 (oracle equivalence)",
        agree == TRIALS,
        &format!("{agree}/{TRIALS} random graphs agree"),
    );
}

/// Grid of identical square parts: every part is similar to every other, all
/// grid neighbors are adjacent. The densest realistic workload.
fn square_grid_graph(side: usize) -> PartGraph {
    let mut parts = Vec::new();
    for gr in 0..side {
        for gc in 0..side {
            let (r0, c0) = (4 * gr as u32, 4 * gc as u32);
            let px: PixelSet = (r0..r0 + 3)
                .flat_map(|r| (c0..c0 + 3).map(move |c| (r, c)))
                .collect();
            parts.push(Part::from_pixels(parts.len(), 0, px, [0.0; 3], 64));
        }
    }
    let mut adjacent = Vec::new();
    for gr in 0..side {
        for gc in 0..side {
            let i = gr * side + gc;
            if gc + 1 < side {
                adjacent.push((i, i + 1));
            }
            if gr + 1 < side {
                adjacent.push((i, i + side));
            }
        }
    }
    PartGraph::from_parts_with_adjacency(parts, &adjacent)
}

#[test]
fn criterion_6_complexity_instrumentation() {
    let _serial = serial();
    // comparison bound on every training batch of the shared run
    let trained = &*MULTIPART;
    let ratio = trained.report.max_comparison_ratio;
    assert!(
        ratio <= 4.0,
        "training comparisons exceeded 4 M^2 d^2 (ratio {ratio:.3})"
    );

    // wall-time scaling on synthetic graphs of M identical parts; the
    // repetitions are interleaved across sizes so transient load hits all
    // sizes alike, and the minimum per size is kept
    let sides = [7usize, 10, 14, 20]; // M = 49, 100, 196, 400
    let graphs: Vec<PartGraph> = sides.iter().map(|&s| square_grid_graph(s)).collect();
    let mut times = vec![f64::INFINITY; sides.len()];
    for _rep in 0..3 {
        for (idx, graph) in graphs.iter().enumerate() {
            let t = Instant::now();
            let (_, stats) = discover_objects(graph, &DiscoveryConfig::default()).unwrap();
            times[idx] = times[idx].min(t.elapsed().as_secs_f64());
            let m = graph.parts.len() as f64;
            let d = graph.max_adjacency_degree() as f64;
            assert!(
                (stats.pairwise_comparisons as f64) <= 4.0 * m * m * d * d,
                "M={m}: comparisons {} exceed 4 M^2 d^2",
                stats.pairwise_comparisons
            );
        }
    }
    let sizes: Vec<f64> = graphs.iter().map(|g| g.parts.len() as f64).collect();
    // least-squares slope of log t over log M
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let pass = slope <= 2.3;
    report_line(
        "6 (complexity instrumentation)",
        pass,
        &format!(
            "max comparison ratio={ratio:.3}, log-log slope={slope:.2} over M={:?}",
            sizes.iter().map(|m| *m as usize).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7_planarity_bound() {
    let _serial = serial();
    let params = SegmentationParams::default();
    let desc = DescriptorParams::default();
    let mut worst: f64 = 0.0;
    for family in [
        DatasetFamily::Tetromino,
        DatasetFamily::Multipart,
        DatasetFamily::Occluded,
        DatasetFamily::Ood,
    ] {
        for index in 0..100 {
            let (_, sample) =
                generate_sample(family, 400_000 + index as u64, index, &GenerateOptions::default())
                    .unwrap();
            let labeling = felzenszwalb_segment(&sample.image, &params);
            let pairs = adjacency_pairs(&labeling);
            let avg = 2.0 * pairs.len() as f64 / labeling.num_parts.max(1) as f64;
            worst = worst.max(avg);
            assert!(
                avg < 6.0,
                "family {family:?} sample {index}: average degree {avg:.3}"
            );
        }
    }
    // the same bound holds on the part graph the pipeline actually builds
    let (_, sample) =
        generate_sample(DatasetFamily::Multipart, 400_000, 0, &GenerateOptions::default()).unwrap();
    let labeling = felzenszwalb_segment(&sample.image, &params);
    let graph = PartGraph::build(vec![extract_parts(&labeling, &sample.image, 0, &desc)]);
    for (_, avg) in graph.average_adjacency_degree_per_image() {
        assert!(avg < 6.0);
    }
    report_line(
        "7 (planarity bound)",
        worst < 6.0,
        &format!("worst average adjacency degree {worst:.3} over 400 segmentations"),
    );
}

#[test]
fn criterion_8_metric_identities() {
    let _serial = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // dice = 2 iou / (1 + iou) on 1000 fuzzed pairs
    for _ in 0..1000 {
        let mk = |rng: &mut ChaCha8Rng| -> PixelSet {
            (0..rng.gen_range(1..80))
                .map(|_| (rng.gen_range(0..15), rng.gen_range(0..15)))
                .collect()
        };
        let (x, y) = (mk(&mut rng), mk(&mut rng));
        let (d, i) = (dice(&x, &y), iou(&x, &y));
        assert!((d - 2.0 * i / (1.0 + i)).abs() < 1e-12);
    }

    // ari permutation invariance and null mean
    let relabel = |labels: &[u32]| -> Vec<u32> { labels.iter().map(|&v| v * 13 + 5).collect() };
    let mut null_sum = 0.0;
    for _ in 0..100 {
        let a: Vec<u32> = (0..1000).map(|_| rng.gen_range(0..5)).collect();
        let b: Vec<u32> = (0..1000).map(|_| rng.gen_range(0..5)).collect();
        let fg = vec![true; 1000];
        let v = fg_ari(&a, &b, &fg).unwrap();
        assert!((fg_ari(&relabel(&a), &b, &fg).unwrap() - v).abs() < 1e-12);
        assert!((fg_ari(&a, &relabel(&b), &fg).unwrap() - v).abs() < 1e-12);
        null_sum += v;
    }
    let null_mean = null_sum / 100.0;
    assert!(null_mean.abs() < 0.02, "null ARI mean {null_mean}");

    // hungarian equals brute force up to 5x5
    let mut max_gap: f64 = 0.0;
    for _ in 0..60 {
        let mk = |rng: &mut ChaCha8Rng| -> PixelSet {
            (0..rng.gen_range(1..10))
                .map(|_| (rng.gen_range(0..4), rng.gen_range(0..4)))
                .collect()
        };
        let pred: Vec<PixelSet> = (0..rng.gen_range(1..=5)).map(|_| mk(&mut rng)).collect();
        let gt: Vec<PixelSet> = (0..rng.gen_range(1..=5)).map(|_| mk(&mut rng)).collect();
        let total: f64 = best_match(&pred, &gt).pairs.iter().map(|&(_, _, v, _)| v).sum();
        let brute = brute_force_assignment(&pred, &gt);
        max_gap = max_gap.max((total - brute).abs());
    }
    report_line(
        "8 (metric identities)",
        max_gap < 1e-9,
        &format!("dice/iou identity, ari null mean {null_mean:.4}, hungarian gap {max_gap:.2e}"),
    );
}

fn brute_force_assignment(pred: &[PixelSet], gt: &[PixelSet]) -> f64 {
    fn go(pred: &[PixelSet], gt: &[PixelSet], i: usize, used: &mut Vec<bool>) -> f64 {
        if i == pred.len() {
            return 0.0;
        }
        // leave pred i unmatched, or try every free gt
        let mut best = go(pred, gt, i + 1, used);
        for j in 0..gt.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(iou(&pred[i], &gt[j]) + go(pred, gt, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(pred, gt, 0, &mut vec![false; gt.len()])
}

#[test]
fn criterion_9_determinism_and_persistence() {
    let _serial = serial();
    let dir = tempfile::tempdir().unwrap();

    // bit-identical dataset generation
    let d1 = dir.path().join("gen1");
    let d2 = dir.path().join("gen2");
    generate_dataset(DatasetFamily::Multipart, 60, 77, &d1, &GenerateOptions::default()).unwrap();
    generate_dataset(DatasetFamily::Multipart, 60, 77, &d2, &GenerateOptions::default()).unwrap();
    assert_dirs_identical(&d1, &d2);

    // bit-identical training and memory round trip
    let (mem1, _) = train_memory(&d1, &TrainOptions::default()).unwrap();
    let (mem2, _) = train_memory(&d2, &TrainOptions::default()).unwrap();
    let m1 = dir.path().join("m1.bin");
    let m2 = dir.path().join("m2.bin");
    mem1.save(&m1).unwrap();
    mem2.save(&m2).unwrap();
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    let loaded = ObjectMemory::load(&m1).unwrap();
    assert_eq!(loaded, mem1, "save/load round trip");

    // bit-identical inference outputs
    let test_dir = dir.path().join("test");
    generate_dataset(DatasetFamily::Multipart, 20, 55_000, &test_dir, &GenerateOptions::default())
        .unwrap();
    let p1 = dir.path().join("pred1");
    let p2 = dir.path().join("pred2");
    infer_dataset(&test_dir, &mem1, &InferenceParams::default(), Some(&p1)).unwrap();
    infer_dataset(&test_dir, &loaded, &InferenceParams::default(), Some(&p2)).unwrap();
    assert_dirs_identical(&p1, &p2);

    report_line("9 (determinism & persistence)", true, "bit-identical across reruns");
}

fn assert_dirs_identical(a: &Path, b: &Path) {
    let list = |root: &Path| -> Vec<PathBuf> {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d).unwrap() {
                let p = entry.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push(p.strip_prefix(root).unwrap().to_path_buf());
                }
            }
        }
        files.sort();
        files
    };
    let fa = list(a);
    assert_eq!(fa, list(b), "file sets differ");
    for rel in fa {
        let ba = std::fs::read(a.join(&rel)).unwrap();
        let bb = std::fs::read(b.join(&rel)).unwrap();
        assert_eq!(ba, bb, "file {} differs", rel.display());
    }
}
