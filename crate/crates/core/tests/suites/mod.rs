//! Randomised cross-checks of the library against the oracles. Each check
//! returns a one-line summary on success and the first disagreement on
//! failure; the core tests unwrap them and the acceptance runner prints them.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use fusekit_core::driving::{
    greedy_matches, grounding_map, iou, l2_corpus, l2_error, ora_score, Detection, GatingMode, GroundTruthBox,
    ImageDetections, ImageGroundTruth, L2Mode, MapConfig, OraSample, OrientedRect, RiskCategory, RiskLevel,
    TrajectoryPlan,
};
use fusekit_core::interactor::{
    fuse, score_tokens, select_topk, token_budget, BevFeatureMap, InstructionEmbedding, Reduction, SelectionConfig,
    ViewAttention, ViewFeatureSet,
};
use fusekit_core::mask::rng::stream;
use fusekit_core::mask::{
    apply_token_mask, features_digest, mask_indices, run_mask_experiment, MaskExperimentConfig, MaskMetrics,
    MaskMode, MaskSpec, MaskStage,
};
use fusekit_core::metrics::{bleu, cider, rouge_l, EvalPair};
use fusekit_core::numerics::{
    cross_attention, cross_attention_backward, mlp_backward, mlp_forward, AttnLayer, CrossAttnParams, MlpParams,
};
use fusekit_core::refinery::{
    encode_ego_status, normalize_box, parse_tags, BoxSpan, DrivingCommand, EgoStatus, Segment, TaggedText,
};
use fusekit_core::{CameraView, Matrix, NormalizedBox};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::oracles::{self, Corpus, Det};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

type LayerSlot = fn(&mut AttnLayer) -> &mut Matrix;

fn rng(label: &str) -> ChaCha8Rng {
    stream(0x5eed, label)
}

fn uniform(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| r.random_range(-1.0..=1.0)).collect()).unwrap()
}

fn within(start: Instant, budget: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < budget, "{what} took {took:?}, budget {budget:?}");
    Ok(took)
}

// ------------------------------------------------------------ budget ----

pub fn token_budget_840() -> Outcome {
    let mut r = rng("budget");
    let cfg = SelectionConfig::default();
    let start = Instant::now();
    for _ in 0..100 {
        let views: Vec<usize> = (0..6).map(|_| r.random_range(cfg.k_img..=4096)).collect();
        let bev = r.random_range(cfg.k_bev..=10_000);
        let b = token_budget(&cfg, &views, bev).map_err(|e| e.to_string())?;
        ensure!(b.fused == 840, "views {views:?} bev {bev}: fused {}", b.fused);
    }
    let took = within(start, Duration::from_secs(1), "100 budget shapes")?;

    // The fused sequence itself has that length, not just the arithmetic.
    for trial in 0..2 {
        let d = 4;
        let views: Vec<Matrix> = (0..6).map(|_| uniform(r.random_range(90..=130), d, &mut r)).collect();
        let bev = BevFeatureMap::flat(uniform(r.random_range(300..=360), d, &mut r));
        let inst = InstructionEmbedding::new(uniform(3, d, &mut r));
        let attn = CrossAttnParams::seeded(d, 1, 2, trial).unwrap();
        let views = ViewFeatureSet::new(views).map_err(|e| e.to_string())?;
        let fused = fuse(&views, &bev, &inst, &cfg, &ViewAttention::Shared(attn.clone()), &attn)
            .map_err(|e| e.to_string())?;
        ensure!(fused.len() == 840, "fused length {}", fused.len());
    }
    Ok(format!("100 shapes -> 840 tokens in {took:?}; 2 full fusions of length 840"))
}

// --------------------------------------------------------- gradients ----

const GRAD_TOL: f64 = 1e-4;
const FD_EPS: f64 = 1e-6;

/// `Σ g ⊙ m`, a scalar loss whose gradient with respect to `m` is `g`.
fn weighted_sum(m: &Matrix, g: &Matrix) -> f64 {
    m.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
}

fn row(v: &[f64]) -> Matrix {
    Matrix::new(1, v.len(), v.to_vec()).unwrap()
}

fn check_grad(name: &str, analytic: &Matrix, f: impl Fn(&Matrix) -> f64, at: &Matrix, worst: &mut f64) -> Result<(), String> {
    let numeric = oracles::numeric_grad(f, at, FD_EPS);
    let e = oracles::rel_err(analytic, &numeric);
    *worst = worst.max(e);
    ensure!(e < GRAD_TOL, "{name}: relative error {e:e}");
    Ok(())
}

fn mlp_point(r: &mut ChaCha8Rng, worst: &mut f64) -> Result<(), String> {
    let d_in = r.random_range(1..=16);
    let d_hidden = r.random_range(1..=16);
    let d_out = r.random_range(1..=16);
    let rows = r.random_range(1..=4);
    let x = uniform(rows, d_in, r);
    let w1 = uniform(d_in, d_hidden, r);
    let b1 = uniform(1, d_hidden, r);
    let w2 = uniform(d_hidden, d_out, r);
    let b2 = uniform(1, d_out, r);
    let g = uniform(rows, d_out, r);
    let params = |w1: &Matrix, b1: &Matrix, w2: &Matrix, b2: &Matrix| {
        MlpParams::new(w1.clone(), b1.data().to_vec(), w2.clone(), b2.data().to_vec()).unwrap()
    };
    let loss = |x: &Matrix, p: &MlpParams| weighted_sum(&mlp_forward(x, p).unwrap(), &g);
    let p = params(&w1, &b1, &w2, &b2);
    let grads = mlp_backward(&x, &p, &g).map_err(|e| e.to_string())?;
    check_grad("mlp dx", &grads.dx, |x| loss(x, &p), &x, worst)?;
    check_grad("mlp dw1", &grads.dw1, |w| loss(&x, &params(w, &b1, &w2, &b2)), &w1, worst)?;
    check_grad("mlp db1", &row(&grads.db1), |b| loss(&x, &params(&w1, b, &w2, &b2)), &b1, worst)?;
    check_grad("mlp dw2", &grads.dw2, |w| loss(&x, &params(&w1, &b1, w, &b2)), &w2, worst)?;
    check_grad("mlp db2", &row(&grads.db2), |b| loss(&x, &params(&w1, &b1, &w2, b)), &b2, worst)
}

fn attention_point(r: &mut ChaCha8Rng, worst: &mut f64) -> Result<(), String> {
    let d = r.random_range(1..=16);
    let divisors: Vec<usize> = (1..=d).filter(|h| d % h == 0).collect();
    let heads = *divisors.choose(r).unwrap();
    let n_layers = r.random_range(1..=2);
    let residual = r.random_bool(0.5);
    let (nq, nk) = (r.random_range(1..=4), r.random_range(1..=6));
    let q = uniform(nq, d, r);
    let k = uniform(nk, d, r);
    let v = uniform(nk, d, r);
    let g = uniform(nq, d, r);
    let layers: Vec<AttnLayer> = (0..n_layers)
        .map(|_| AttnLayer { wq: uniform(d, d, r), wk: uniform(d, d, r), wv: uniform(d, d, r), wo: uniform(d, d, r) })
        .collect();
    let params = |layers: Vec<AttnLayer>| CrossAttnParams::new(layers, heads).unwrap().with_residual(residual);
    let p = params(layers.clone());
    let loss = |q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams| {
        weighted_sum(&cross_attention(q, k, v, p).unwrap(), &g)
    };
    let grads = cross_attention_backward(&q, &k, &v, &p, &g).map_err(|e| e.to_string())?;
    check_grad("attn dq", &grads.dq, |m| loss(m, &k, &v, &p), &q, worst)?;
    check_grad("attn dk", &grads.dk, |m| loss(&q, m, &v, &p), &k, worst)?;
    check_grad("attn dv", &grads.dv, |m| loss(&q, &k, m, &p), &v, worst)?;
    for (i, lg) in grads.layers.iter().enumerate() {
        let which: [(&str, &Matrix, LayerSlot); 4] = [
            ("wq", &lg.dwq, |l| &mut l.wq),
            ("wk", &lg.dwk, |l| &mut l.wk),
            ("wv", &lg.dwv, |l| &mut l.wv),
            ("wo", &lg.dwo, |l| &mut l.wo),
        ];
        for (name, analytic, slot) in which {
            let at = slot(&mut layers.clone()[i]).clone();
            let f = |w: &Matrix| {
                let mut ls = layers.clone();
                *slot(&mut ls[i]) = w.clone();
                loss(&q, &k, &v, &params(ls))
            };
            check_grad(&format!("attn layer {i} d{name}"), analytic, f, &at, worst)?;
        }
    }
    Ok(())
}

pub fn gradient_checks() -> Outcome {
    let mut r = rng("gradients");
    let start = Instant::now();
    let (mut worst_mlp, mut worst_attn) = (0.0f64, 0.0f64);
    for i in 0..50 {
        mlp_point(&mut r, &mut worst_mlp).map_err(|e| format!("mlp point {i}: {e}"))?;
        attention_point(&mut r, &mut worst_attn).map_err(|e| format!("attention point {i}: {e}"))?;
    }
    let took = within(start, Duration::from_secs(10), "gradient checks")?;
    Ok(format!("50+50 points, worst relative error mlp {worst_mlp:.1e} attention {worst_attn:.1e}, {took:?}"))
}

// --------------------------------------------------------- selection ----

pub fn selection_oracle() -> Outcome {
    let mut r = rng("selection");
    let start = Instant::now();
    let mut tied = 0;
    for trial in 0..1000 {
        let n = r.random_range(1..=2048);
        let k = [1, 90, n][trial % 3];
        let scores: Vec<f64> = if trial % 2 == 0 {
            tied += 1;
            (0..n).map(|_| r.random_range(-4..=4) as f64 / 4.0).collect()
        } else {
            (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
        };
        let f = Matrix::new(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let got = select_topk(&f, &scores, k).map_err(|e| e.to_string())?;
        let want = oracles::topk_full_sort(&scores, k);
        ensure!(got.indices == want, "trial {trial}: n {n} k {k}: index lists differ");
        let rows: Vec<usize> = got.features.data().iter().map(|v| *v as usize).collect();
        ensure!(rows == want, "trial {trial}: selected rows out of step with indices");
    }
    let took = within(start, Duration::from_secs(5), "1000 selections")?;
    Ok(format!("1000 vectors ({tied} with ties), exact order match, {took:?}"))
}

// ------------------------------------------------------- invariances ----

fn permute_rows(m: &Matrix, perm: &[usize]) -> Matrix {
    m.select_rows(perm).unwrap()
}

pub fn invariances() -> Outcome {
    let mut r = rng("invariance");
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let d = [4, 8][trial % 2];
        let heads = [1, 2, 4][trial % 3];
        let n_views = r.random_range(1..=3);
        let views: Vec<Matrix> = (0..n_views).map(|_| uniform(r.random_range(3..=20), d, &mut r)).collect();
        let bev = uniform(r.random_range(3..=20), d, &mut r);
        let inst = InstructionEmbedding::new(uniform(r.random_range(1..=4), d, &mut r));
        let cfg = SelectionConfig {
            k_img: r.random_range(1..=6),
            k_bev: r.random_range(1..=6),
            reduction: if r.random_bool(0.5) { Reduction::Max } else { Reduction::Mean },
        };
        let attn_v = ViewAttention::Shared(CrossAttnParams::seeded(d, 1, heads, trial as u64).unwrap());
        let attn_b = CrossAttnParams::seeded(d, 2, heads, 1000 + trial as u64).unwrap();

        let perms: Vec<Vec<usize>> = views
            .iter()
            .chain([&bev])
            .map(|m| {
                let mut p: Vec<usize> = (0..m.rows()).collect();
                p.shuffle(&mut r);
                p
            })
            .collect();
        let permuted: Vec<Matrix> = views.iter().zip(&perms).map(|(m, p)| permute_rows(m, p)).collect();
        let fs = ViewFeatureSet::new(views.clone()).unwrap();
        let pfs = ViewFeatureSet::new(permuted).unwrap();
        let a = fuse(&fs, &BevFeatureMap::flat(bev.clone()), &inst, &cfg, &attn_v, &attn_b).map_err(|e| e.to_string())?;
        let pb = permute_rows(&bev, &perms[n_views]);
        let b = fuse(&pfs, &BevFeatureMap::flat(pb), &inst, &cfg, &attn_v, &attn_b).map_err(|e| e.to_string())?;
        let diff = a.tokens.max_abs_diff(&b.tokens);
        worst = worst.max(diff);
        ensure!(diff <= 1e-12, "trial {trial}: permuted tokens differ by {diff:e}");
        let source_of = |name: &str| fs.view_names().iter().position(|n| n == name).unwrap_or(n_views);
        for (x, y) in a.provenance.iter().zip(&b.provenance) {
            ensure!(
                x.source == y.source && perms[source_of(&y.source)][y.index] == x.index,
                "trial {trial}: permuted run selected a different token"
            );
        }
    }
    for trial in 0..100 {
        let d = r.random_range(2..=16);
        let f = uniform(r.random_range(1..=200), d, &mut r);
        let inst = uniform(r.random_range(1..=5), d, &mut r);
        let scales: Vec<f64> = (0..inst.rows()).map(|_| 10f64.powf(r.random_range(-3.0..3.0))).collect();
        let scaled = Matrix::new(
            inst.rows(),
            d,
            inst.data().iter().enumerate().map(|(i, v)| v * scales[i / d]).collect(),
        )
        .unwrap();
        let k = r.random_range(1..=f.rows());
        for red in [Reduction::Max, Reduction::Mean] {
            let pick = |m: &Matrix| {
                let s = score_tokens(&f, &InstructionEmbedding::new(m.clone()), red).unwrap();
                select_topk(&f, &s, k).unwrap().indices
            };
            ensure!(pick(&inst) == pick(&scaled), "trial {trial}: positive scaling changed the {red:?} selection");
        }
    }
    Ok(format!("100 permutation trials (max deviation {worst:.1e}), 100 scaling trials"))
}

// ----------------------------------------------------------- metrics ----

const VOCAB: [&str; 14] = [
    "the", "car", "a", "red", "left", "turns", "stops", "light", "is", "Car", "left,", "ahead.", "pedestrian", "(slowly)",
];

fn random_sentence(r: &mut ChaCha8Rng, max_words: usize) -> String {
    let n = r.random_range(1..=max_words);
    (0..n).map(|_| *VOCAB.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

fn random_corpus(r: &mut ChaCha8Rng) -> Corpus {
    loop {
        let pairs = r.random_range(2..=4);
        let corpus: Corpus = (0..pairs)
            .map(|_| {
                let refs = r.random_range(1..=3);
                (random_sentence(r, 6), (0..refs).map(|_| random_sentence(r, 7)).collect())
            })
            .collect();
        let docs: Vec<Vec<Vec<String>>> =
            corpus.iter().map(|(_, rs)| rs.iter().map(|s| oracles::words(s)).collect()).collect();
        // CIDEr needs at least two distinct reference documents.
        if docs.iter().any(|d| d != &docs[0]) {
            return corpus;
        }
    }
}

fn to_pairs(c: &Corpus) -> Vec<EvalPair> {
    c.iter().enumerate().map(|(i, (cand, refs))| EvalPair::new(i.to_string(), cand.clone(), refs.clone())).collect()
}

pub fn metric_oracles() -> Outcome {
    let mut r = rng("metrics");
    let mut worst = 0.0f64;
    for i in 0..20 {
        let corpus = random_corpus(&mut r);
        let pairs = to_pairs(&corpus);
        let mut checks: Vec<(String, f64, f64)> = (1..=4)
            .map(|n| (format!("BLEU{n}"), bleu(&pairs, n).unwrap(), oracles::bleu(&corpus, n)))
            .collect();
        checks.push(("ROUGE_L".into(), rouge_l(&pairs).unwrap(), oracles::rouge_l(&corpus)));
        checks.push(("CIDEr".into(), cider(&pairs).map_err(|e| e.to_string())?, oracles::cider(&corpus)));
        for (name, got, want) in checks {
            let diff = (got - want).abs();
            worst = worst.max(diff);
            ensure!(diff <= 1e-9, "corpus {i} {name}: library {got} oracle {want}\n{corpus:?}");
        }
    }

    let fixture: Corpus = vec![("the cat sat".into(), vec!["the cat sat down".into()])];
    let b1 = bleu(&to_pairs(&fixture), 1).unwrap();
    ensure!((b1 - 71.65).abs() <= 0.01, "fixture BLEU1 {b1}");
    ensure!((b1 - oracles::bleu(&fixture, 1)).abs() <= 1e-9, "fixture BLEU1 disagrees with oracle");

    let same: Corpus = [
        "a red car turns left",
        "the light ahead is red.",
        "a pedestrian crosses slowly",
    ]
    .iter()
    .map(|s| (s.to_string(), vec![s.to_string()]))
    .collect();
    let pairs = to_pairs(&same);
    let mut perfect: Vec<(String, f64)> = (1..=4).map(|n| (format!("BLEU{n}"), bleu(&pairs, n).unwrap())).collect();
    perfect.push(("ROUGE_L".into(), rouge_l(&pairs).unwrap()));
    perfect.push(("CIDEr".into(), cider(&pairs).unwrap()));
    for (name, v) in perfect {
        ensure!(v == 100.0, "identical corpus {name} = {v}");
    }
    Ok(format!("20 corpora, max deviation {worst:.1e}; fixture BLEU1 {b1:.4}; identical corpus 100"))
}

// -------------------------------------------------------------- mAP ----

fn random_box(r: &mut ChaCha8Rng, lo: i64, hi: i64, max_side: i64) -> [i64; 4] {
    let x1 = r.random_range(lo..=hi);
    let y1 = r.random_range(lo..=hi);
    let x2 = (x1 + r.random_range(0..=max_side)).min(999);
    let y2 = (y1 + r.random_range(0..=max_side)).min(999);
    [x1, y1, x2, y2]
}

fn nbox(b: [i64; 4]) -> NormalizedBox {
    NormalizedBox::new(b[0], b[1], b[2], b[3]).unwrap()
}

const LABELS: [&str; 2] = ["car", "truck"];

pub fn map_oracle() -> Outcome {
    let mut r = rng("map");
    let thresholds = [0.1, 0.3, 0.5, 0.75];
    let mut matched_total = 0;
    for trial in 0..2000 {
        let n_images = r.random_range(1..=2);
        let mut gts: Vec<ImageGroundTruth> = (0..n_images).map(|i| ImageGroundTruth { id: format!("img{i}"), boxes: vec![] }).collect();
        let mut preds: Vec<ImageDetections> =
            (0..n_images).map(|i| ImageDetections { id: format!("img{i}"), detections: vec![] }).collect();
        for _ in 0..r.random_range(1..=4) {
            let i = r.random_range(0..n_images);
            let label = LABELS.choose(&mut r).unwrap().to_string();
            gts[i].boxes.push(GroundTruthBox { bbox: nbox(random_box(&mut r, 0, 8, 6)), label });
        }
        for _ in 0..r.random_range(0..=5) {
            let i = r.random_range(0..n_images);
            let label = LABELS.choose(&mut r).unwrap().to_string();
            let score = [0.3, 0.5, 0.7, 0.9][r.random_range(0..4)];
            preds[i].detections.push(Detection { bbox: nbox(random_box(&mut r, 0, 8, 6)), score, label });
        }
        let t = thresholds[trial % thresholds.len()];

        let mut classes: Vec<&str> = LABELS.iter().copied().filter(|l| gts.iter().any(|g| g.boxes.iter().any(|b| b.label == *l))).collect();
        classes.sort_unstable();
        let mut ap_sum = 0.0;
        for label in &classes {
            let (outcomes, npos) = greedy_matches(&preds, &gts, label, t).map_err(|e| e.to_string())?;
            let dets: Vec<Det> = preds
                .iter()
                .enumerate()
                .flat_map(|(image, p)| {
                    p.detections.iter().enumerate().filter(|(_, d)| d.label == *label).map(move |(index, d)| Det {
                        image,
                        index,
                        score: d.score,
                        bbox: d.bbox.coords(),
                    })
                })
                .collect();
            let class_gts: Vec<Vec<[i64; 4]>> = gts
                .iter()
                .map(|g| g.boxes.iter().map(|b| if b.label == *label { b.bbox.coords() } else { [-9, -9, -9, -9] }).collect())
                .collect();
            // Boxes of other classes are placed off-grid so no detection can reach them.
            let want = oracles::exhaustive_matches(&dets, &class_gts, t);
            let got: Vec<(usize, usize, Option<usize>)> = outcomes.iter().map(|o| (o.image, o.detection, o.matched)).collect();
            ensure!(got == want, "trial {trial} class {label} t {t}: greedy {got:?} exhaustive {want:?}");
            matched_total += got.iter().filter(|g| g.2.is_some()).count();
            let hits: Vec<bool> = want.iter().map(|w| w.2.is_some()).collect();
            ap_sum += oracles::average_precision(&hits, npos);
        }
        let cfg = MapConfig { iou_thresholds: vec![t], ..MapConfig::default() };
        let got = grounding_map(&preds, &gts, &cfg).map_err(|e| e.to_string())?;
        let want = 100.0 * (ap_sum / classes.len() as f64);
        ensure!(got == want, "trial {trial}: mAP {got} oracle {want}");
    }

    let mut boxes = Vec::new();
    for i in 0..500 {
        boxes.push(if i % 10 == 9 { random_box(&mut r, 860, 990, 9) } else { random_box(&mut r, 0, 100, 40) });
    }
    for i in 0..500 {
        let (a, b) = (boxes[i], boxes[(i + 1) % 500]);
        let got = iou(&nbox(a), &nbox(b));
        let want = oracles::iou_cells(a, b);
        ensure!(got == want, "IoU {a:?} {b:?}: {got} vs cells {want}");
        ensure!(iou(&nbox(a), &nbox(a)) == 1.0, "self IoU of {a:?}");
    }
    Ok(format!("2000 instances ({matched_total} matches) agree exactly; 500 boxes IoU exact"))
}

// -------------------------------------------------------- collisions ----

pub fn collision_oracle() -> Outcome {
    let mut r = rng("collision");
    let mut overlapping = 0;
    for i in 0..1000 {
        let mut rect = || OrientedRect {
            cx: r.random_range(-5.0..5.0),
            cy: r.random_range(-5.0..5.0),
            length: r.random_range(0.5..6.0),
            width: r.random_range(0.3..3.0),
            heading: r.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        };
        let (a, b) = (rect(), rect());
        let corners = |x: &OrientedRect| oracles::rect_corners(x.cx, x.cy, x.length, x.width, x.heading);
        let area = oracles::polygon_area(&oracles::clip_polygon(&corners(&a), &corners(&b)));
        let sat = a.overlaps(&b);
        ensure!(sat == (area > 0.0), "pair {i}: SAT {sat}, clipped area {area:e}\n{a:?}\n{b:?}");
        ensure!(sat == b.overlaps(&a), "pair {i}: SAT not symmetric");
        overlapping += sat as usize;
    }

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut plan = || -> Vec<[f64; 2]> { (0..6).map(|_| [r.random_range(-30.0..30.0), r.random_range(-30.0..30.0)]).collect() };
        let (p, g) = (plan(), plan());
        let (tp, tg) = (TrajectoryPlan::new(&p).unwrap(), TrajectoryPlan::new(&g).unwrap());
        for (mode, cumulative) in [(L2Mode::AtHorizon, false), (L2Mode::UpToHorizon, true)] {
            let got = l2_error(&tp, &tg, mode);
            let want = oracles::l2_horizons(&p, &g, cumulative);
            for (x, y) in got.horizons().iter().zip(want) {
                worst = worst.max((x - y).abs());
            }
            let avg = (want[0] + want[1] + want[2]) / 3.0;
            worst = worst.max((got.avg - avg).abs());
        }
    }
    ensure!(worst <= 1e-12, "l2 deviates from the naive oracle by {worst:e}");

    let gt: Vec<[f64; 2]> = (1..=6).map(|i| [0.5 * i as f64, 3.0 * i as f64]).collect();
    let pred: Vec<[f64; 2]> = gt.iter().map(|w| [w[0], w[1] + 1.0]).collect();
    let pairs = [(TrajectoryPlan::new(&pred).unwrap(), TrajectoryPlan::new(&gt).unwrap())];
    for mode in [L2Mode::AtHorizon, L2Mode::UpToHorizon] {
        let rep = l2_corpus(&pairs, mode).map_err(|e| e.to_string())?;
        ensure!(rep.horizons() == [1.0; 3] && rep.avg == 1.0, "constant offset under {mode:?}: {rep:?}");
    }
    Ok(format!("1000 pairs ({overlapping} overlapping) agree; l2 within {worst:.1e}; offset gives 1.0"))
}

// --------------------------------------------------------------- ORA ----

pub fn counting_fixture() -> (Vec<OraSample>, Vec<OraSample>) {
    let mut gts = Vec::new();
    let mut preds = Vec::new();
    for i in 0..10 {
        let id = format!("s{i}");
        gts.push(OraSample::present(&id, RiskLevel::High, RiskCategory::CollisionPossibility, "car"));
        preds.push(match i {
            0..3 => OraSample::present(&id, RiskLevel::High, RiskCategory::CollisionPossibility, "car"),
            3..6 => OraSample::present(&id, RiskLevel::Low, RiskCategory::CollisionPossibility, "car"),
            _ => OraSample::absent(&id),
        });
    }
    (preds, gts)
}

pub fn ora_gating() -> Outcome {
    let (preds, gts) = counting_fixture();
    let rep = ora_score(&preds, &gts, GatingMode::CorrectPresent).map_err(|e| e.to_string())?;
    ensure!(rep.exist_acc == 60.0, "exist {}", rep.exist_acc);
    ensure!(rep.level_acc == Some(50.0), "level {:?}", rep.level_acc);

    // Every risk missed: nothing passes the gate.
    let gts: Vec<OraSample> = (0..4).map(|i| OraSample::present(format!("d{i}"), RiskLevel::Medium, RiskCategory::ViewObstruction, "bus")).collect();
    let preds: Vec<OraSample> = (0..4).map(|i| OraSample::absent(format!("d{i}"))).collect();
    let deg = ora_score(&preds, &gts, GatingMode::CorrectPresent).map_err(|e| e.to_string())?;
    ensure!(deg.gated == 0, "degenerate fixture gated {}", deg.gated);
    ensure!(
        deg.level_acc.is_none() && deg.cate_acc.is_none() && deg.object_acc.is_none(),
        "degenerate gate produced numbers: {deg:?}"
    );
    let json = serde_json::to_value(&deg).unwrap();
    ensure!(json["level_acc"] == "N/A", "serialized sentinel {}", json["level_acc"]);
    ensure!(deg.to_csv_row().ends_with("N/A,N/A,N/A"), "csv row {}", deg.to_csv_row());
    Ok(format!("exist {} level {:?}; empty gate reports N/A", rep.exist_acc, rep.level_acc.unwrap()))
}

// ---------------------------------------------------------- refinery ----

const PLAIN_WORDS: [&str; 10] = ["Is", "there", "a", "risk", "near", "the", "truck?", "yes,", "cross", "(0,1)"];

fn random_segment(r: &mut ChaCha8Rng) -> Segment {
    match r.random_range(0..4) {
        0 => {
            let n = r.random_range(1..=4);
            let mut s: String = (0..n).map(|_| *PLAIN_WORDS.choose(r).unwrap()).collect::<Vec<_>>().join(" ");
            if r.random_bool(0.5) {
                s.insert(0, ' ');
            }
            if r.random_bool(0.5) {
                s.push(' ');
            }
            Segment::Plain(s)
        }
        1 => {
            let n = r.random_range(1..=3);
            Segment::Ref((0..n).map(|_| *PLAIN_WORDS.choose(r).unwrap()).collect::<Vec<_>>().join(" "))
        }
        2 => {
            let mut c = || r.random_range(-50..=1200);
            Segment::Box(BoxSpan::new(c(), c(), c(), c()))
        }
        _ => Segment::Camera(*CameraView::ALL.choose(r).unwrap()),
    }
}

pub fn refinery_round_trips() -> Outcome {
    let mut r = rng("tags");
    let mut tags_seen = 0;
    for i in 0..200 {
        let n = r.random_range(1..=6);
        let built = TaggedText::from_segments((0..n).map(|_| random_segment(&mut r)).collect::<Vec<_>>());
        let text = built.canonical();
        let parsed = parse_tags(&text).map_err(|e| format!("string {i} {text:?}: {e}"))?;
        ensure!(parsed.canonical() == text, "string {i}: {text:?} re-serialized as {:?}", parsed.canonical());
        ensure!(parsed.segments() == built.segments(), "string {i}: {text:?} parsed into other segments");
        tags_seen += parsed.segments().iter().filter(|s| !matches!(s, Segment::Plain(_))).count();
    }

    for (w, h) in [(1600u32, 900u32), (1920, 1080), (2, 2), (1000, 1000), (640, 480)] {
        let lo = normalize_box([0.0, 0.0, 0.0, 0.0], w, h).map_err(|e| e.to_string())?;
        ensure!(lo.coords() == [0, 0, 0, 0], "{w}x{h} origin -> {:?}", lo.coords());
        let (mx, my) = (f64::from(w - 1), f64::from(h - 1));
        let hi = normalize_box([mx, my, mx, my], w, h).map_err(|e| e.to_string())?;
        ensure!(hi.coords() == [999, 999, 999, 999], "{w}x{h} far corner -> {:?}", hi.coords());
    }

    let s = EgoStatus::new(0.0, 4.18, 0.05, 0.93, DrivingCommand::TurnLeft).map_err(|e| e.to_string())?;
    let sentence = encode_ego_status(&s);
    let want = "Given the ego status: lateral velocity is 0 cm/s; longitudinal velocity is 418 cm/s; \
                lateral acceleration is 5 cm/s^2; longitudinal acceleration is 93 cm/s^2; \
                The ego car will TURN LEFT. Output planning results.";
    ensure!(sentence == want, "ego sentence {sentence:?}");
    Ok(format!("200 strings ({tags_seen} tags) round-trip; box corners exact; ego sentence matches"))
}

// -------------------------------------------------------------- mask ----

pub fn mask_determinism() -> Outcome {
    let mut r = rng("mask");
    let views: Vec<Matrix> = (0..3).map(|_| uniform(r.random_range(20..=60), 8, &mut r)).collect();
    let fs = ViewFeatureSet::new(views).unwrap();
    let candidates: Vec<Vec<usize>> = fs
        .token_counts()
        .iter()
        .map(|&n| {
            let mut c: Vec<usize> = (0..n).collect();
            c.shuffle(&mut r);
            c.truncate(r.random_range(0..=n));
            c
        })
        .collect();

    for rate in 0..=100 {
        let spec = MaskSpec { candidates: candidates.clone(), rate, mode: MaskMode::Mask, seed: 7 };
        let masked = apply_token_mask(&fs, &spec).map_err(|e| e.to_string())?;
        for (v, (rows, cands)) in mask_indices(&spec).iter().zip(&candidates).enumerate() {
            let want = rate as usize * cands.len() / 100;
            ensure!(rows.len() == want, "rate {rate} view {v}: {} rows masked, want {want}", rows.len());
            ensure!(rows.iter().all(|i| cands.contains(i)), "rate {rate} view {v}: masked a non-candidate");
            let (orig, out) = (&fs.views()[v], &masked.views()[v]);
            for i in 0..orig.rows() {
                let zeroed = out.row(i).iter().all(|x| *x == 0.0);
                let same = out.row(i).iter().zip(orig.row(i)).all(|(a, b)| a.to_bits() == b.to_bits());
                ensure!(if rows.contains(&i) { zeroed } else { same }, "rate {rate} view {v} row {i} wrong");
            }
        }
    }

    let run = || {
        let cfg = MaskExperimentConfig { rates: vec![0, 10, 30, 50], blind: true, seed: 3, stage: MaskStage::Pre };
        run_mask_experiment(&cfg, &fs, &candidates, None, |f| {
            let digest = features_digest(f);
            let byte = u8::from_str_radix(&digest[..2], 16).unwrap();
            Ok(MaskMetrics { mae: byte as f64, acc: 0.0, map: 0.0, bleu: 0.0 })
        })
        .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure!(a.to_csv() == b.to_csv(), "CSV differs between runs");
    let zero = a.rows.iter().find(|row| row.rate == Some(0)).ok_or("no rate-0 row")?;
    ensure!(zero.input_digest == a.baseline_digest, "rate-0 input differs from baseline");
    ensure!(zero.input_digest == features_digest(&fs), "baseline digest is not the input's");
    Ok("rate 0 bit-identical; masked counts exact for rates 0..=100; CSV reproducible".into())
}
