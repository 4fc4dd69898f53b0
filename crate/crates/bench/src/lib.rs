//! Seeded workloads shared by the benches.

use fusekit_core::driving::{Detection, GroundTruthBox, ImageDetections, ImageGroundTruth, NormalizedBox, GRID_MAX};
use fusekit_core::interactor::{BevFeatureMap, InstructionEmbedding, ViewFeatureSet};
use fusekit_core::metrics::EvalPair;
use fusekit_core::Matrix;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rows: usize, cols: usize, r: &mut impl Rng) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| r.random_range(-1.0..=1.0)).collect()).expect("shape matches")
}

/// Six camera views of `view_tokens` tokens, a BEV map of `bev_tokens` and
/// a short instruction, all of width `d`.
pub fn desk_inputs(
    view_tokens: usize,
    bev_tokens: usize,
    d: usize,
    seed: u64,
) -> (ViewFeatureSet, BevFeatureMap, InstructionEmbedding) {
    let mut r = rng(seed);
    let views = (0..6).map(|_| uniform(view_tokens, d, &mut r)).collect();
    let views = ViewFeatureSet::new(views).expect("six views");
    let bev = BevFeatureMap::flat(uniform(bev_tokens, d, &mut r));
    let inst = InstructionEmbedding::new(uniform(8, d, &mut r));
    (views, bev, inst)
}

const WORDS: &[&str] = &[
    "the", "car", "pedestrian", "is", "crossing", "ahead", "left", "right", "slowly", "stop", "yield", "truck",
    "lane", "of", "on", "to", "a", "traffic", "light", "red", "green", "turn",
];

fn sentence(r: &mut impl Rng) -> String {
    let n = r.random_range(6..=18);
    (0..n).map(|_| *WORDS.choose(r).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

/// `n` caption pairs with three references each.
pub fn caption_corpus(n: usize, seed: u64) -> Vec<EvalPair> {
    let mut r = rng(seed);
    (0..n).map(|i| EvalPair::new(format!("s{i}"), sentence(&mut r), (0..3).map(|_| sentence(&mut r)).collect())).collect()
}

fn random_box(r: &mut impl Rng) -> NormalizedBox {
    let x1 = r.random_range(0..GRID_MAX - 10);
    let y1 = r.random_range(0..GRID_MAX - 10);
    let x2 = r.random_range(x1 + 1..=(x1 + 200).min(GRID_MAX));
    let y2 = r.random_range(y1 + 1..=(y1 + 200).min(GRID_MAX));
    NormalizedBox::new(x1, y1, x2, y2).expect("ordered corners")
}

/// `images` images with up to eight objects over four classes; predictions
/// jitter each ground-truth box and add a few false positives.
pub fn detection_set(images: usize, seed: u64) -> (Vec<ImageDetections>, Vec<ImageGroundTruth>) {
    const LABELS: &[&str] = &["car", "pedestrian", "truck", "cyclist"];
    let mut r = rng(seed);
    let mut preds = Vec::with_capacity(images);
    let mut gts = Vec::with_capacity(images);
    for i in 0..images {
        let id = format!("img{i}");
        let boxes: Vec<GroundTruthBox> = (0..r.random_range(1..=8))
            .map(|_| GroundTruthBox { bbox: random_box(&mut r), label: LABELS.choose(&mut r).expect("labels").to_string() })
            .collect();
        let mut detections: Vec<Detection> = boxes
            .iter()
            .map(|g| {
                let [x1, y1, x2, y2] = g.bbox.coords().map(|c| (c + r.random_range(-8..=8)).clamp(0, GRID_MAX));
                let bbox = NormalizedBox::new(x1.min(x2), y1.min(y2), x1.max(x2), y1.max(y2)).expect("ordered corners");
                Detection { bbox, score: r.random(), label: g.label.clone() }
            })
            .collect();
        for _ in 0..r.random_range(0..=3) {
            let label = LABELS.choose(&mut r).expect("labels").to_string();
            detections.push(Detection { bbox: random_box(&mut r), score: r.random(), label });
        }
        preds.push(ImageDetections { id: id.clone(), detections });
        gts.push(ImageGroundTruth { id, boxes });
    }
    (preds, gts)
}
