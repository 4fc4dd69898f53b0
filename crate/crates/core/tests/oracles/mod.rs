//! Slow, obviously-correct reference implementations used to cross-check the
//! library. Nothing here calls into `fusekit_core` algorithms; n-grams are
//! plain vectors scanned linearly and every count is redone from scratch.
#![allow(dead_code)]

use fusekit_core::Matrix;

// ---------------------------------------------------------------- text ----

/// Lowercase, then pad every punctuation character with spaces and split.
pub fn words(text: &str) -> Vec<String> {
    let mut padded = String::new();
    for ch in text.to_lowercase().chars() {
        if ch.is_alphanumeric() {
            padded.push(ch);
        } else if ch.is_whitespace() {
            padded.push(' ');
        } else {
            padded.push(' ');
            padded.push(ch);
            padded.push(' ');
        }
    }
    padded.split_whitespace().map(str::to_string).collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= tokens.len() {
        out.push(tokens[i..i + n].to_vec());
        i += 1;
    }
    out
}

fn occurrences(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

/// Each distinct element once, in first-seen order.
fn distinct(list: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

/// A corpus as `(candidate, references)` pairs.
pub type Corpus = Vec<(String, Vec<String>)>;

pub fn bleu(corpus: &Corpus, max_n: usize) -> f64 {
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let mut c_len = 0;
    let mut r_len = 0;
    for (cand, refs) in corpus {
        let c = words(cand);
        let rs: Vec<Vec<String>> = refs.iter().map(|r| words(r)).collect();
        c_len += c.len();
        // Closest reference length; on a tie the shorter one.
        let mut best = rs[0].len();
        for r in &rs {
            let (d, bd) = (r.len().abs_diff(c.len()), best.abs_diff(c.len()));
            if d < bd || (d == bd && r.len() < best) {
                best = r.len();
            }
        }
        r_len += best;
        for n in 1..=max_n {
            let cg = grams(&c, n);
            total[n - 1] += cg.len();
            for g in distinct(&cg) {
                let mut ref_max = 0;
                for r in &rs {
                    ref_max = ref_max.max(occurrences(&grams(r, n), &g));
                }
                matched[n - 1] += occurrences(&cg, &g).min(ref_max);
            }
        }
    }
    if c_len == 0 || matched[0] == 0 {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 0..max_n {
        let p = if matched[n] == 0 { 1e-9 } else { matched[n] as f64 / total[n] as f64 };
        product *= p;
    }
    let bp = if c_len > r_len { 1.0 } else { (1.0 - r_len as f64 / c_len as f64).exp() };
    100.0 * bp * product.powf(1.0 / max_n as f64)
}

/// Whether `needle` can be obtained from `hay` by deleting elements.
fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// Longest common subsequence by trying every subsequence of `a`.
/// Exponential; keep `a` to a dozen tokens or so.
pub fn lcs_brute(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "brute-force LCS is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let pick: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        if is_subsequence(&pick, b) {
            best = size;
        }
    }
    best
}

pub fn rouge_l(corpus: &Corpus) -> f64 {
    let beta2 = 1.2f64 * 1.2;
    let mut sum = 0.0;
    for (cand, refs) in corpus {
        let c = words(cand);
        let mut best = 0.0f64;
        for r in refs {
            let r = words(r);
            let l = lcs_brute(&c, &r) as f64;
            if l == 0.0 {
                continue;
            }
            let (p, rec) = (l / c.len() as f64, l / r.len() as f64);
            best = best.max((1.0 + beta2) * p * rec / (rec + beta2 * p));
        }
        sum += best;
    }
    100.0 * sum / corpus.len() as f64
}

/// Plain CIDEr with raw term frequencies and natural-log IDF over pairs.
pub fn cider(corpus: &Corpus) -> f64 {
    let cands: Vec<Vec<String>> = corpus.iter().map(|(c, _)| words(c)).collect();
    let refs: Vec<Vec<Vec<String>>> = corpus.iter().map(|(_, rs)| rs.iter().map(|r| words(r)).collect()).collect();
    let n_docs = corpus.len() as f64;
    let mut per_pair = vec![0.0; corpus.len()];
    for n in 1..=4 {
        let doc_freq = |g: &[String]| {
            refs.iter().filter(|doc| doc.iter().any(|r| occurrences(&grams(r, n), g) > 0)).count()
        };
        let vector = |tokens: &[String]| -> Vec<(Vec<String>, f64)> {
            let gs = grams(tokens, n);
            distinct(&gs)
                .into_iter()
                .map(|g| {
                    let idf = (n_docs / doc_freq(&g).max(1) as f64).ln();
                    let w = occurrences(&gs, &g) as f64 * idf;
                    (g, w)
                })
                .collect()
        };
        for (i, cand) in cands.iter().enumerate() {
            let cv = vector(cand);
            let mut s = 0.0;
            for r in &refs[i] {
                let rv = vector(r);
                let na: f64 = cv.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                let nb: f64 = rv.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                if na > 0.0 && nb > 0.0 {
                    let mut dot = 0.0;
                    for (g, w) in &cv {
                        for (h, v) in &rv {
                            if g == h {
                                dot += w * v;
                            }
                        }
                    }
                    s += dot / (na * nb);
                }
            }
            per_pair[i] += s / refs[i].len() as f64;
        }
    }
    100.0 * per_pair.iter().map(|s| s / 4.0).sum::<f64>() / n_docs
}

// --------------------------------------------------------------- boxes ----

/// IoU on the inclusive integer grid by visiting every cell of the union's
/// bounding rectangle.
pub fn iou_cells(a: [i64; 4], b: [i64; 4]) -> f64 {
    let inside = |bx: [i64; 4], x: i64, y: i64| bx[0] <= x && x <= bx[2] && bx[1] <= y && y <= bx[3];
    let (mut both, mut either) = (0u64, 0u64);
    for x in a[0].min(b[0])..=a[2].max(b[2]) {
        for y in a[1].min(b[1])..=a[3].max(b[3]) {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            both += (ia && ib) as u64;
            either += (ia || ib) as u64;
        }
    }
    both as f64 / either as f64
}

/// One detection in a matching instance.
#[derive(Clone, Debug)]
pub struct Det {
    pub image: usize,
    pub index: usize,
    pub score: f64,
    pub bbox: [i64; 4],
}

/// The greedy rule expressed as an optimisation: among every injective
/// assignment whose matches reach `threshold`, take the one maximising, in
/// visiting order, each detection's `(IoU, −gt index)` (unmatched ranks
/// below any match). Found by enumerating all assignments.
///
/// `gts[image]` lists the boxes of the evaluated class; the result gives the
/// visiting order and each detection's matched ground-truth index.
/// Best key seen so far and the assignment that produced it.
type Best = (Vec<(f64, i64)>, Vec<Option<usize>>);

pub fn exhaustive_matches(dets: &[Det], gts: &[Vec<[i64; 4]>], threshold: f64) -> Vec<(usize, usize, Option<usize>)> {
    let mut order: Vec<&Det> = dets.iter().collect();
    // Stable: equal scores keep input order.
    order.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());

    fn key(order: &[&Det], gts: &[Vec<[i64; 4]>], assign: &[Option<usize>]) -> Vec<(f64, i64)> {
        order
            .iter()
            .zip(assign)
            .map(|(d, m)| match m {
                Some(j) => (iou_cells(d.bbox, gts[d.image][*j]), -(*j as i64)),
                None => (-1.0, 0),
            })
            .collect()
    }

    fn search(
        i: usize,
        order: &[&Det],
        gts: &[Vec<[i64; 4]>],
        threshold: f64,
        used: &mut Vec<Vec<bool>>,
        assign: &mut Vec<Option<usize>>,
        best: &mut Option<Best>,
    ) {
        if i == order.len() {
            let k = key(order, gts, assign);
            let better = match best {
                None => true,
                Some((bk, _)) => k.partial_cmp(bk) == Some(std::cmp::Ordering::Greater),
            };
            if better {
                *best = Some((k, assign.clone()));
            }
            return;
        }
        let d = order[i];
        assign.push(None);
        search(i + 1, order, gts, threshold, used, assign, best);
        assign.pop();
        for j in 0..gts[d.image].len() {
            if used[d.image][j] || iou_cells(d.bbox, gts[d.image][j]) < threshold {
                continue;
            }
            used[d.image][j] = true;
            assign.push(Some(j));
            search(i + 1, order, gts, threshold, used, assign, best);
            assign.pop();
            used[d.image][j] = false;
        }
    }

    let mut used: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let mut best = None;
    search(0, &order, gts, threshold, &mut used, &mut Vec::new(), &mut best);
    let (_, assign) = best.expect("the empty assignment always exists");
    order.iter().zip(assign).map(|(d, m)| (d.image, d.index, m)).collect()
}

/// All-point AP from match flags in visiting order: the area under the
/// precision envelope, one recall step per true positive.
pub fn average_precision(hits: &[bool], npos: usize) -> f64 {
    let mut precisions = Vec::new();
    let mut tp = 0;
    for (i, h) in hits.iter().enumerate() {
        tp += *h as usize;
        precisions.push(tp as f64 / (i + 1) as f64);
    }
    let mut area = 0.0;
    for (i, h) in hits.iter().enumerate() {
        if *h {
            let envelope = precisions[i..].iter().copied().fold(0.0, f64::max);
            area += envelope;
        }
    }
    area / npos as f64
}

// ------------------------------------------------------------ geometry ----

pub type Pt = [f64; 2];

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Corners of a rectangle, counter-clockwise.
pub fn rect_corners(cx: f64, cy: f64, length: f64, width: f64, heading: f64) -> [Pt; 4] {
    let (ux, uy) = (heading.cos() * length / 2.0, heading.sin() * length / 2.0);
    let (vx, vy) = (-heading.sin() * width / 2.0, heading.cos() * width / 2.0);
    [
        [cx + ux + vx, cy + uy + vy],
        [cx - ux + vx, cy - uy + vy],
        [cx - ux - vx, cy - uy - vy],
        [cx + ux - vx, cy + uy - vy],
    ]
}

/// Sutherland–Hodgman: clip `subject` by the convex counter-clockwise `clip`.
pub fn clip_polygon(subject: &[Pt], clip: &[Pt]) -> Vec<Pt> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        if input.is_empty() {
            break;
        }
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (cross(a, b, p), cross(a, b, q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

pub fn polygon_area(poly: &[Pt]) -> f64 {
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}

/// L2 at 1 s, 2 s and 3 s for six waypoints every 0.5 s, either at the
/// horizon waypoint or averaged over every waypoint up to it.
pub fn l2_horizons(pred: &[Pt], gt: &[Pt], cumulative: bool) -> [f64; 3] {
    let dist = |i: usize| ((pred[i][0] - gt[i][0]).powi(2) + (pred[i][1] - gt[i][1]).powi(2)).sqrt();
    let mut out = [0.0; 3];
    for (h, slot) in out.iter_mut().enumerate() {
        let last = 2 * (h + 1) - 1;
        *slot = if cumulative {
            (0..=last).map(dist).sum::<f64>() / (last + 1) as f64
        } else {
            dist(last)
        };
    }
    out
}

// ------------------------------------------------------------ numerics ----

/// Indices of the `k` largest scores: full sort by descending score, then
/// ascending index.
pub fn topk_full_sort(scores: &[f64], k: usize) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize)> = scores.iter().copied().zip(0..).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    pairs.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Central differences of a scalar function over every entry of `x`.
pub fn numeric_grad(f: impl Fn(&Matrix) -> f64, x: &Matrix, eps: f64) -> Matrix {
    let mut data = x.data().to_vec();
    let mut grad = vec![0.0; data.len()];
    for i in 0..data.len() {
        let orig = data[i];
        data[i] = orig + eps;
        let up = f(&Matrix::new(x.rows(), x.cols(), data.clone()).unwrap());
        data[i] = orig - eps;
        let down = f(&Matrix::new(x.rows(), x.cols(), data.clone()).unwrap());
        data[i] = orig;
        grad[i] = (up - down) / (2.0 * eps);
    }
    Matrix::new(x.rows(), x.cols(), grad).unwrap()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
    let scale = sq(a.data()).max(sq(b.data()));
    if scale == 0.0 {
        0.0
    } else {
        sq(&diff) / scale
    }
}
