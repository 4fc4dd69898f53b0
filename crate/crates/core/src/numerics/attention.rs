use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{dot, matmul_raw, softmax_in_place};
use super::{Matrix, NumericsError};

/// Projection weights of one cross-attention layer, all `D×D`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttnLayer {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
}

impl AttnLayer {
    pub fn identity(d: usize) -> Self {
        Self {
            wq: Matrix::identity(d),
            wk: Matrix::identity(d),
            wv: Matrix::identity(d),
            wo: Matrix::identity(d),
        }
    }

    fn dim(&self) -> usize {
        self.wq.rows()
    }
}

/// A stack of cross-attention layers.
///
/// Layer `i`'s output is the query of layer `i + 1`; keys and values stay the
/// original inputs for every layer. Residual connections are off unless
/// `residual` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossAttnParams {
    layers: Vec<AttnLayer>,
    num_heads: usize,
    residual: bool,
}

pub const DEFAULT_ATTN_LAYERS: usize = 2;

impl CrossAttnParams {
    pub fn new(layers: Vec<AttnLayer>, num_heads: usize) -> Result<Self, NumericsError> {
        let d = layers
            .first()
            .map(AttnLayer::dim)
            .ok_or_else(|| NumericsError::Params("cross-attention needs at least one layer".into()))?;
        if num_heads == 0 || d % num_heads != 0 {
            return Err(NumericsError::Params(format!(
                "hidden size {d} not divisible by {num_heads} heads"
            )));
        }
        for (i, l) in layers.iter().enumerate() {
            for (name, w) in [("wq", &l.wq), ("wk", &l.wk), ("wv", &l.wv), ("wo", &l.wo)] {
                if w.shape() != (d, d) {
                    return Err(NumericsError::Params(format!(
                        "layer {i} {name} has shape {:?}, expected ({d}, {d})",
                        w.shape()
                    )));
                }
            }
        }
        Ok(Self {
            layers,
            num_heads,
            residual: false,
        })
    }

    /// `n_layers` identity layers, one head.
    pub fn identity(d: usize, n_layers: usize) -> Self {
        Self::new((0..n_layers).map(|_| AttnLayer::identity(d)).collect(), 1)
            .expect("identity parameters are well formed")
    }

    /// Deterministic uniform init with variance `1/d`, from a ChaCha8 stream.
    pub fn seeded(d: usize, n_layers: usize, num_heads: usize, seed: u64) -> Result<Self, NumericsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = (3.0 / d as f64).sqrt();
        let mut w = || {
            Matrix::from_parts(d, d, (0..d * d).map(|_| rng.random_range(-bound..bound)).collect())
        };
        let layers = (0..n_layers)
            .map(|_| AttnLayer {
                wq: w(),
                wk: w(),
                wv: w(),
                wo: w(),
            })
            .collect();
        Self::new(layers, num_heads)
    }

    pub fn with_residual(mut self, residual: bool) -> Self {
        self.residual = residual;
        self
    }

    pub fn layers(&self) -> &[AttnLayer] {
        &self.layers
    }

    pub fn num_heads(&self) -> usize {
        self.num_heads
    }

    pub fn residual(&self) -> bool {
        self.residual
    }

    pub fn dim(&self) -> usize {
        self.layers[0].dim()
    }

    pub fn head_dim(&self) -> usize {
        self.dim() / self.num_heads
    }
}

struct LayerTrace {
    input: Matrix,
    qp: Matrix,
    kp: Matrix,
    vp: Matrix,
    /// Attention weights, one `nq × nk` matrix per head.
    weights: Vec<Matrix>,
    mixed: Matrix,
}

fn check_inputs(q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams) -> Result<(), NumericsError> {
    let d = p.dim();
    for (name, m) in [("query", q), ("key", k), ("value", v)] {
        if m.cols() != d {
            return Err(NumericsError::Shape {
                op: match name {
                    "query" => "cross_attention(query)",
                    "key" => "cross_attention(key)",
                    _ => "cross_attention(value)",
                },
                left: m.shape(),
                right: (d, d),
            });
        }
    }
    if k.rows() != v.rows() {
        return Err(NumericsError::Shape {
            op: "cross_attention(key/value rows)",
            left: k.shape(),
            right: v.shape(),
        });
    }
    Ok(())
}

fn forward_layer(cur: &Matrix, k: &Matrix, v: &Matrix, layer: &AttnLayer, heads: usize, residual: bool) -> Result<(Matrix, LayerTrace), NumericsError> {
    let d = layer.dim();
    let hd = d / heads;
    let scale = 1.0 / (hd as f64).sqrt();
    let (nq, nk) = (cur.rows(), k.rows());
    let qp = Matrix::new(nq, d, matmul_raw(cur, &layer.wq))?;
    let kp = Matrix::new(nk, d, matmul_raw(k, &layer.wk))?;
    let vp = Matrix::new(nk, d, matmul_raw(v, &layer.wv))?;
    let mut mixed = vec![0.0; nq * d];
    let mut weights = Vec::with_capacity(heads);
    for h in 0..heads {
        let cols = h * hd..(h + 1) * hd;
        let mut a = vec![0.0; nq * nk];
        for i in 0..nq {
            let qi = &qp.row(i)[cols.clone()];
            let arow = &mut a[i * nk..(i + 1) * nk];
            for (j, s) in arow.iter_mut().enumerate() {
                *s = dot(qi, &kp.row(j)[cols.clone()]) * scale;
            }
            softmax_in_place(arow);
            let orow = &mut mixed[i * d + h * hd..i * d + (h + 1) * hd];
            for (j, &w) in arow.iter().enumerate() {
                for (o, &val) in orow.iter_mut().zip(&vp.row(j)[cols.clone()]) {
                    *o += w * val;
                }
            }
        }
        weights.push(Matrix::new(nq, nk, a)?);
    }
    let mixed = Matrix::new(nq, d, mixed)?;
    let mut out = matmul_raw(&mixed, &layer.wo);
    if residual {
        for (o, c) in out.iter_mut().zip(cur.data()) {
            *o += c;
        }
    }
    let out = Matrix::new(nq, d, out)?;
    Ok((
        out,
        LayerTrace {
            input: cur.clone(),
            qp,
            kp,
            vp,
            weights,
            mixed,
        },
    ))
}

fn forward_trace(q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams) -> Result<(Matrix, Vec<LayerTrace>), NumericsError> {
    check_inputs(q, k, v, p)?;
    let mut cur = q.clone();
    let mut traces = Vec::with_capacity(p.layers.len());
    for layer in &p.layers {
        let (out, trace) = forward_layer(&cur, k, v, layer, p.num_heads, p.residual)?;
        traces.push(trace);
        cur = out;
    }
    Ok((cur, traces))
}

/// Scaled dot-product cross-attention, applied layer by layer.
///
/// Per layer and head: `softmax((q·Wq)(k·Wk)ᵀ / sqrt(D/heads)) · (v·Wv)`, heads
/// concatenated, then `· Wo`. The output has `q.rows()` rows and `D` columns.
pub fn cross_attention(q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams) -> Result<Matrix, NumericsError> {
    forward_trace(q, k, v, p).map(|(out, _)| out)
}

/// Attention weights of the first layer, one matrix per head.
pub fn attention_weights(q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams) -> Result<Vec<Matrix>, NumericsError> {
    check_inputs(q, k, v, p)?;
    let (_, trace) = forward_layer(q, k, v, &p.layers[0], p.num_heads, p.residual)?;
    Ok(trace.weights)
}

#[derive(Clone, Debug)]
pub struct AttnLayerGrads {
    pub dwq: Matrix,
    pub dwk: Matrix,
    pub dwv: Matrix,
    pub dwo: Matrix,
}

#[derive(Clone, Debug)]
pub struct CrossAttnGrads {
    pub dq: Matrix,
    pub dk: Matrix,
    pub dv: Matrix,
    pub layers: Vec<AttnLayerGrads>,
}

/// Analytic backward pass of [`cross_attention`] given `grad_out = ∂L/∂out`.
pub fn cross_attention_backward(q: &Matrix, k: &Matrix, v: &Matrix, p: &CrossAttnParams, grad_out: &Matrix) -> Result<CrossAttnGrads, NumericsError> {
    let (out, traces) = forward_trace(q, k, v, p)?;
    if grad_out.shape() != out.shape() {
        return Err(NumericsError::Shape {
            op: "cross_attention_backward",
            left: grad_out.shape(),
            right: out.shape(),
        });
    }
    let d = p.dim();
    let hd = p.head_dim();
    let scale = 1.0 / (hd as f64).sqrt();
    let (nk, nq) = (k.rows(), q.rows());
    let mut dk = vec![0.0; nk * d];
    let mut dv = vec![0.0; nk * d];
    let mut layer_grads = Vec::with_capacity(traces.len());
    let mut upstream = grad_out.clone();

    for (layer, t) in p.layers.iter().zip(&traces).rev() {
        let dwo = Matrix::new(d, d, matmul_raw(&t.mixed.transpose(), &upstream))?;
        let dmixed = Matrix::new(nq, d, matmul_raw(&upstream, &layer.wo.transpose()))?;
        let mut dqp = vec![0.0; nq * d];
        let mut dkp = vec![0.0; nk * d];
        let mut dvp = vec![0.0; nk * d];
        for (h, a) in t.weights.iter().enumerate() {
            let cols = h * hd..(h + 1) * hd;
            for i in 0..nq {
                let dm = &dmixed.row(i)[cols.clone()];
                let arow = a.row(i);
                let da: Vec<f64> = (0..nk).map(|j| dot(dm, &t.vp.row(j)[cols.clone()])).collect();
                let centre: f64 = da.iter().zip(arow).map(|(x, y)| x * y).sum();
                for j in 0..nk {
                    for (c, &g) in cols.clone().zip(dm) {
                        dvp[j * d + c] += arow[j] * g;
                    }
                    let ds = arow[j] * (da[j] - centre) * scale;
                    if ds == 0.0 {
                        continue;
                    }
                    for c in cols.clone() {
                        dqp[i * d + c] += ds * t.kp.get(j, c);
                        dkp[j * d + c] += ds * t.qp.get(i, c);
                    }
                }
            }
        }
        let dqp = Matrix::new(nq, d, dqp)?;
        let dkp = Matrix::new(nk, d, dkp)?;
        let dvp = Matrix::new(nk, d, dvp)?;
        let dwq = Matrix::new(d, d, matmul_raw(&t.input.transpose(), &dqp))?;
        let dwk = Matrix::new(d, d, matmul_raw(&k.transpose(), &dkp))?;
        let dwv = Matrix::new(d, d, matmul_raw(&v.transpose(), &dvp))?;
        for (acc, g) in dk.iter_mut().zip(matmul_raw(&dkp, &layer.wk.transpose())) {
            *acc += g;
        }
        for (acc, g) in dv.iter_mut().zip(matmul_raw(&dvp, &layer.wv.transpose())) {
            *acc += g;
        }
        let mut dinput = matmul_raw(&dqp, &layer.wq.transpose());
        if p.residual {
            for (x, g) in dinput.iter_mut().zip(upstream.data()) {
                *x += g;
            }
        }
        upstream = Matrix::new(nq, d, dinput)?;
        layer_grads.push(AttnLayerGrads { dwq, dwk, dwv, dwo });
    }
    layer_grads.reverse();
    Ok(CrossAttnGrads {
        dq: upstream,
        dk: Matrix::new(nk, d, dk)?,
        dv: Matrix::new(nk, d, dv)?,
        layers: layer_grads,
    })
}
