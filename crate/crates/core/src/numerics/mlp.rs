use super::ops::matmul_raw;
use super::{Matrix, NumericsError};

/// Two-layer perceptron `relu(x·W1 + b1)·W2 + b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
}

impl MlpParams {
    pub fn new(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>) -> Result<Self, NumericsError> {
        if b1.len() != w1.cols() || w2.rows() != w1.cols() || b2.len() != w2.cols() {
            return Err(NumericsError::Params(format!(
                "inconsistent MLP chain: W1 {:?}, b1 {}, W2 {:?}, b2 {}",
                w1.shape(),
                b1.len(),
                w2.shape(),
                b2.len()
            )));
        }
        if b1.iter().chain(&b2).any(|v| !v.is_finite()) {
            return Err(NumericsError::Params("non-finite bias".into()));
        }
        Ok(Self { w1, b1, w2, b2 })
    }

    /// Identity weights with zero biases: passes nonnegative inputs through.
    pub fn identity(d: usize) -> Self {
        Self {
            w1: Matrix::identity(d),
            b1: vec![0.0; d],
            w2: Matrix::identity(d),
            b2: vec![0.0; d],
        }
    }

    pub fn d_in(&self) -> usize {
        self.w1.rows()
    }

    pub fn d_hidden(&self) -> usize {
        self.w1.cols()
    }

    pub fn d_out(&self) -> usize {
        self.w2.cols()
    }

    pub fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &Matrix {
        &self.w2
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }
}

/// Gradients of a scalar loss with respect to the MLP input and parameters.
#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub dx: Matrix,
    pub dw1: Matrix,
    pub db1: Vec<f64>,
    pub dw2: Matrix,
    pub db2: Vec<f64>,
}

fn add_bias(data: &mut [f64], cols: usize, bias: &[f64]) {
    for row in data.chunks_exact_mut(cols) {
        for (v, b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

struct MlpTrace {
    pre: Matrix,
    hidden: Matrix,
    out: Matrix,
}

fn forward_trace(x: &Matrix, p: &MlpParams) -> Result<MlpTrace, NumericsError> {
    if x.cols() != p.d_in() {
        return Err(NumericsError::Shape {
            op: "mlp_forward",
            left: x.shape(),
            right: p.w1.shape(),
        });
    }
    let mut pre = matmul_raw(x, &p.w1);
    add_bias(&mut pre, p.d_hidden(), &p.b1);
    let hidden: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
    let pre = Matrix::new(x.rows(), p.d_hidden(), pre)?;
    let hidden = Matrix::from_parts(x.rows(), p.d_hidden(), hidden);
    let mut out = matmul_raw(&hidden, &p.w2);
    add_bias(&mut out, p.d_out(), &p.b2);
    let out = Matrix::new(x.rows(), p.d_out(), out)?;
    Ok(MlpTrace { pre, hidden, out })
}

pub fn mlp_forward(x: &Matrix, p: &MlpParams) -> Result<Matrix, NumericsError> {
    forward_trace(x, p).map(|t| t.out)
}

/// Backward pass given `grad_out = ∂L/∂y`.
pub fn mlp_backward(x: &Matrix, p: &MlpParams, grad_out: &Matrix) -> Result<MlpGrads, NumericsError> {
    let trace = forward_trace(x, p)?;
    if grad_out.shape() != trace.out.shape() {
        return Err(NumericsError::Shape {
            op: "mlp_backward",
            left: grad_out.shape(),
            right: trace.out.shape(),
        });
    }
    let dw2 = Matrix::new(p.d_hidden(), p.d_out(), matmul_raw(&trace.hidden.transpose(), grad_out))?;
    let db2 = column_sums(grad_out);
    let mut dh = matmul_raw(grad_out, &p.w2.transpose());
    for (g, &z) in dh.iter_mut().zip(trace.pre.data()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
    let dpre = Matrix::new(x.rows(), p.d_hidden(), dh)?;
    let dw1 = Matrix::new(p.d_in(), p.d_hidden(), matmul_raw(&x.transpose(), &dpre))?;
    let db1 = column_sums(&dpre);
    let dx = Matrix::new(x.rows(), p.d_in(), matmul_raw(&dpre, &p.w1.transpose()))?;
    Ok(MlpGrads { dx, dw1, db1, dw2, db2 })
}

fn column_sums(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for row in m.row_iter() {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad, relative_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::new(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn random_params(rng: &mut ChaCha8Rng, i: usize, h: usize, o: usize) -> MlpParams {
        MlpParams::new(
            random(rng, i, h),
            (0..h).map(|_| rng.random_range(-1.0..1.0)).collect(),
            random(rng, h, o),
            (0..o).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn naive_mlp(x: &Matrix, p: &MlpParams) -> Vec<Vec<f64>> {
        (0..x.rows())
            .map(|r| {
                let h: Vec<f64> = (0..p.d_hidden())
                    .map(|j| {
                        let mut s = p.b1[j];
                        for k in 0..p.d_in() {
                            s += x.get(r, k) * p.w1.get(k, j);
                        }
                        if s > 0.0 { s } else { 0.0 }
                    })
                    .collect();
                (0..p.d_out())
                    .map(|j| {
                        let mut s = p.b2[j];
                        for (k, hk) in h.iter().enumerate() {
                            s += hk * p.w2.get(k, j);
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_passes_nonnegative_input() {
        let x = Matrix::from_rows(&[[0.5, 2.0, 0.0]]).unwrap();
        assert_eq!(mlp_forward(&x, &MlpParams::identity(3)).unwrap(), x);
    }

    #[test]
    fn relu_kills_negative() {
        let x = Matrix::from_rows(&[[-1.0]]).unwrap();
        assert_eq!(mlp_forward(&x, &MlpParams::identity(1)).unwrap().data(), &[0.0]);
    }

    #[test]
    fn matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = random_params(&mut rng, 5, 7, 3);
            let x = random(&mut rng, 4, 5);
            let y = mlp_forward(&x, &p).unwrap();
            let want = naive_mlp(&x, &p);
            for (r, row) in want.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    assert!((y.get(r, c) - v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let p = MlpParams::identity(3);
        assert!(mlp_forward(&Matrix::zeros(2, 4), &p).is_err());
        assert!(MlpParams::new(Matrix::zeros(2, 3), vec![0.0; 2], Matrix::zeros(3, 1), vec![0.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = random_params(&mut rng, 4, 6, 3);
        let x = random(&mut rng, 3, 4);
        let w = random(&mut rng, 3, 3);
        let loss = |y: &Matrix| y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum::<f64>();
        let g = mlp_backward(&x, &p, &w).unwrap();
        let fd = finite_diff_grad(|xx| loss(&mlp_forward(xx, &p).unwrap()), &x, 1e-6);
        assert!(relative_error(&g.dx, &fd) < 1e-6);

        let fd_w1 = finite_diff_grad(
            |w1| {
                let q = MlpParams::new(w1.clone(), p.b1.clone(), p.w2.clone(), p.b2.clone()).unwrap();
                loss(&mlp_forward(&x, &q).unwrap())
            },
            &p.w1,
            1e-6,
        );
        assert!(relative_error(&g.dw1, &fd_w1) < 1e-6);
        let fd_w2 = finite_diff_grad(
            |w2| {
                let q = MlpParams::new(p.w1.clone(), p.b1.clone(), w2.clone(), p.b2.clone()).unwrap();
                loss(&mlp_forward(&x, &q).unwrap())
            },
            &p.w2,
            1e-6,
        );
        assert!(relative_error(&g.dw2, &fd_w2) < 1e-6);
    }
}
