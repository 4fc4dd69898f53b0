use super::{Matrix, NumericsError};

/// Matrix product `a · b`.
///
/// Each output entry accumulates `a[i][k] * b[k][j]` in ascending `k`
/// starting from `0.0`, so results are bitwise reproducible against a naive
/// triple loop with the same order.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix, NumericsError> {
    if a.cols() != b.rows() {
        return Err(NumericsError::Shape {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let out = matmul_raw(a, b);
    if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite {
            row: pos / b.cols(),
            col: pos % b.cols(),
        });
    }
    Ok(Matrix::from_parts(a.rows(), b.cols(), out))
}

pub(crate) fn matmul_raw(a: &Matrix, b: &Matrix) -> Vec<f64> {
    let (n, m) = (a.rows(), b.cols());
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let arow = a.row(i);
        let orow = &mut out[i * m..(i + 1) * m];
        for (k, &aik) in arow.iter().enumerate() {
            let brow = b.row(k);
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    out
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-wise softmax with per-row max subtraction.
pub fn softmax_rows(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for r in 0..out.rows() {
        softmax_in_place(out.row_mut(r));
    }
    out
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Cosine of the angle between two vectors; zero when either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): identical vectors then give exactly 1.
    let c = dot(a, b) / (na * nb).sqrt();
    c.clamp(-1.0, 1.0)
}

/// Pairwise cosine similarities between the rows of `a` and the rows of `b`.
pub fn cosine_similarity_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix, NumericsError> {
    if a.cols() != b.cols() {
        return Err(NumericsError::Shape {
            op: "cosine_similarity_matrix",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = Vec::with_capacity(a.rows() * b.rows());
    for ar in a.row_iter() {
        for br in b.row_iter() {
            out.push(cosine(ar, br));
        }
    }
    Ok(Matrix::from_parts(a.rows(), b.rows(), out))
}
