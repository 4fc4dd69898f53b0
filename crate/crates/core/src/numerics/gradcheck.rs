use super::Matrix;

pub const DEFAULT_FD_EPS: f64 = 1e-6;

/// Central-difference gradient of a scalar function of a matrix.
///
/// Entry `(i, j)` is `(f(x + eps·e_ij) − f(x − eps·e_ij)) / (2·eps)`.
pub fn finite_diff_grad(f: impl Fn(&Matrix) -> f64, x: &Matrix, eps: f64) -> Matrix {
    assert!(eps > 0.0, "finite-difference step must be positive");
    let mut probe = x.clone();
    let mut grad = Vec::with_capacity(x.rows() * x.cols());
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let orig = x.get(r, c);
            probe.row_mut(r)[c] = orig + eps;
            let up = f(&probe);
            probe.row_mut(r)[c] = orig - eps;
            let down = f(&probe);
            probe.row_mut(r)[c] = orig;
            grad.push((up - down) / (2.0 * eps));
        }
    }
    Matrix::new(x.rows(), x.cols(), grad).expect("finite differences of a finite function")
}

/// Norm-wise relative error `‖a − b‖ / max(‖a‖, ‖b‖)`; `0` when both vanish.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "relative_error shape mismatch");
    let diff: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
