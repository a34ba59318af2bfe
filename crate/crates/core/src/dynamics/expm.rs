//! Matrix exponential by scaling and squaring of a Taylor series.

use nalgebra::DMatrix;

/// Relative truncation threshold for the Taylor series.
pub const DEFAULT_EXPM_TOL: f64 = 1e-12;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn is_metzler(a: &DMatrix<f64>) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] >= 0.0))
}

/// Shift `c >= 0` with `a + cI` nonnegative, when `a` is Metzler. The series
/// of a nonnegative matrix has no cancellation.
fn metzler_shift(a: &DMatrix<f64>) -> f64 {
    if !is_metzler(a) {
        return 0.0;
    }
    (0..a.nrows()).map(|i| -a[(i, i)]).fold(0.0, f64::max)
}

/// Taylor series of `exp(m)` for `||m||_1 <= 1/2`, summed until the next term
/// is below `tol` relative to the partial sum.
fn taylor(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..64 {
        term = &term * m / k as f64;
        sum += &term;
        if one_norm(&term) <= tol * 1e-4 * one_norm(&sum) {
            break;
        }
    }
    sum
}

/// Squarings needed to bring `a` to 1-norm at most 1/2, and the scaled matrix.
fn scale(a: &DMatrix<f64>) -> (u32, DMatrix<f64>) {
    let norm = one_norm(a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    (s, a / 2f64.powi(s as i32))
}

/// `exp(a)`.
pub fn expm(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let shift = metzler_shift(a);
    let n = a.nrows();
    let shifted = a + DMatrix::identity(n, n) * shift;
    let (s, m) = scale(&shifted);
    let mut e = taylor(&m, tol);
    for _ in 0..s {
        e = &e * &e;
    }
    e * (-shift).exp()
}

/// `exp(a)` up to a positive factor, renormalised to unit max entry after
/// every squaring so that large `a` do not overflow. Enough for the
/// projective action `x -> exp(a) x / sum`.
pub fn expm_projective(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let shift = metzler_shift(a);
    let n = a.nrows();
    let shifted = a + DMatrix::identity(n, n) * shift;
    let (s, m) = scale(&shifted);
    let mut e = taylor(&m, tol);
    for _ in 0..s {
        e = &e * &e;
        normalize_max(&mut e);
    }
    normalize_max(&mut e);
    e
}

/// Divides by the largest absolute entry.
pub(crate) fn normalize_max(m: &mut DMatrix<f64>) {
    let max = m.amax();
    if max > 0.0 && max.is_finite() {
        *m /= max;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nilpotent_closed_form() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        for t in [0.0, 0.37, 1.0, 25.0, 1000.0] {
            let e = expm(&(&a * t), DEFAULT_EXPM_TOL);
            let expected = DMatrix::from_row_slice(2, 2, &[1.0, t, 0.0, 1.0]);
            assert!((e - expected).amax() <= 1e-12 * (1.0 + t), "t = {t}");
        }
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = DMatrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 2.0]);
        let e = expm(&d, DEFAULT_EXPM_TOL);
        assert_abs_diff_eq!(e[(0, 0)], (-3f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)] / 2f64.exp(), 1.0, epsilon = 1e-12);
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = expm(&r, DEFAULT_EXPM_TOL);
        assert_abs_diff_eq!(e[(0, 0)], 1f64.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(1, 0)], 1f64.sin(), epsilon = 1e-13);
    }

    #[test]
    fn metzler_generator_two_state() {
        // exp(t [[-1, 1], [1, -1]]) = 1/2 [[1 + e, 1 - e], [1 - e, 1 + e]], e = exp(-2t).
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let t = 3.0;
        let e = expm(&(&a * t), DEFAULT_EXPM_TOL);
        let x = (-2.0 * t).exp();
        assert_abs_diff_eq!(e[(0, 0)], 0.5 * (1.0 + x), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(0, 1)], 0.5 * (1.0 - x), epsilon = 1e-13);
    }

    #[test]
    fn projective_matches_up_to_scale() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 1.0, 0.0, 0.2, -1.0, 0.3, 0.0, 0.4, 0.1]);
        let e = expm(&a, DEFAULT_EXPM_TOL);
        let p = expm_projective(&a, DEFAULT_EXPM_TOL);
        let ratio = e[(0, 0)] / p[(0, 0)];
        assert!((e - p * ratio).amax() < 1e-12);
        let big = expm_projective(&(&a * 1e4), DEFAULT_EXPM_TOL);
        assert!(big.iter().all(|v| v.is_finite()));
    }
}
