//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Rank of `m` counting singular values above `rel_tol * sigma_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let sigma_max = sv.max();
    if sigma_max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * sigma_max).count()
}

/// Smallest and largest singular values of `m`.
pub fn singular_value_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    (sv.min(), sv.max())
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `frame` (an n x i matrix with orthonormal columns). Returns n x (n-i).
///
/// Computed from a full QR of [frame | I]: the leading i columns of Q span
/// the frame, the trailing n-i columns span its complement.
pub fn orthonormal_complement(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let n = frame.nrows();
    let i = frame.ncols();
    assert!(i <= n);
    let mut padded = DMatrix::zeros(n, i + n);
    padded.view_mut((0, 0), (n, i)).copy_from(frame);
    padded
        .view_mut((0, i), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    let q = padded.qr().q();
    q.columns(i, n - i).into_owned()
}

/// Principal angles (radians, ascending) between the column spans of two
/// orthonormal frames of equal dimension.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let product = a.transpose() * b;
    let mut sv: Vec<f64> = product
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(-1.0, 1.0).acos())
        .collect();
    sv.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sv
}

/// Frobenius norm of the part of `m` outside the column span of `frame`,
/// i.e. ||(I - F F^T) m||_F for an orthonormal `frame`.
pub fn projection_defect(frame: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let projected = frame.transpose() * m;
    let total = m.iter().map(|v| v * v).sum::<f64>();
    let inside = projected.iter().map(|v| v * v).sum::<f64>();
    (total - inside).max(0.0).sqrt()
}

/// Solves the square system `a * x = b`, or `None` when the LU factors are
/// singular to working precision.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let solution = a.clone().lu().solve(&rhs)?;
    if solution.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(solution.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn complement_of_xy_plane_is_z_axis() {
        let frame = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let complement = orthonormal_complement(&frame);
        assert_eq!(complement.ncols(), 1);
        assert!((complement[(2, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(complement[(0, 0)].abs() < 1e-12);
        assert!(complement[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn rank_thresholds_small_singular_values() {
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1e-12, 0.0]);
        assert_eq!(rank(&m, 1e-8), 1);
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rank(&m, 1e-8), 2);
    }

    #[test]
    fn principal_angle_between_rotated_lines() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let theta: f64 = 0.3;
        let b = DMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]);
        let angles = principal_angles(&a, &b);
        assert!((angles[0] - 0.3).abs() < 1e-12);
    }
}
