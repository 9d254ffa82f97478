//! Dense 3x3 helpers: symmetric eigendecomposition and a small linear
//! solve.

use crate::math::{Mat3, Vec3};

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric
/// 3x3 matrix, via cyclic Jacobi rotations.
///
/// Eigenvector signs are canonical: the component with the largest
/// magnitude is non-negative.
pub fn eigen_symmetric3(m: &Mat3) -> ([f64; 3], [Vec3; 3]) {
    let mut a = m.m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= f64::MIN_POSITIVE {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + (1.0 + theta * theta).sqrt())
            } else {
                1.0 / (theta - (1.0 + theta * theta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // Apply the rotation on both sides of A, then accumulate in V.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|i| {
            (
                a[i][i],
                Vec3::new(v[0][i], v[1][i], v[2][i]).normalized(),
            )
        })
        .collect();
    pairs.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
    let mut values = [0.0; 3];
    let mut vectors = [Vec3::ZERO; 3];
    for (i, (val, vec)) in pairs.into_iter().enumerate() {
        values[i] = val;
        vectors[i] = canonical_sign(vec);
    }
    (values, vectors)
}

/// Flips `v` so its largest-magnitude component is non-negative.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let [x, y, z] = v.to_array();
    let dominant = if x.abs() >= y.abs() && x.abs() >= z.abs() {
        x
    } else if y.abs() >= z.abs() {
        y
    } else {
        z
    };
    if dominant < 0.0 {
        Vec3::new(-x, -y, -z)
    } else {
        v
    }
}

/// Solves `A x = b` by Cramer's rule; `None` when `|det A|` falls below
/// `det_eps`.
pub fn solve3(a: &Mat3, b: Vec3, det_eps: f64) -> Option<Vec3> {
    let det = a.determinant();
    if det.abs() < det_eps {
        return None;
    }
    let col = |j: usize, replace: Vec3| -> Mat3 {
        let mut cols = [a.col(0), a.col(1), a.col(2)];
        cols[j] = replace;
        Mat3::from_cols(cols[0], cols[1], cols[2])
    };
    Some(Vec3::new(
        col(0, b).determinant() / det,
        col(1, b).determinant() / det,
        col(2, b).determinant() / det,
    ))
}
