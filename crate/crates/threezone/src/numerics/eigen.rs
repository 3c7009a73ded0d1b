//! Cyclic Jacobi eigensolver for symmetric 4x4 matrices. Used to extract
//! the smallest-singular-value direction of the small design systems.

use crate::{lit, Real};

/// Diagonalises a symmetric 4x4 matrix. Returns `(eigenvalues, columns)`
/// sorted by ascending eigenvalue; `columns[j]` is the eigenvector of
/// `eigenvalues[j]`.
pub fn jacobi_symmetric_4<R: Real>(a: [[R; 4]; 4]) -> ([R; 4], [[R; 4]; 4]) {
    let n = 4;
    let mut a = a;
    let mut v = [[R::zero(); 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = R::one();
    }

    for _sweep in 0..64 {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p][q] * a[p][q];
            }
        }
        if off <= lit(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= lit(1e-300) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (lit::<R>(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= R::zero() { R::one() } else { -R::one() };
                    s / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| {
        a[i][i]
            .partial_cmp(&a[j][j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = [R::zero(); 4];
    let mut vecs = [[R::zero(); 4]; 4];
    for (slot, &idx) in order.iter().enumerate() {
        vals[slot] = a[idx][idx];
        for k in 0..n {
            vecs[slot][k] = v[k][idx];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let m = [
            [3.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 4.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
        ];
        let (vals, _) = jacobi_symmetric_4(m);
        assert_eq!(vals, [1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn known_eigensystem() {
        // A = Q D Q^T with an easy rotation in the (0,1) plane
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let d = [5.0, 2.0, 1.0, 0.0];
        let mut m = [[0.0; 4]; 4];
        // columns of Q
        let q = [
            [c, -s, 0.0, 0.0],
            [s, c, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    m[i][j] += q[i][k] * d[k] * q[j][k];
                }
            }
        }
        let (vals, vecs) = jacobi_symmetric_4(m);
        let expect = [0.0, 1.0, 2.0, 5.0];
        for k in 0..4 {
            assert!((vals[k] - expect[k]).abs() < 1e-12);
        }
        // residual || A v - lambda v ||
        for k in 0..4 {
            for i in 0..4 {
                let mut av = 0.0;
                for j in 0..4 {
                    av += m[i][j] * vecs[k][j];
                }
                assert!((av - vals[k] * vecs[k][i]).abs() < 1e-10);
            }
        }
    }
}
