//! Independent reference routines for unit tests. Plain Gaussian
//! elimination; shares nothing with the SVD/eigen paths under test.

use crate::numerics::{CMatrix, C64};

fn to_rows(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

pub fn determinant(m: &CMatrix) -> C64 {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = to_rows(m);
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, v) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * v;
            }
        }
    }
    det
}

/// Row-echelon rank with an absolute pivot threshold relative to the
/// largest entry.
pub fn rank(m: &CMatrix, rtol: f64) -> usize {
    let mut a = to_rows(m);
    let (rows, cols) = m.shape();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[pivot][col].norm() <= rtol * scale {
            continue;
        }
        a.swap(pivot, rank);
        for row in rank + 1..rows {
            let f = a[row][col] / a[rank][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, v) in bottom[0][col..].iter_mut().zip(&top[rank][col..]) {
                *x -= f * v;
            }
        }
        rank += 1;
    }
    rank
}
