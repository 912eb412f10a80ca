//! Row reduction over a tower level. Matrices are lists of rows of packed
//! elements; everything here is exact.

use crate::gf::LevelField;

/// Reduced row echelon form in place. Zero rows are dropped, pivots are 1.
/// Returns the pivot column of each remaining row.
pub fn rref(f: &LevelField, rows: &mut Vec<Vec<u32>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = f.inv(rows[r][c]).unwrap();
        if inv != 1 {
            for x in rows[r].iter_mut().skip(c) {
                *x = f.mul(*x, inv);
            }
        }
        let pivot_row = std::mem::take(&mut rows[r]);
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(c) {
                if y != 0 {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        rows[r] = pivot_row;
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(f: &LevelField, rows: &[Vec<u32>]) -> usize {
    let mut m = rows.to_vec();
    rref(f, &mut m).len()
}

/// Basis of `{x : M·x = 0}` for an `r × ncols` matrix `M`.
pub fn kernel(f: &LevelField, rows: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let pivots = rref(f, &mut m);
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![0u32; ncols];
            v[free] = 1;
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = f.neg(row[free]);
            }
            v
        })
        .collect()
}

/// Reduce `v` against an RREF basis; the residual is zero iff `v` lies in the
/// row space.
pub fn reduce(f: &LevelField, basis: &[Vec<u32>], pivots: &[usize], v: &mut [u32]) {
    for (row, &c) in basis.iter().zip(pivots) {
        let factor = v[c];
        if factor == 0 {
            continue;
        }
        for (x, &y) in v.iter_mut().zip(row).skip(c) {
            if y != 0 {
                *x = f.sub(*x, f.mul(factor, y));
            }
        }
    }
}

/// Solve the square system `M·x = b` over `f`; `None` when `M` is singular.
pub fn solve(f: &LevelField, m: &[Vec<u32>], b: &[u32]) -> Option<Vec<u32>> {
    let n = m.len();
    let mut aug: Vec<Vec<u32>> = m
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(aug.iter().map(|r| r[n]).collect())
}
