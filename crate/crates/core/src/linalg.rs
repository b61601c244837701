//! Small dense linear algebra over Z and over the two-element field.
//!
//! Everything here works on matrices of a handful of rows and columns; the
//! algorithms are the textbook ones with full transform bookkeeping.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// Row Hermite normal form with transform: returns `(h, t)` where `t * a = h`,
/// `t` unimodular, `h` in row echelon form with positive pivots and entries
/// below each pivot zero, entries above reduced modulo the pivot.
pub fn hnf_with_transform(a: &Mat) -> (Mat, Mat) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut h = a.to_vec();
    let mut t = identity(rows);
    let mut pivot_row = 0;
    for col in 0..cols {
        // find a row at or below pivot_row with a nonzero entry in this column
        let mut piv = None;
        for r in pivot_row..rows {
            if !h[r][col].is_zero() {
                piv = Some(r);
                break;
            }
        }
        let Some(mut p) = piv else { continue };
        // eliminate all other nonzero entries in this column below pivot_row by gcd steps
        loop {
            let mut done = true;
            for r in pivot_row..rows {
                if r != p && !h[r][col].is_zero() {
                    done = false;
                    let q = h[r][col].div_floor(&h[p][col]);
                    row_sub(&mut h, r, p, &q);
                    row_sub(&mut t, r, p, &q);
                    if !h[r][col].is_zero() && h[r][col].abs() < h[p][col].abs() {
                        p = r;
                    }
                }
            }
            if done {
                break;
            }
        }
        h.swap(pivot_row, p);
        t.swap(pivot_row, p);
        if h[pivot_row][col].is_negative() {
            row_neg(&mut h, pivot_row);
            row_neg(&mut t, pivot_row);
        }
        // reduce entries above the pivot
        for r in 0..pivot_row {
            if !h[r][col].is_zero() {
                let q = h[r][col].div_floor(&h[pivot_row][col]);
                row_sub(&mut h, r, pivot_row, &q);
                row_sub(&mut t, r, pivot_row, &q);
            }
        }
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    (h, t)
}

fn row_sub(m: &mut Mat, r: usize, p: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let pr = m[p].clone();
    for (x, y) in m[r].iter_mut().zip(pr.iter()) {
        *x -= q * y;
    }
}

fn row_neg(m: &mut Mat, r: usize) {
    for x in m[r].iter_mut() {
        *x = -x.clone();
    }
}

/// Basis of the left kernel `{ x : x * a = 0 }` as rows.
pub fn left_kernel(a: &Mat) -> Mat {
    let (h, t) = hnf_with_transform(a);
    h.iter()
        .zip(t.iter())
        .filter(|(hr, _)| hr.iter().all(|x| x.is_zero()))
        .map(|(_, tr)| tr.clone())
        .collect()
}

/// Smith normal form: returns `(u, s, v)` with `u * a * v = s`, `u`, `v`
/// unimodular and `s` diagonal with each divisor dividing the next.
pub fn snf_with_transforms(a: &Mat) -> (Mat, Mat, Mat) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut s = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let n = rows.min(cols);
    for k in 0..n {
        loop {
            // find the minimal nonzero entry in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !s[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            s.swap(k, bi);
            u.swap(k, bi);
            col_swap(&mut s, k, bj);
            col_swap(&mut v, k, bj);
            let mut dirty = false;
            for i in (k + 1)..rows {
                if !s[i][k].is_zero() {
                    let q = s[i][k].div_floor(&s[k][k]);
                    row_sub(&mut s, i, k, &q);
                    row_sub(&mut u, i, k, &q);
                    if !s[i][k].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in (k + 1)..cols {
                if !s[k][j].is_zero() {
                    let q = s[k][j].div_floor(&s[k][k]);
                    col_sub(&mut s, j, k, &q);
                    col_sub(&mut v, j, k, &q);
                    if !s[k][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // ensure the pivot divides the rest of the block
                let mut fixed = true;
                'scan: for i in (k + 1)..rows {
                    for j in (k + 1)..cols {
                        if !(&s[i][j] % &s[k][k]).is_zero() {
                            // fold row i into row k to force another reduction round
                            let one = BigInt::one();
                            for (x, y) in {
                                let (a, b) = split_rows(&mut s, k, i);
                                a.iter_mut().zip(b.iter())
                            } {
                                *x += &one * y;
                            }
                            let (a, b) = split_rows(&mut u, k, i);
                            for (x, y) in a.iter_mut().zip(b.iter()) {
                                *x += &one * y;
                            }
                            fixed = false;
                            break 'scan;
                        }
                    }
                }
                if fixed {
                    break;
                }
            }
        }
        if s[k][k].is_negative() {
            row_neg(&mut s, k);
            row_neg(&mut u, k);
        }
    }
    (u, s, v)
}

fn split_rows<'a>(m: &'a mut Mat, a: usize, b: usize) -> (&'a mut Vec<BigInt>, &'a Vec<BigInt>) {
    assert!(a != b);
    if a < b {
        let (lo, hi) = m.split_at_mut(b);
        (&mut lo[a], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(a);
        (&mut hi[0], &lo[b])
    }
}

fn col_swap(m: &mut Mat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn col_sub(m: &mut Mat, j: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let t = &row[k] * q;
        row[j] -= t;
    }
}

/// Dense boolean matrix used for the sign/Hilbert systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2Matrix {
    pub rows: Vec<Vec<bool>>,
}

impl F2Matrix {
    pub fn new(rows: Vec<Vec<bool>>) -> Self {
        F2Matrix { rows }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.rows.clone();
        let cols = m.first().map(|r| r.len()).unwrap_or(0);
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..m.len()).find(|&r| m[r][c]) {
                m.swap(rank, p);
                for r in 0..m.len() {
                    if r != rank && m[r][c] {
                        let piv = m[rank].clone();
                        for (x, y) in m[r].iter_mut().zip(piv.iter()) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// Solves `self * x = rhs`; among all solutions, free variables are set
    /// to zero. Returns `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &[bool]) -> Option<Vec<bool>> {
        let nrows = self.rows.len();
        assert_eq!(nrows, rhs.len());
        let cols = self.rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m: Vec<Vec<bool>> = self
            .rows
            .iter()
            .zip(rhs.iter())
            .map(|(r, &b)| {
                let mut row = r.clone();
                row.push(b);
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..nrows).find(|&r| m[r][c]) {
                m.swap(rank, p);
                for r in 0..nrows {
                    if r != rank && m[r][c] {
                        let piv = m[rank].clone();
                        for (x, y) in m[r].iter_mut().zip(piv.iter()) {
                            *x ^= y;
                        }
                    }
                }
                pivots.push(c);
                rank += 1;
            }
        }
        // inconsistent when a zero row has rhs 1
        for r in rank..nrows {
            if m[r][cols] {
                return None;
            }
        }
        let mut x = vec![false; cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = m[r][cols];
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn m(rows: &[&[i64]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|&x| bi(x)).collect()).collect()
    }

    #[test]
    fn hnf_transform_consistent() {
        let a = m(&[&[2, 4], &[6, 8], &[10, 14]]);
        let (h, t) = hnf_with_transform(&a);
        assert_eq!(mat_mul(&t, &a), h);
        assert_eq!(h[0][0], bi(2));
        assert!(h[2].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn kernel_annihilates() {
        let a = m(&[&[2, 0], &[1, 1], &[3, 1]]);
        let k = left_kernel(&a);
        assert_eq!(k.len(), 1);
        let prod = mat_mul(&k, &a);
        assert!(prod[0].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn snf_divisors() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (u, s, v) = snf_with_transforms(&a);
        assert_eq!(mat_mul(&mat_mul(&u, &a), &v), s);
        let d: Vec<BigInt> = (0..3).map(|i| s[i][i].clone()).collect();
        for i in 1..3 {
            if !d[i].is_zero() && !d[i - 1].is_zero() {
                assert!((&d[i] % &d[i - 1]).is_zero());
            }
        }
    }

    #[test]
    fn f2_solve_and_rank() {
        let a = F2Matrix::new(vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ]);
        assert_eq!(a.rank(), 2);
        let sol = a.solve(&[true, false, true]).unwrap();
        for (row, &want) in a.rows.iter().zip([true, false, true].iter()) {
            let got = row.iter().zip(sol.iter()).fold(false, |acc, (&r, &x)| acc ^ (r && x));
            assert_eq!(got, want);
        }
        assert!(a.solve(&[true, true, true]).is_none());
    }
}
