//! Small exact linear algebra over the rationals and the integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type RationalMatrix = Vec<Vec<BigRational>>;

/// Determinant by Gaussian elimination over Q.
pub fn det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut a: RationalMatrix = m.to_vec();
    let mut result = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            result = -result;
        }
        let p = a[col][col].clone();
        result *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    result
}

/// Columns `cols` of `m`.
pub fn submatrix_cols(m: &[Vec<BigRational>], cols: &[usize]) -> RationalMatrix {
    m.iter()
        .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
        .collect()
}

/// Inverse of an integer matrix, if it exists over Q.
pub fn inverse_rational(m: &[Vec<i64>]) -> Option<RationalMatrix> {
    let n = m.len();
    let mut a: RationalMatrix = m
        .iter()
        .map(|row| {
            let mut r: Vec<BigRational> = row
                .iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect();
            r.extend((0..n).map(|_| BigRational::zero()));
            r
        })
        .collect();
    for (i, row) in a.iter_mut().enumerate() {
        row[n + i] = BigRational::one();
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..2 * n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Inverse over the integers: fails unless the matrix is unimodular.
pub fn inverse_unimodular(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let inv = inverse_rational(m)?;
    inv.iter()
        .map(|row| {
            row.iter()
                .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                .collect()
        })
        .collect()
}

pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    let q: RationalMatrix = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    det(&q).to_integer()
}

pub fn mat_mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|l| row[l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn is_unimodular(m: &[Vec<i64>]) -> bool {
    det_i64(m).abs().is_one()
}

/// Real eigenvalues of the companion matrix of a monic polynomial with
/// ascending coefficients `c[0..k]` (the leading 1 omitted).
pub fn companion_roots(c: &[f64]) -> Vec<(f64, f64)> {
    let k = c.len();
    if k == 0 {
        return Vec::new();
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..k {
        m[(i, k - 1)] = -c[i];
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}
