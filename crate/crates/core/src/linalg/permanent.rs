use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Permanent by Ryser's formula with Gray-code subset updates, O(2^n n).
///
/// The empty matrix has permanent 1.
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!(
            "permanent of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ryser(m.rows(), |i, j| m[(i, j)]))
}

/// Permanent of `u` restricted to the listed rows and columns.
pub fn permanent_submatrix(u: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    assert_eq!(rows.len(), cols.len());
    ryser(rows.len(), |i, j| u[(rows[i], cols[j])])
}

pub(crate) fn ryser(n: usize, entry: impl Fn(usize, usize) -> Complex64) -> Complex64 {
    match n {
        0 => return ONE,
        1 => return entry(0, 0),
        2 => return entry(0, 0) * entry(1, 1) + entry(0, 1) * entry(1, 0),
        _ => {}
    }
    assert!(n < 63, "permanent size {n} too large");

    if n <= 8 {
        let mut a = [ZERO; 64];
        let mut sums = [ZERO; 8];
        for (k, slot) in a.iter_mut().take(n * n).enumerate() {
            *slot = entry(k / n, k % n);
        }
        ryser_gray(n, &a[..n * n], &mut sums[..n])
    } else {
        let a: Vec<Complex64> = (0..n * n).map(|k| entry(k / n, k % n)).collect();
        let mut sums = vec![ZERO; n];
        ryser_gray(n, &a, &mut sums)
    }
}

fn ryser_gray(n: usize, a: &[Complex64], row_sums: &mut [Complex64]) -> Complex64 {
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let bit = 1u64 << col;
        gray ^= bit;
        if gray & bit != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + col];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + col];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, &s| acc * s);
        // (-1)^{n - |S|}
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Permutation-sum permanent; reference oracle for sizes up to 9.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!(
            "permanent of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > 9 {
        return Err(Error::OracleTooLarge(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = ZERO;
    heap_permutations(&mut perm, n, &mut |p| {
        total += p
            .iter()
            .enumerate()
            .fold(ONE, |acc, (i, &j)| acc * m[(i, j)]);
    });
    Ok(total)
}

fn heap_permutations(perm: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(perm);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(perm, k - 1, visit);
        if k.is_multiple_of(2) {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
    heap_permutations(perm, k - 1, visit);
}
