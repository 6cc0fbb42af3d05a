//! Dense complex matrices and the constructions built on them.

mod haar;
mod permanent;
mod reck;

pub use haar::haar_unitary;
pub use permanent::{permanent, permanent_naive, permanent_submatrix};
pub use reck::ReckParams;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockState;

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * c)
    }

    /// Sub-matrix with the given (possibly repeated) row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// max |M†M − I|.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn ensure_unitary(&self, tolerance: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::InvalidDimension(format!(
                "unitary must be square, got {}x{}",
                self.rows, self.cols
            )));
        }
        let deviation = self.unitarity_deviation();
        if deviation > tolerance {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(())
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Wire form: `{"rows", "cols", "data": [[re, im], ...]}` in row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let data = json
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_vec(json.rows, json.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::InvalidDimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// Block-diagonal `A ⊕ B`.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows + b.rows, a.cols + b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(i, j)] = a[(i, j)];
        }
    }
    for i in 0..b.rows {
        for j in 0..b.cols {
            out[(a.rows + i, a.cols + j)] = b[(i, j)];
        }
    }
    out
}

/// Linear phase shifter on 1-based mode `x`: identity with entry `(x, x) = exp(-iφ)`.
pub fn phase_shifter(m: usize, x: usize, phi: f64) -> Result<ComplexMatrix> {
    if x == 0 || x > m {
        return Err(Error::ModeOutOfRange { index: x, modes: m });
    }
    let mut f = ComplexMatrix::identity(m);
    f[(x - 1, x - 1)] = Complex64::from_polar(1.0, -phi);
    Ok(f)
}

/// The n×n matrix whose rows repeat row i of `u` s_i times and whose columns
/// repeat column j t_j times.
pub fn matrix_from_states(
    u: &ComplexMatrix,
    input: &FockState,
    output: &FockState,
) -> Result<ComplexMatrix> {
    check_states(u, input, output)?;
    Ok(u.select(&input.mode_list(), &output.mode_list()))
}

pub(crate) fn check_states(u: &ComplexMatrix, input: &FockState, output: &FockState) -> Result<()> {
    if !u.is_square() {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {}x{}",
            u.rows, u.cols
        )));
    }
    for s in [input, output] {
        if s.modes() != u.rows {
            return Err(Error::ModeMismatch {
                expected: u.rows,
                found: s.modes(),
            });
        }
    }
    if input.photons() != output.photons() {
        return Err(Error::PhotonMismatch {
            expected: input.photons(),
            found: output.photons(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direct_sum_of_identities() {
        let s = direct_sum(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(s, ComplexMatrix::identity(5));
    }

    #[test]
    fn phase_shifter_pi() {
        let f = phase_shifter(3, 2, PI).unwrap();
        assert!((f[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((f[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((f[(2, 2)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(phase_shifter(4, 3, 0.0).unwrap(), ComplexMatrix::identity(4));
        assert!(phase_shifter(3, 0, 1.0).is_err());
        assert!(phase_shifter(3, 4, 1.0).is_err());
    }

    #[test]
    fn matmul_dimension_check() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matmul(&a, &a).is_err());
        let b = ComplexMatrix::identity(3);
        assert_eq!(matmul(&a, &b).unwrap(), a);
    }

    #[test]
    fn selection_with_multiplicity() {
        let u = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let sel = matrix_from_states(&u, &FockState::new(vec![2, 0]), &FockState::new(vec![1, 1]))
            .unwrap();
        assert_eq!(
            sel,
            ComplexMatrix::from_rows(&[
                vec![c(1.0, 0.0), c(2.0, 0.0)],
                vec![c(1.0, 0.0), c(2.0, 0.0)]
            ])
            .unwrap()
        );
        let id = ComplexMatrix::identity(2);
        let s = FockState::new(vec![1, 1]);
        assert_eq!(matrix_from_states(&id, &s, &s).unwrap(), id);
        assert!(matches!(
            matrix_from_states(&id, &s, &FockState::new(vec![2, 1])),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, -0.5)], vec![c(0.0, 2.0)]]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"rows":2,"cols":1,"data":[[1.0,-0.5],[0.0,2.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ComplexMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }
}
