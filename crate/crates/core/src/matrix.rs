//! Dense matrices of polynomials and exact determinants.

use crate::polynomial::{PolyError, Polynomial, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Polynomial>,
}

impl SymbolicMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Polynomial) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        SymbolicMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        SymbolicMatrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Polynomial] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// The matrix with row `r` and column `c` deleted.
    pub fn minor(&self, r: usize, c: usize) -> SymbolicMatrix {
        let rows: Vec<_> = (0..self.rows).filter(|&i| i != r).collect();
        let cols: Vec<_> = (0..self.cols).filter(|&j| j != c).collect();
        self.select(&rows, &cols)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SymbolicMatrix {
        SymbolicMatrix::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    pub fn eval_mod(
        &self,
        p: u64,
        value: impl Fn(Var) -> Option<u64> + Copy,
    ) -> Result<Vec<Vec<u64>>, PolyError> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|e| e.eval_mod(p, value)).collect())
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination with row pivoting.
    pub fn determinant(&self) -> Polynomial {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Polynomial::one();
        }
        let mut m: Vec<Vec<Polynomial>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut negate = false;
        let mut prev = Polynomial::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return Polynomial::zero();
                };
                m.swap(k, r);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                    m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
                }
                m[i][k] = Polynomial::zero();
            }
            prev = m[k][k].clone();
        }
        let det = m[n - 1][n - 1].clone();
        if negate {
            -det
        } else {
            det
        }
    }

    /// Determinant by Laplace expansion along the first row. Exponential; for checks.
    pub fn determinant_by_expansion(&self) -> Polynomial {
        assert!(self.is_square(), "determinant of a non-square matrix");
        if self.rows == 0 {
            return Polynomial::one();
        }
        let mut acc = Polynomial::zero();
        for c in 0..self.cols {
            let entry = self.get(0, c);
            if entry.is_zero() {
                continue;
            }
            let term = entry * &self.minor(0, c).determinant_by_expansion();
            if c % 2 == 0 {
                acc += &term;
            } else {
                acc -= &term;
            }
        }
        acc
    }
}
