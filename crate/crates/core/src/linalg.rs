//! Small dense kernels and a CSR matrix, enough for ALS normal equations and
//! sparse operator products.

use crate::{Error, Result, Scalar};

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] += v;
    }

    pub fn add_diagonal(&mut self, v: T) {
        for i in 0..self.n {
            self.add_to(i, i, v);
        }
    }

    /// `self += scale * x x^T`.
    pub fn rank_one_update(&mut self, scale: T, x: &[T]) {
        for (i, &xi) in x.iter().enumerate() {
            let s = scale * xi;
            let row = &mut self.data[i * self.n..(i + 1) * self.n];
            for (r, &xj) in row.iter_mut().zip(x) {
                *r += s * xj;
            }
        }
    }

    /// Gram matrix `X^T X` of the rows of `rows` (each of length `n`).
    pub fn gram<'a>(n: usize, rows: impl IntoIterator<Item = &'a [T]>) -> Self {
        let mut g = Self::zeros(n);
        for r in rows {
            g.rank_one_update(T::one(), r);
        }
        g
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (i, &xi) in x.iter().enumerate() {
            acc += xi * dot(&self.data[i * self.n..(i + 1) * self.n], x);
        }
        acc
    }

    /// Solves `M x = b` for symmetric positive definite `M` by Cholesky.
    pub fn cholesky_solve(mut self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                let l = self.get(j, k);
                d -= l * l;
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::Singular(format!(
                    "matrix not positive definite at pivot {j} ({})",
                    d
                )));
            }
            let d = d.sqrt();
            self.data[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= self.get(i, k) * self.get(j, k);
                }
                self.data[i * n + j] = s / d;
            }
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.get(k, i) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        Ok(y)
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let nrows = rows.len();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < cols);
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: nrows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => T::zero(),
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[T], out: &mut [T]) {
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let span = self.indptr[r]..self.indptr[r + 1];
            *o = self.indices[span.clone()]
                .iter()
                .zip(&self.values[span])
                .fold(T::zero(), |acc, (&c, &v)| acc + v * x[c]);
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}
