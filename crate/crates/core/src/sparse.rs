// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal compressed-sparse-row complex matrix.
//!
//! Only what the Lindblad right-hand side needs: sparse × dense products,
//! adjoints, linear combinations and conversion to dense for tests.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut t: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            values.push(v);
        }
        // drop cancelled entries
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_val = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != Complex64::new(0.0, 0.0) {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices: keep_idx,
            values: keep_val,
        }
    }

    pub fn from_dense(m: &Array2<Complex64>) -> Self {
        let (r, c) = m.dim();
        Self::from_triplets(
            r,
            c,
            m.indexed_iter()
                .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                .map(|((i, j), v)| (i, j, *v)),
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.triplets() {
            out[[r, c]] += v;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(r, c, v)| (r, c, v * s)),
        )
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets()
                .map(|(r, c, v)| (r, c, a * v))
                .chain(other.triplets().map(|(r, c, v)| (r, c, b * v))),
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k];
                let v = self.values[k];
                for k2 in other.indptr[mid]..other.indptr[mid + 1] {
                    trip.push((r, other.indices[k2], v * other.values[k2]));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    pub fn mul_vec(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        assert_eq!(x.len(), self.ncols);
        Array1::from_shape_fn(self.nrows, |r| {
            (self.indptr[r]..self.indptr[r + 1])
                .map(|k| self.values[k] * x[self.indices[k]])
                .sum()
        })
    }

    /// `self · x` for a dense right operand.
    pub fn mul_dense(&self, x: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, x.ncols()));
        self.mul_dense_acc(x, Complex64::new(1.0, 0.0), &mut out);
        out
    }

    /// `out += s · self · x`.
    pub fn mul_dense_acc(&self, x: &Array2<Complex64>, s: Complex64, out: &mut Array2<Complex64>) {
        assert_eq!(x.nrows(), self.ncols);
        assert_eq!(out.dim(), (self.nrows, x.ncols()));
        let xs = x.as_standard_layout();
        let ncols = x.ncols();
        let xsl = xs.as_slice().expect("standard layout");
        let osl = out.as_slice_mut().expect("output must be standard layout");
        for r in 0..self.nrows {
            let orow = &mut osl[r * ncols..(r + 1) * ncols];
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = s * self.values[k];
                let c = self.indices[k];
                let xrow = &xsl[c * ncols..(c + 1) * ncols];
                for (o, xv) in orow.iter_mut().zip(xrow) {
                    *o += v * xv;
                }
            }
        }
    }

    /// `out += s · x · self†`, computed row by row of `x`.
    pub fn mul_dense_adjoint_right_acc(
        &self,
        x: &Array2<Complex64>,
        s: Complex64,
        out: &mut Array2<Complex64>,
    ) {
        assert_eq!(x.ncols(), self.ncols);
        assert_eq!(out.dim(), (x.nrows(), self.nrows));
        let xs = x.as_standard_layout();
        let (xn, on) = (self.ncols, self.nrows);
        let xsl = xs.as_slice().expect("standard layout");
        let osl = out.as_slice_mut().expect("output must be standard layout");
        for (xrow, orow) in xsl.chunks_exact(xn).zip(osl.chunks_exact_mut(on)) {
            for (j, o) in orow.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in self.indptr[j]..self.indptr[j + 1] {
                    acc += xrow[self.indices[k]] * self.values[k].conj();
                }
                *o += s * acc;
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = &self.to_dense() - &self.adjoint().to_dense();
        d.iter().all(|z| z.norm() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (1, 0, c(1.0, 0.0)),
                (1, 0, c(-1.0, 0.0)),
            ],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.to_dense()[[0, 1]], c(3.0, 0.0));
    }

    #[test]
    fn dense_product_matches_reference() {
        let a = Array2::from_shape_fn((3, 3), |(i, j)| {
            if (i + j) % 2 == 0 {
                c(i as f64 + 1.0, j as f64 - 0.5)
            } else {
                c(0.0, 0.0)
            }
        });
        let x = Array2::from_shape_fn((3, 2), |(i, j)| c(i as f64 - j as f64, 0.25 * i as f64));
        let sp = CsrMatrix::from_dense(&a);
        let got = sp.mul_dense(&x);
        let want = a.dot(&x);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-14);
        }
        let v = x.column(0).to_owned();
        let gv = sp.mul_vec(&v);
        let wv = a.dot(&v);
        for (g, w) in gv.iter().zip(wv.iter()) {
            assert!((g - w).norm() < 1e-14);
        }
        let sq = sp.matmul(&sp).to_dense();
        let wsq = a.dot(&a);
        for (g, w) in sq.iter().zip(wsq.iter()) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn right_adjoint_product_matches_reference() {
        let a = Array2::from_shape_fn((3, 4), |(i, j)| {
            if (i * j) % 3 == 1 {
                c(0.0, 0.0)
            } else {
                c(i as f64 - 1.0, 0.5 * j as f64)
            }
        });
        let x = Array2::from_shape_fn((2, 4), |(i, j)| {
            c(j as f64 + 0.1, i as f64 - 0.3 * j as f64)
        });
        let mut out = Array2::from_elem((2, 3), c(1.0, -1.0));
        CsrMatrix::from_dense(&a).mul_dense_adjoint_right_acc(&x, c(0.5, 2.0), &mut out);
        let adj = a.t().mapv(|z| z.conj());
        let want = Array2::from_elem((2, 3), c(1.0, -1.0)) + x.dot(&adj).mapv(|z| z * c(0.5, 2.0));
        for (g, w) in out.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-13);
        }
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(0, 2, c(1.0, 2.0))]);
        let a = m.adjoint();
        assert_eq!((a.nrows(), a.ncols()), (3, 2));
        assert_eq!(a.to_dense()[[2, 0]], c(1.0, -2.0));
    }
}
