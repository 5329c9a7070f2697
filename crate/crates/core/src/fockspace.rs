// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space linear algebra.
//!
//! A [`FockRegister`] holds either a state vector or a density operator over
//! a product of truncated bosonic modes. Basis ordering: mode 0 is the
//! slowest-varying tensor index, so for dims `[d0, d1]` the basis state
//! `|n0, n1⟩` sits at `n0 * d1 + n1`.
//!
//! Single-mode operators act on registers locally (without building the
//! full embedded matrix). Full embeddings are available as dense matrices
//! for registers of up to two modes and as CSR beyond that.

use std::io::{self, Write};

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use thiserror::Error;

use crate::sparse::CsrMatrix;

/// Default bound on the probability weight discarded by truncation.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("truncation tail {tail:.3e} exceeds bound {bound:.3e} (dimension {dim})")]
    Truncation { tail: f64, bound: f64, dim: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot combine pure and density registers")]
    MixedRepresentation,
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Truncation heuristic for a coherent amplitude: `ceil(|α|² + 8|α| + 10)`.
pub fn default_dim(alpha_mag: f64) -> usize {
    (alpha_mag * alpha_mag + 8.0 * alpha_mag + 10.0).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub enum FockData {
    Pure(Array1<Complex64>),
    Density(Array2<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockRegister {
    mode_dims: Vec<usize>,
    data: FockData,
    truncation_tail: f64,
}

impl FockRegister {
    /// Wrap a state vector, checking unit norm to 1e-12.
    pub fn new_pure(mode_dims: Vec<usize>, amps: Array1<Complex64>) -> Result<Self, FockError> {
        check_dims(&mode_dims, amps.len())?;
        let n = norm_sq(&amps);
        if (n - 1.0).abs() > 1e-12 {
            return Err(FockError::InvalidState(format!("norm² = {n}, expected 1")));
        }
        Ok(Self {
            mode_dims,
            data: FockData::Pure(amps),
            truncation_tail: 0.0,
        })
    }

    /// Wrap a density operator, checking unit trace and Hermiticity to 1e-12.
    pub fn new_density(mode_dims: Vec<usize>, rho: Array2<Complex64>) -> Result<Self, FockError> {
        let (r, c) = rho.dim();
        if r != c {
            return Err(FockError::DimensionMismatch(format!("density is {r}x{c}")));
        }
        check_dims(&mode_dims, r)?;
        let tr = rho.diag().sum();
        if (tr - ONE).norm() > 1e-12 {
            return Err(FockError::InvalidState(format!("trace = {tr}")));
        }
        let herm = hermiticity_error(&rho);
        if herm > 1e-12 {
            return Err(FockError::InvalidState(format!(
                "not Hermitian (max deviation {herm:.3e})"
            )));
        }
        Ok(Self {
            mode_dims,
            data: FockData::Density(rho),
            truncation_tail: 0.0,
        })
    }

    /// Normalize arbitrary amplitudes; returns the register and the squared
    /// norm of the input.
    pub fn normalized(
        mode_dims: Vec<usize>,
        amps: Array1<Complex64>,
    ) -> Result<(Self, f64), FockError> {
        check_dims(&mode_dims, amps.len())?;
        let n = norm_sq(&amps);
        if n == 0.0 || !n.is_finite() {
            return Err(FockError::InvalidState(format!(
                "cannot normalize (norm² = {n})"
            )));
        }
        let s = 1.0 / n.sqrt();
        Ok((
            Self {
                mode_dims,
                data: FockData::Pure(amps.mapv(|z| z * s)),
                truncation_tail: 0.0,
            },
            n,
        ))
    }

    pub(crate) fn from_pure_unchecked(mode_dims: Vec<usize>, amps: Array1<Complex64>) -> Self {
        Self {
            mode_dims,
            data: FockData::Pure(amps),
            truncation_tail: 0.0,
        }
    }

    pub(crate) fn from_density_unchecked(mode_dims: Vec<usize>, rho: Array2<Complex64>) -> Self {
        Self {
            mode_dims,
            data: FockData::Density(rho),
            truncation_tail: 0.0,
        }
    }

    pub fn with_truncation_tail(mut self, tail: f64) -> Self {
        self.truncation_tail = tail;
        self
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn data(&self) -> &FockData {
        &self.data
    }

    /// Probability weight discarded when the state was truncated.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, FockData::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&Array1<Complex64>> {
        match &self.data {
            FockData::Pure(v) => Some(v),
            FockData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Option<&Array2<Complex64>> {
        match &self.data {
            FockData::Pure(_) => None,
            FockData::Density(m) => Some(m),
        }
    }

    pub fn into_density_matrix(self) -> Array2<Complex64> {
        match self.data {
            FockData::Pure(v) => outer(&v),
            FockData::Density(m) => m,
        }
    }

    pub fn to_density(&self) -> FockRegister {
        Self {
            mode_dims: self.mode_dims.clone(),
            data: FockData::Density(self.clone().into_density_matrix()),
            truncation_tail: self.truncation_tail,
        }
    }

    /// Norm² of a pure state or trace of a density operator.
    pub fn weight(&self) -> f64 {
        match &self.data {
            FockData::Pure(v) => norm_sq(v),
            FockData::Density(m) => m.diag().sum().re,
        }
    }

    /// Tr(ρ²); 1 for pure states.
    pub fn purity(&self) -> f64 {
        match &self.data {
            FockData::Pure(v) => norm_sq(v).powi(2),
            FockData::Density(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `⟨self|other⟩` for pure registers on identical mode dimensions.
    pub fn inner(&self, other: &FockRegister) -> Result<Complex64, FockError> {
        if self.mode_dims != other.mode_dims {
            return Err(FockError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.mode_dims, other.mode_dims
            )));
        }
        match (&self.data, &other.data) {
            (FockData::Pure(a), FockData::Pure(b)) => {
                Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
            }
            _ => Err(FockError::MixedRepresentation),
        }
    }

    /// Population of the highest retained level of each mode.
    pub fn top_level_populations(&self) -> Vec<f64> {
        let diag: Vec<f64> = match &self.data {
            FockData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            FockData::Density(m) => m.diag().iter().map(|z| z.re).collect(),
        };
        let mut out = vec![0.0; self.mode_dims.len()];
        for (idx, p) in diag.iter().enumerate() {
            let digits = basis_digits(idx, &self.mode_dims);
            for (k, (&n, &d)) in digits.iter().zip(&self.mode_dims).enumerate() {
                if n + 1 == d {
                    out[k] += p;
                }
            }
        }
        out
    }

    /// Write one CSV row per nonzero entry: basis indices then real and
    /// imaginary parts. Density registers list row indices then column
    /// indices.
    pub fn dump_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.mode_dims.len();
        match &self.data {
            FockData::Pure(v) => {
                let names: Vec<String> = (0..m).map(|k| format!("n{k}")).collect();
                writeln!(w, "{},re,im", names.join(","))?;
                for (idx, z) in v.iter().enumerate() {
                    if *z == ZERO {
                        continue;
                    }
                    let d = basis_digits(idx, &self.mode_dims);
                    let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                    writeln!(w, "{},{:e},{:e}", d.join(","), z.re, z.im)?;
                }
            }
            FockData::Density(rho) => {
                let mut names: Vec<String> = (0..m).map(|k| format!("row_n{k}")).collect();
                names.extend((0..m).map(|k| format!("col_n{k}")));
                writeln!(w, "{},re,im", names.join(","))?;
                for ((i, j), z) in rho.indexed_iter() {
                    if *z == ZERO {
                        continue;
                    }
                    let mut d = basis_digits(i, &self.mode_dims);
                    d.extend(basis_digits(j, &self.mode_dims));
                    let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                    writeln!(w, "{},{:e},{:e}", d.join(","), z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize], len: usize) -> Result<(), FockError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(FockError::DimensionMismatch(format!(
            "invalid mode dims {dims:?}"
        )));
    }
    let total: usize = dims.iter().product();
    if total != len {
        return Err(FockError::DimensionMismatch(format!(
            "mode dims {dims:?} imply {total} basis states, data has {len}"
        )));
    }
    Ok(())
}

fn norm_sq(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn outer(v: &Array1<Complex64>) -> Array2<Complex64> {
    let n = v.len();
    Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj())
}

pub(crate) fn hermiticity_error(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Whether the Hermitian matrix `m` has no eigenvalue below `−tol`, tested
/// by a Cholesky factorization of `m + tol·I`.
pub fn is_positive_within(m: &Array2<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    let mut l = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut d = m[[j, j]].re + tol;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let djj = d.sqrt();
        l[[j, j]] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut v = m[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = v / djj;
        }
    }
    true
}

/// Split a flat basis index into per-mode occupation numbers.
pub fn basis_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Inverse of [`basis_digits`].
pub fn basis_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&n, &d)| acc * d + n)
}

/// Weight of a Poisson-like sequence `Σ_{n ≥ start} |c_n|²` where `next`
/// maps `(n, c_{n-1})` to `c_n`. Runs until the terms are negligible.
fn series_tail(
    start: usize,
    first: Complex64,
    mean: f64,
    mut next: impl FnMut(usize, Complex64) -> Complex64,
) -> f64 {
    let mut term = first;
    let mut acc = term.norm_sqr();
    let mut n = start;
    loop {
        n += 1;
        term = next(n, term);
        let t = term.norm_sqr();
        acc += t;
        if n as f64 > mean + 1.0 && (t <= acc * 1e-18 || t == 0.0) {
            break;
        }
        if n > start + 100_000 {
            break;
        }
    }
    acc
}

fn coherent_amplitudes(alpha: Complex64, count: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..count {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Truncated coherent state `|α⟩`, renormalized, with tail bound
/// [`DEFAULT_TAIL_BOUND`].
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<FockRegister, FockError> {
    coherent_state_with_bound(alpha, dim, DEFAULT_TAIL_BOUND)
}

pub fn coherent_state_with_bound(
    alpha: Complex64,
    dim: usize,
    tail_bound: f64,
) -> Result<FockRegister, FockError> {
    if dim < 2 {
        return Err(FockError::DimensionMismatch(format!(
            "coherent state needs dim >= 2, got {dim}"
        )));
    }
    let amps = coherent_amplitudes(alpha, dim);
    let last = amps[dim - 1];
    let tail = series_tail(
        dim,
        last * alpha / (dim as f64).sqrt(),
        alpha.norm_sqr(),
        |n, c| c * alpha / (n as f64).sqrt(),
    );
    if tail > tail_bound {
        return Err(FockError::Truncation {
            tail,
            bound: tail_bound,
            dim,
        });
    }
    let (reg, _) = FockRegister::normalized(vec![dim], Array1::from(amps))?;
    Ok(reg.with_truncation_tail(tail))
}

/// Single-photon-added coherent state `a†|α⟩ / √(1+|α|²)`.
pub fn spacs(alpha: Complex64, dim: usize) -> Result<FockRegister, FockError> {
    spacs_with_bound(alpha, dim, DEFAULT_TAIL_BOUND)
}

pub fn spacs_with_bound(
    alpha: Complex64,
    dim: usize,
    tail_bound: f64,
) -> Result<FockRegister, FockError> {
    if dim < 3 {
        return Err(FockError::DimensionMismatch(format!(
            "SPACS needs dim >= 3, got {dim}"
        )));
    }
    let norm = 1.0 + alpha.norm_sqr();
    let c = coherent_amplitudes(alpha, dim);
    let mut amps = Array1::zeros(dim);
    for n in 1..dim {
        amps[n] = c[n - 1] * (n as f64).sqrt() / norm.sqrt();
    }
    // b_n = √n c_{n-1} / √norm; track c_{n-1} and rebuild b_n
    let mut c_prev = c[dim - 1];
    let first = c_prev * (dim as f64).sqrt() / norm.sqrt();
    let tail = series_tail(dim, first, alpha.norm_sqr() + 1.0, |n, _| {
        c_prev = c_prev * alpha / ((n - 1) as f64).sqrt();
        c_prev * (n as f64).sqrt() / norm.sqrt()
    });
    if tail > tail_bound {
        return Err(FockError::Truncation {
            tail,
            bound: tail_bound,
            dim,
        });
    }
    let explicit = norm_sq(&amps);
    debug_assert!(
        (explicit + tail - 1.0).abs() < 1e-12,
        "SPACS norm check failed: {explicit} + {tail}"
    );
    let (reg, _) = FockRegister::normalized(vec![dim], amps)?;
    Ok(reg.with_truncation_tail(tail))
}

/// Fock basis state `|n⟩` in a single mode.
pub fn fock_state(n: usize, dim: usize) -> Result<FockRegister, FockError> {
    if n >= dim {
        return Err(FockError::DimensionMismatch(format!(
            "|{n}⟩ needs dim > {n}, got {dim}"
        )));
    }
    let mut v = Array1::zeros(dim);
    v[n] = ONE;
    FockRegister::new_pure(vec![dim], v)
}

pub fn vacuum(dim: usize) -> Result<FockRegister, FockError> {
    fock_state(0, dim)
}

/// Kronecker product of registers; mode dimensions are concatenated.
pub fn tensor(regs: &[&FockRegister]) -> Result<FockRegister, FockError> {
    let (first, rest) = regs
        .split_first()
        .ok_or_else(|| FockError::InvalidState("tensor of zero registers".into()))?;
    let mut acc = (*first).clone();
    for r in rest {
        let mut dims = acc.mode_dims.clone();
        dims.extend_from_slice(&r.mode_dims);
        let data = match (&acc.data, &r.data) {
            (FockData::Pure(a), FockData::Pure(b)) => {
                let nb = b.len();
                FockData::Pure(Array1::from_shape_fn(a.len() * nb, |k| {
                    a[k / nb] * b[k % nb]
                }))
            }
            (FockData::Density(a), FockData::Density(b)) => {
                let nb = b.nrows();
                let n = a.nrows() * nb;
                FockData::Density(Array2::from_shape_fn((n, n), |(i, j)| {
                    a[[i / nb, j / nb]] * b[[i % nb, j % nb]]
                }))
            }
            _ => return Err(FockError::MixedRepresentation),
        };
        acc = FockRegister {
            mode_dims: dims,
            data,
            truncation_tail: acc.truncation_tail + r.truncation_tail,
        };
    }
    Ok(acc)
}

/// Normalized superposition `Σ c_k |ψ_k⟩` of pure registers on the same
/// modes; also returns the squared norm before normalization.
pub fn superpose(terms: &[(Complex64, &FockRegister)]) -> Result<(FockRegister, f64), FockError> {
    let (_, head) = terms
        .first()
        .ok_or_else(|| FockError::InvalidState("empty superposition".into()))?;
    let dims = head.mode_dims.clone();
    let mut acc = Array1::<Complex64>::zeros(head.total_dim());
    let mut tail = 0.0;
    for (c, reg) in terms {
        if reg.mode_dims != dims {
            return Err(FockError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                reg.mode_dims, dims
            )));
        }
        let v = reg.amplitudes().ok_or(FockError::MixedRepresentation)?;
        acc.scaled_add(*c, v);
        tail += reg.truncation_tail;
    }
    let (reg, n) = FockRegister::normalized(dims, acc)?;
    Ok((reg.with_truncation_tail(tail), n))
}

/// A single-mode operator and the mode it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    pub mode_index: usize,
    pub matrix: Array2<Complex64>,
}

/// Full-register embedding of an operator.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddedOperator {
    Dense(Array2<Complex64>),
    Sparse(CsrMatrix),
}

impl EmbeddedOperator {
    pub fn to_dense(&self) -> Array2<Complex64> {
        match self {
            EmbeddedOperator::Dense(m) => m.clone(),
            EmbeddedOperator::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> CsrMatrix {
        match self {
            EmbeddedOperator::Dense(m) => CsrMatrix::from_dense(m),
            EmbeddedOperator::Sparse(s) => s.clone(),
        }
    }
}

impl ModeOperator {
    /// Annihilation operator: `⟨n−1|a|n⟩ = √n`.
    pub fn annihilation(mode_index: usize, dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        for n in 1..dim {
            m[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        Self {
            mode_index,
            matrix: m,
        }
    }

    pub fn creation(mode_index: usize, dim: usize) -> Self {
        Self::annihilation(mode_index, dim).adjoint()
    }

    pub fn number(mode_index: usize, dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        for n in 0..dim {
            m[[n, n]] = Complex64::new(n as f64, 0.0);
        }
        Self {
            mode_index,
            matrix: m,
        }
    }

    pub fn identity(mode_index: usize, dim: usize) -> Self {
        Self {
            mode_index,
            matrix: Array2::eye(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mode_index: self.mode_index,
            matrix: self.matrix.t().mapv(|z| z.conj()),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            mode_index: self.mode_index,
            matrix: self.matrix.mapv(|z| z * s),
        }
    }

    fn check(&self, dims: &[usize]) -> Result<(), FockError> {
        match dims.get(self.mode_index) {
            None => Err(FockError::DimensionMismatch(format!(
                "mode {} out of range for {} modes",
                self.mode_index,
                dims.len()
            ))),
            Some(&d) if d != self.dim() => Err(FockError::DimensionMismatch(format!(
                "operator dim {} != mode {} dim {d}",
                self.dim(),
                self.mode_index
            ))),
            _ => Ok(()),
        }
    }

    /// Embedding as a CSR matrix on the full register.
    pub fn embed_sparse(&self, dims: &[usize]) -> Result<CsrMatrix, FockError> {
        self.check(dims)?;
        let k = self.mode_index;
        let stride: usize = dims[k + 1..].iter().product();
        let left: usize = dims[..k].iter().product();
        let dk = dims[k];
        let total = left * dk * stride;
        let mut trip = Vec::new();
        for ((i, j), v) in self.matrix.indexed_iter() {
            if *v == ZERO {
                continue;
            }
            for l in 0..left {
                for r in 0..stride {
                    trip.push((
                        l * dk * stride + i * stride + r,
                        l * dk * stride + j * stride + r,
                        *v,
                    ));
                }
            }
        }
        Ok(CsrMatrix::from_triplets(total, total, trip))
    }

    pub fn embed_dense(&self, dims: &[usize]) -> Result<Array2<Complex64>, FockError> {
        Ok(self.embed_sparse(dims)?.to_dense())
    }

    /// Dense for registers of at most two modes, CSR otherwise.
    pub fn embed(&self, dims: &[usize]) -> Result<EmbeddedOperator, FockError> {
        if dims.len() <= 2 {
            self.embed_dense(dims).map(EmbeddedOperator::Dense)
        } else {
            self.embed_sparse(dims).map(EmbeddedOperator::Sparse)
        }
    }

    /// Apply to the row index of `x` (shape `D × ncols`) without building
    /// the embedding.
    fn apply_left(&self, dims: &[usize], x: &Array2<Complex64>) -> Array2<Complex64> {
        let k = self.mode_index;
        let stride: usize = dims[k + 1..].iter().product();
        let left: usize = dims[..k].iter().product();
        let dk = dims[k];
        let mut out = Array2::zeros(x.raw_dim());
        for ((i, j), v) in self.matrix.indexed_iter() {
            if *v == ZERO {
                continue;
            }
            for l in 0..left {
                let base = l * dk * stride;
                for r in 0..stride {
                    let src = base + j * stride + r;
                    let dst = base + i * stride + r;
                    let row = x.row(src);
                    out.row_mut(dst).scaled_add(*v, &row);
                }
            }
        }
        out
    }
}

/// Full-register embedding of an ordered operator product `O_1 O_2 … O_n`.
pub fn embed_product(ops: &[ModeOperator], dims: &[usize]) -> Result<CsrMatrix, FockError> {
    let total: usize = dims.iter().product();
    let mut acc = CsrMatrix::identity(total);
    for op in ops {
        acc = acc.matmul(&op.embed_sparse(dims)?);
    }
    Ok(acc)
}

/// `⟨ψ|O_1 O_2 … O_n|ψ⟩` or `Tr(ρ O_1 O_2 … O_n)`.
pub fn expectation(
    reg: &FockRegister,
    op_product: &[ModeOperator],
) -> Result<Complex64, FockError> {
    for op in op_product {
        op.check(&reg.mode_dims)?;
    }
    match &reg.data {
        FockData::Pure(psi) => {
            let mut w = psi.clone().insert_axis(Axis(1));
            for op in op_product.iter().rev() {
                w = op.apply_left(&reg.mode_dims, &w);
            }
            Ok(psi.iter().zip(w.column(0)).map(|(a, b)| a.conj() * b).sum())
        }
        FockData::Density(rho) => {
            let mut w = rho.clone();
            for op in op_product.iter().rev() {
                w = op.apply_left(&reg.mode_dims, &w);
            }
            Ok(w.diag().sum())
        }
    }
}

/// Reduced density operator over `keep_modes` (in ascending mode order).
/// Pure registers are reduced directly without forming the full density.
pub fn partial_trace(reg: &FockRegister, keep_modes: &[usize]) -> Result<FockRegister, FockError> {
    let m = reg.mode_dims.len();
    let mut keep: Vec<usize> = keep_modes.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= m) {
        return Err(FockError::DimensionMismatch(format!(
            "keep set {keep_modes:?} invalid for {m} modes"
        )));
    }
    let traced: Vec<usize> = (0..m).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| reg.mode_dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| reg.mode_dims[k]).collect();
    let nk: usize = kdims.iter().product();
    let nt: usize = tdims.iter().product();

    // full[a * nt + t] = flat index of (kept digits a, traced digits t)
    let mut full = vec![0usize; nk * nt];
    let mut digits = vec![0usize; m];
    for a in 0..nk {
        let da = basis_digits(a, &kdims);
        for t in 0..nt {
            let dt = basis_digits(t, &tdims);
            for (pos, &k) in keep.iter().enumerate() {
                digits[k] = da[pos];
            }
            for (pos, &k) in traced.iter().enumerate() {
                digits[k] = dt[pos];
            }
            full[a * nt + t] = basis_index(&digits, &reg.mode_dims);
        }
    }

    let reduced = match &reg.data {
        FockData::Pure(psi) => {
            let mat = Array2::from_shape_fn((nk, nt), |(a, t)| psi[full[a * nt + t]]);
            let adj = mat.t().mapv(|z| z.conj());
            mat.dot(&adj)
        }
        FockData::Density(rho) => Array2::from_shape_fn((nk, nk), |(a, b)| {
            (0..nt)
                .map(|t| rho[[full[a * nt + t], full[b * nt + t]]])
                .sum()
        }),
    };
    Ok(FockRegister::from_density_unchecked(kdims, reduced)
        .with_truncation_tail(reg.truncation_tail))
}
