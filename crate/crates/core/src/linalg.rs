//! Dense complex linear algebra over labelled tensor-product spaces.
//!
//! Subsystem indices are row-major and big-endian: for factors with
//! dimensions `(d_0, .., d_{n-1})` the basis vector `|i_0 .. i_{n-1}>` sits at
//! `sum_k i_k * prod_{j>k} d_j`. Every module follows this convention, and
//! factor order is written `(X, A, B, C)` wherever those systems appear.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Eigenvalues in `[-EIG_CLAMP, 0)` are treated as numerical zeros.
pub const EIG_CLAMP: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Ordered tensor factors with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.len() != labels.len() {
            return Err(Error::Layout(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.is_empty() {
            return Err(Error::Layout("layout has no factors".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::Layout(format!("zero subsystem dimension {d}")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Layout(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// Single-factor layout.
    pub fn single(dim: usize, label: &str) -> Self {
        Self::new(vec![dim.max(1)], vec![label]).expect("single factor layout")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Product of the dimensions of the named factors.
    pub fn dim_of_all(&self, labels: &[&str]) -> Result<usize> {
        labels
            .iter()
            .try_fold(1, |acc, l| Ok(acc * self.dim_of(l)?))
    }

    /// Concatenation `self ⊗ other`; labels must stay distinct.
    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(dims, labels)
    }

    /// Sub-layout of the named factors, kept in this layout's order.
    pub fn select(&self, keep: &[&str]) -> Result<Self> {
        let positions = self.keep_positions(keep)?;
        Self::new(
            positions.iter().map(|&p| self.dims[p]).collect(),
            positions.iter().map(|&p| self.labels[p].clone()).collect(),
        )
    }

    /// Layout in exactly the given label order (must be a permutation).
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Layout(format!(
                "reorder needs {} labels, got {}",
                self.len(),
                order.len()
            )));
        }
        let dims = order
            .iter()
            .map(|l| self.dim_of(l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, order.to_vec())
    }

    /// Returns a copy with `old` renamed to `new`.
    pub fn relabel(&self, old: &str, new: &str) -> Result<Self> {
        let p = self.position(old)?;
        let mut labels = self.labels.clone();
        labels[p] = new.to_string();
        Self::new(self.dims.clone(), labels)
    }

    pub fn label_refs(&self) -> Vec<&str> {
        self.labels.iter().map(String::as_str).collect()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    fn keep_positions(&self, keep: &[&str]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::Layout("empty set of kept subsystems".into()));
        }
        let mut positions = Vec::with_capacity(keep.len());
        for l in keep {
            let p = self.position(l)?;
            if positions.contains(&p) {
                return Err(Error::Layout(format!("label `{l}` listed twice")));
            }
            positions.push(p);
        }
        positions.sort_unstable();
        Ok(positions)
    }

    /// Table mapping `(kept_index, traced_index)` to the full index, with the
    /// kept factors at `positions` (ascending).
    fn split_table(&self, positions: &[usize]) -> (usize, usize, Vec<usize>) {
        let strides = self.strides();
        let traced: Vec<usize> = (0..self.len()).filter(|p| !positions.contains(p)).collect();
        let dk: usize = positions.iter().map(|&p| self.dims[p]).product();
        let dt: usize = traced.iter().map(|&p| self.dims[p]).product();
        let offsets = |ps: &[usize], n: usize| -> Vec<usize> {
            (0..n)
                .map(|mut idx| {
                    let mut off = 0;
                    for &p in ps.iter().rev() {
                        let d = self.dims[p];
                        off += (idx % d) * strides[p];
                        idx /= d;
                    }
                    off
                })
                .collect()
        };
        let kept_off = offsets(positions, dk);
        let traced_off = offsets(&traced, dt);
        let mut table = Vec::with_capacity(dk * dt);
        for ko in &kept_off {
            for to in &traced_off {
                table.push(ko + to);
            }
        }
        (dk, dt, table)
    }

    /// `map[new_index] = old_index` for a permutation of the factors.
    fn permutation_map(&self, order: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let n = self.total_dim();
        (0..n)
            .map(|mut idx| {
                let mut old = 0;
                for &p in order.iter().rev() {
                    let d = self.dims[p];
                    old += (idx % d) * strides[p];
                    idx /= d;
                }
                old
            })
            .collect()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.total_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: n,
            });
        }
        Ok(())
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry distance; infinite for mismatched shapes.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `|v><v|`
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Computational basis vector `|i>` in dimension `n`.
pub fn basis(n: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[i] = ONE;
    v
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

/// Kronecker product `a ⊗ b`, index `(i_a, i_b) -> i_a * dim_b + i_b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Tensor product of a list of matrices, left to right.
pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::from_element(1, 1, ONE), |acc, m| {
            tensor(&acc, m)
        })
}

/// Traces out every factor not named in `keep`. The result lives on the kept
/// factors in their original relative order.
pub fn partial_trace(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    let n = check_square(m)?;
    layout.check_dim(n)?;
    let positions = layout.keep_positions(keep)?;
    let (dk, dt, table) = layout.split_table(&positions);
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(table[a * dt + t], table[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reorders the tensor factors of a square matrix into `order`.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    let n = check_square(m)?;
    layout.check_dim(n)?;
    let new_layout = layout.reorder(order)?;
    let positions = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<Vec<_>>>()?;
    let map = layout.permutation_map(&positions);
    let out = ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]);
    Ok((out, new_layout))
}

/// Reorders the tensor factors of a state vector into `order`.
pub fn permute_vector(
    v: &ComplexVector,
    layout: &SubsystemLayout,
    order: &[&str],
) -> Result<(ComplexVector, SubsystemLayout)> {
    layout.check_dim(v.len())?;
    let new_layout = layout.reorder(order)?;
    let positions = order
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<Vec<_>>>()?;
    let map = layout.permutation_map(&positions);
    let out = ComplexVector::from_fn(v.len(), |i, _| v[map[i]]);
    Ok((out, new_layout))
}

/// Reduced density matrix `tr_rest |v><v|` on the kept factors.
pub fn reduce_pure(
    v: &ComplexVector,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    layout.check_dim(v.len())?;
    let positions = layout.keep_positions(keep)?;
    let (dk, dt, table) = layout.split_table(&positions);
    let m = ComplexMatrix::from_fn(dk, dt, |a, t| v[table[a * dt + t]]);
    Ok(&m * m.adjoint())
}

/// Nonzero spectrum of the reduced state on `keep`, computed on whichever of
/// the kept or traced sides is smaller (both share the nonzero spectrum).
pub fn pure_marginal_spectrum(
    v: &ComplexVector,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<Vec<f64>> {
    layout.check_dim(v.len())?;
    let positions = layout.keep_positions(keep)?;
    let (dk, dt, table) = layout.split_table(&positions);
    if dt == 1 {
        return Ok(vec![v.norm_squared()]);
    }
    let m = ComplexMatrix::from_fn(dk, dt, |a, t| v[table[a * dt + t]]);
    let gram = if dk <= dt {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    hermitian_eigenvalues(&gram)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V f(diag(λ)) V†`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, k)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn symmetric_eigen(h: &ComplexMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(hermitian_part(h), f64::EPSILON, 0).ok_or(Error::NoConvergence)
}

/// Eigendecomposition with eigenvalues sorted ascending.
pub fn eig_hermitian(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    check_square(h)?;
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let herr = hermiticity_error(h);
    if herr > tol {
        return Err(Error::NotHermitian(herr));
    }
    let eig = symmetric_eigen(h)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (unsorted), of the Hermitian part of `h`.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if h.nrows() == 1 {
        return Ok(vec![h[(0, 0)].re]);
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    Ok(hermitian_part(h)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect())
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(h, f64::INFINITY)?.map(f))
}

/// Square root of a positive semidefinite matrix.
pub fn psd_sqrt(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(p, 1e-9)?;
    if let Some(&min) = eig.values.first() {
        if min < -EIG_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == m.ncols() && hermiticity_error(m) < 1e-12 {
        if let Ok(vals) = hermitian_eigenvalues(m) {
            return vals.iter().map(|l| l.abs()).sum();
        }
    }
    m.clone().singular_values().iter().sum()
}
