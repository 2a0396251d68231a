//! Quantum states: validated density matrices, pure states, purifications,
//! cq ensembles and seeded random samplers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    self, basis, c, check_square, eig_hermitian, hermiticity_error, is_finite, outer, tensor,
    tensor_vec, ComplexMatrix, ComplexVector, SubsystemLayout, C64, ONE, ZERO,
};

/// Default validation tolerance for states.
pub const STATE_TOL: f64 = 1e-10;

/// Label given to the reference system created by [`purify`].
pub const REFERENCE_LABEL: &str = "R";

/// Label of the classical register in cq states.
pub const CLASSICAL_LABEL: &str = "X";

/// Unit-trace positive semidefinite matrix on a labelled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    layout: SubsystemLayout,
}

/// Validates `m` as a density matrix on `layout`. Eigenvalues in `[-tol, 0)`
/// are clamped to zero.
pub fn density_from_matrix(
    m: ComplexMatrix,
    layout: SubsystemLayout,
    tol: f64,
) -> Result<DensityMatrix> {
    let n = check_square(&m)?;
    if layout.total_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            got: n,
        });
    }
    if !is_finite(&m) {
        return Err(Error::NonFinite);
    }
    let herr = hermiticity_error(&m);
    if herr > tol {
        return Err(Error::NotHermitian(herr));
    }
    let tr = linalg::trace(&m).re;
    if (tr - 1.0).abs() > tol {
        return Err(Error::InvalidTrace(tr));
    }
    let eig = eig_hermitian(&m, tol)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NegativeEigenvalue(min));
    }
    let matrix = if min < 0.0 {
        eig.map(|l| l.max(0.0))
    } else {
        linalg::hermitian_part(&m)
    };
    Ok(DensityMatrix { matrix, layout })
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        density_from_matrix(m, layout, STATE_TOL)
    }

    /// Skips validation; only the Hermitian part of `m` is kept. For results
    /// of operations that preserve positivity and trace by construction.
    pub(crate) fn from_trusted(m: ComplexMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(m.nrows(), layout.total_dim());
        Self {
            matrix: linalg::hermitian_part(&m),
            layout,
        }
    }

    /// Density matrix on a single unlabelled factor `"S"`.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        let n = check_square(&m)?;
        Self::new(m, SubsystemLayout::single(n, "S"))
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self::from_trusted(linalg::identity(n).scale(1.0 / n as f64), layout)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn with_layout(self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: layout.total_dim(),
            });
        }
        Ok(Self {
            matrix: self.matrix,
            layout,
        })
    }

    /// Renames a single factor.
    pub fn relabel(self, old: &str, new: &str) -> Result<Self> {
        let layout = self.layout.relabel(old, new)?;
        Ok(Self {
            matrix: self.matrix,
            layout,
        })
    }

    /// Reduced state on the named factors.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let m = linalg::partial_trace(&self.matrix, &self.layout, keep)?;
        Ok(Self::from_trusted(m, self.layout.select(keep)?))
    }

    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        let (m, layout) = linalg::permute_subsystems(&self.matrix, &self.layout, order)?;
        Ok(Self { matrix: m, layout })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(Self::from_trusted(
            tensor(&self.matrix, &other.matrix),
            self.layout.concat(&other.layout)?,
        ))
    }

    /// `lambda * self + (1 - lambda) * other`
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::Layout("mixing states on different layouts".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda}")));
        }
        Ok(Self::from_trusted(
            self.matrix.scale(lambda) + other.matrix.scale(1.0 - lambda),
            self.layout.clone(),
        ))
    }

    /// `U rho U†`
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.nrows(),
            });
        }
        Ok(Self::from_trusted(
            u * &self.matrix * u.adjoint(),
            self.layout.clone(),
        ))
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, ascending, clamped at zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut vals = linalg::hermitian_eigenvalues(&self.matrix)?;
        vals.sort_by(f64::total_cmp);
        Ok(vals.into_iter().map(|l| l.max(0.0)).collect())
    }
}

/// Normalized state vector on a labelled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales to unit norm; a zero vector is rejected.
    pub fn normalized(amplitudes: ComplexVector, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub(crate) fn from_trusted(amplitudes: ComplexVector, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.total_dim());
        Self { amplitudes, layout }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize, label: &str) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        Ok(Self::from_trusted(
            basis(dim, index),
            SubsystemLayout::single(dim, label),
        ))
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn with_layout(self, layout: SubsystemLayout) -> Result<Self> {
        Self::new(self.amplitudes, layout)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(outer(&self.amplitudes), self.layout.clone())
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        Ok(Self::from_trusted(
            tensor_vec(&self.amplitudes, &other.amplitudes),
            self.layout.concat(&other.layout)?,
        ))
    }

    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        let (v, layout) = linalg::permute_vector(&self.amplitudes, &self.layout, order)?;
        Ok(Self::from_trusted(v, layout))
    }

    /// Reduced density matrix on the named factors.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let m = linalg::reduce_pure(&self.amplitudes, &self.layout, keep)?;
        Ok(DensityMatrix::from_trusted(m, self.layout.select(keep)?))
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }

    /// Applies `u` to the named factor.
    pub fn apply_local(&self, label: &str, u: &ComplexMatrix) -> Result<Self> {
        let order: Vec<String> = std::iter::once(label.to_string())
            .chain(self.layout.labels().iter().filter(|l| *l != label).cloned())
            .collect();
        let order_refs: Vec<&str> = order.iter().map(String::as_str).collect();
        let front = self.permute(&order_refs)?;
        let d = front.layout.dims()[0];
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.nrows(),
            });
        }
        let rest = front.dim() / d;
        let full = tensor(u, &linalg::identity(rest));
        let moved = Self::from_trusted(full * front.amplitudes, front.layout);
        moved.permute(&self.layout.label_refs())
    }
}

/// Purification `sum_i sqrt(l_i) |i>_R |v_i>` with eigenvalues in
/// descending order and the reference `R` first. The reference has the same
/// dimension as `rho`.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    purify_with_label(rho, REFERENCE_LABEL)
}

pub fn purify_with_label(rho: &DensityMatrix, reference: &str) -> Result<PureState> {
    let n = rho.dim();
    let eig = eig_hermitian(rho.matrix(), 1e-9)?;
    let mut amps = ComplexVector::zeros(n * n);
    for (i, k) in (0..n).rev().enumerate() {
        let w = eig.values[k].max(0.0).sqrt();
        for j in 0..n {
            amps[i * n + j] = eig.vectors[(j, k)] * w;
        }
    }
    let layout = SubsystemLayout::single(n, reference).concat(rho.layout())?;
    PureState::normalized(amps, layout)
}

/// `(1/sqrt d) sum_j |j>|j>` on factors `A` and `B`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    maximally_entangled_on(d, "A", "B")
}

pub fn maximally_entangled_on(d: usize, first: &str, second: &str) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut amps = ComplexVector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        amps[j * d + j] = c(a, 0.0);
    }
    let layout = SubsystemLayout::new(vec![d, d], vec![first, second])?;
    Ok(PureState::from_trusted(amps, layout))
}

/// Shift `X|j> = |j+1 mod d>`.
pub fn shift(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO })
}

/// Clock `Z|j> = w^j |j>` with `w = exp(2 pi i / d)`.
pub fn clock(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::from_polar(1.0, 2.0 * PI * i as f64 / d as f64)
        } else {
            ZERO
        }
    })
}

/// The `d^2` operators `X^a Z^b`, ordered with `a` outer and `b` inner.
pub fn weyl_unitaries(d: usize) -> Result<Vec<ComplexMatrix>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let x = shift(d);
    let z = clock(d);
    let mut out = Vec::with_capacity(d * d);
    let mut xa = linalg::identity(d);
    for _ in 0..d {
        let mut zb = linalg::identity(d);
        for _ in 0..d {
            out.push(&xa * &zb);
            zb = &zb * &z;
        }
        xa = &xa * &x;
    }
    Ok(out)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Complex Gaussian matrix with i.i.d. standard normal real and imaginary parts.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Unitarily invariant random pure state.
pub fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let v = ComplexVector::from_fn(dim, |_, _| gaussian_complex(rng));
    PureState::normalized(v, SubsystemLayout::single(dim, "S"))
}

pub fn random_pure(dim: usize, seed: u64) -> Result<PureState> {
    random_pure_with(&mut rng_from_seed(seed), dim)
}

/// `G G† / tr(G G†)` for a `dim x rank` complex Gaussian `G`.
pub fn random_density_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} must lie in 1..={dim}"
        )));
    }
    let g = gaussian_matrix(rng, dim, rank);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix::from_trusted(
        m.unscale(tr),
        SubsystemLayout::single(dim, "S"),
    ))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut rng_from_seed(seed), dim, rank)
}

/// Haar random unitary from Gram-Schmidt orthonormalization of a complex
/// Gaussian matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    orthonormalize_columns(g)
}

/// Random isometry `C^din -> C^dout` (first columns of a random unitary).
pub fn random_isometry_with<R: Rng + ?Sized>(
    rng: &mut R,
    din: usize,
    dout: usize,
) -> ComplexMatrix {
    assert!(dout >= din, "isometry needs dout >= din");
    let u = random_unitary_with(rng, dout);
    u.columns(0, din).into_owned()
}

fn orthonormalize_columns(mut m: ComplexMatrix) -> ComplexMatrix {
    let n = m.ncols();
    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let proj = m.column(j).dotc(&m.column(k));
                let cj = m.column(j).into_owned();
                let mut ck = m.column_mut(k);
                ck -= cj * proj;
            }
        }
        let norm = m.column(k).norm();
        m.column_mut(k).unscale_mut(norm);
    }
    m
}

/// Pure-state ensemble on Alice's input together with Bob's bipartite
/// reference state: the optimization variable of the CQ region.
#[derive(Debug, Clone, PartialEq)]
pub struct CqEnsemble {
    probs: Vec<f64>,
    states: Vec<PureState>,
    reference: PureState,
}

impl CqEnsemble {
    /// `reference` lives on `(B, B')`, reference factor first.
    pub fn new(probs: Vec<f64>, states: Vec<PureState>, reference: PureState) -> Result<Self> {
        validate_distribution(&probs)?;
        if probs.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if let Some(first) = states.first() {
            if let Some(bad) = states.iter().find(|s| s.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: bad.dim(),
                });
            }
        }
        if reference.layout().len() < 2 {
            return Err(Error::Layout(
                "reference state must be bipartite (reference, input)".into(),
            ));
        }
        Ok(Self {
            probs,
            states,
            reference,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn reference(&self) -> &PureState {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Sufficient ensemble size `min(|A'|, |C|)^2 + 1`.
pub fn cardinality_bound(alice_dim: usize, output_dim: usize) -> usize {
    let m = alice_dim.min(output_dim);
    m * m + 1
}

pub(crate) fn validate_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidArgument("empty distribution".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidArgument(format!("invalid probability {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(())
}

/// Classical label with conditional states on a shared quantum layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CqqState {
    pub probs: Vec<f64>,
    pub blocks: Vec<DensityMatrix>,
}

impl CqqState {
    pub fn new(probs: Vec<f64>, blocks: Vec<DensityMatrix>) -> Result<Self> {
        validate_distribution(&probs)?;
        if probs.len() != blocks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {} blocks",
                probs.len(),
                blocks.len()
            )));
        }
        let layout = blocks[0].layout();
        if blocks.iter().any(|b| b.layout() != layout) {
            return Err(Error::Layout("cq blocks must share one layout".into()));
        }
        if layout.contains(CLASSICAL_LABEL) {
            return Err(Error::Layout(format!(
                "block layout may not use the classical label `{CLASSICAL_LABEL}`"
            )));
        }
        Ok(Self { probs, blocks })
    }

    pub fn block_layout(&self) -> &SubsystemLayout {
        self.blocks[0].layout()
    }

    pub fn assemble(&self) -> DensityMatrix {
        let nx = self.probs.len();
        let db = self.blocks[0].dim();
        let mut m = ComplexMatrix::zeros(nx * db, nx * db);
        for (x, (p, b)) in self.probs.iter().zip(&self.blocks).enumerate() {
            m.view_mut((x * db, x * db), (db, db))
                .copy_from(&b.matrix().scale(*p));
        }
        let layout = SubsystemLayout::single(nx, CLASSICAL_LABEL)
            .concat(self.block_layout())
            .expect("classical label checked at construction");
        DensityMatrix::from_trusted(m, layout)
    }
}

/// `sum_x p(x) |x><x|_X ⊗ block_x`, classical register first.
pub fn assemble_cqq(probs: Vec<f64>, blocks: Vec<DensityMatrix>) -> Result<DensityMatrix> {
    Ok(CqqState::new(probs, blocks)?.assemble())
}

/// Splits a block-diagonal state whose first factor is the classical register.
pub fn split_cqq(m: &DensityMatrix) -> Result<CqqState> {
    let layout = m.layout();
    if layout.len() < 2 {
        return Err(Error::Layout(
            "cq state needs a classical factor and a quantum part".into(),
        ));
    }
    let nx = layout.dims()[0];
    let db = m.dim() / nx;
    let block_layout =
        SubsystemLayout::new(layout.dims()[1..].to_vec(), layout.labels()[1..].to_vec())?;
    let mat = m.matrix();
    let mut off_block: f64 = 0.0;
    for x in 0..nx {
        for y in 0..nx {
            if x != y {
                let v = mat.view((x * db, y * db), (db, db));
                off_block = off_block.max(v.iter().fold(0.0, |a, z| a.max(z.norm())));
            }
        }
    }
    if off_block > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "state is not block diagonal in the classical basis (off-block entry {off_block:e})"
        )));
    }
    let mut probs = Vec::with_capacity(nx);
    let mut blocks = Vec::with_capacity(nx);
    for x in 0..nx {
        let b = mat.view((x * db, x * db), (db, db)).into_owned();
        let p = linalg::trace(&b).re.max(0.0);
        probs.push(p);
        blocks.push(if p > 1e-15 {
            DensityMatrix::from_trusted(b.unscale(p), block_layout.clone())
        } else {
            DensityMatrix::maximally_mixed(block_layout.clone())
        });
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    CqqState::new(probs, blocks)
}

/// `min_theta |e^{i theta} a - b|`
#[doc(hidden)]
pub fn global_phase_distance(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let ov = a.dotc(b);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    (a * phase - b).norm()
}
