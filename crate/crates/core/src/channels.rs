//! Completely positive trace-preserving maps in Kraus form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, diag, eig_hermitian, is_finite, max_abs_diff, tensor, ComplexMatrix, ComplexVector,
    SubsystemLayout, C64, ONE,
};
use crate::optimize::NelderMead;
use crate::states::{random_isometry_with, rng_from_seed, DensityMatrix, PureState};

/// Completeness tolerance used when none is given.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Largest input dimension accepted by [`QuantumChannel::tensor_power`].
pub const DEFAULT_DIM_CAP: usize = 64;

/// Label of the environment created by [`QuantumChannel::isometric_extension`].
pub const ENV_LABEL: &str = "E";

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
    input_layout: SubsystemLayout,
    output_layout: SubsystemLayout,
}

fn completeness_error(kraus: &[ComplexMatrix], din: usize) -> f64 {
    let mut sum = ComplexMatrix::zeros(din, din);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    max_abs_diff(&sum, &linalg::identity(din))
}

fn check_kraus_shapes(
    kraus: &[ComplexMatrix],
    input_layout: &SubsystemLayout,
    output_layout: &SubsystemLayout,
) -> Result<()> {
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("no Kraus operators".into()));
    }
    let (din, dout) = (input_layout.total_dim(), output_layout.total_dim());
    for k in kraus {
        if k.ncols() != din {
            return Err(Error::DimensionMismatch {
                expected: din,
                got: k.ncols(),
            });
        }
        if k.nrows() != dout {
            return Err(Error::DimensionMismatch {
                expected: dout,
                got: k.nrows(),
            });
        }
        if !is_finite(k) {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// Validated channel `rho -> sum_k K rho K†`.
pub fn channel_from_kraus(
    kraus: Vec<ComplexMatrix>,
    input_layout: SubsystemLayout,
    output_layout: SubsystemLayout,
    tol: f64,
) -> Result<QuantumChannel> {
    check_kraus_shapes(&kraus, &input_layout, &output_layout)?;
    let err = completeness_error(&kraus, input_layout.total_dim());
    if err > tol {
        return Err(Error::NotTracePreserving(err));
    }
    Ok(QuantumChannel {
        kraus,
        input_layout,
        output_layout,
    })
}

/// Picks `base`, or `base` with primes appended, avoiding `taken`.
fn fresh_label(base: &str, taken: &SubsystemLayout) -> String {
    let mut label = base.to_string();
    while taken.contains(&label) {
        label.push('\'');
    }
    label
}

/// Applies `kraus` (acting on the channel input factors) to `m` on `layout`,
/// leaving every other factor untouched. Returns the output matrix and its
/// layout `(untouched factors..., output factors...)`.
fn apply_extended(
    kraus: &[ComplexMatrix],
    input_layout: &SubsystemLayout,
    output_layout: &SubsystemLayout,
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    for l in input_layout.labels() {
        let d = layout.dim_of(l)?;
        if d != input_layout.dim_of(l)? {
            return Err(Error::DimensionMismatch {
                expected: input_layout.dim_of(l)?,
                got: d,
            });
        }
    }
    let kept: Vec<&str> = layout
        .labels()
        .iter()
        .map(String::as_str)
        .filter(|l| !input_layout.contains(l))
        .collect();
    let mut order = kept.clone();
    order.extend(input_layout.label_refs());
    let (permuted, _) = linalg::permute_subsystems(m, layout, &order)?;
    let out_layout = if kept.is_empty() {
        output_layout.clone()
    } else {
        layout.select(&kept)?.concat(output_layout)?
    };
    let dk: usize = out_layout.total_dim() / output_layout.total_dim();
    let id = linalg::identity(dk);
    let mut out = ComplexMatrix::zeros(out_layout.total_dim(), out_layout.total_dim());
    for k in kraus {
        let full = tensor(&id, k);
        out += &full * &permuted * full.adjoint();
    }
    Ok((out, out_layout))
}

impl QuantumChannel {
    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            kraus: vec![linalg::identity(d)],
            output_layout: layout.clone(),
            input_layout: layout,
        }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn din(&self) -> usize {
        self.input_layout.total_dim()
    }

    pub fn dout(&self) -> usize {
        self.output_layout.total_dim()
    }

    pub fn input_layout(&self) -> &SubsystemLayout {
        &self.input_layout
    }

    pub fn output_layout(&self) -> &SubsystemLayout {
        &self.output_layout
    }

    /// Same Kraus operators on renamed layouts of equal dimensions.
    pub fn with_layouts(self, input: SubsystemLayout, output: SubsystemLayout) -> Result<Self> {
        if input.total_dim() != self.din() || output.total_dim() != self.dout() {
            return Err(Error::DimensionMismatch {
                expected: self.din(),
                got: input.total_dim(),
            });
        }
        Ok(Self {
            kraus: self.kraus,
            input_layout: input,
            output_layout: output,
        })
    }

    /// `sum_k K m K†` on a bare matrix of dimension `din`.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.din() || m.ncols() != self.din() {
            return Err(Error::DimensionMismatch {
                expected: self.din(),
                got: m.nrows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dout(), self.dout());
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    /// Applies the channel to the factors of `rho` named by the input layout,
    /// acting as the identity on every other factor. The result is laid out
    /// as `(other factors in their original order, output factors)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let (m, layout) = apply_extended(
            &self.kraus,
            &self.input_layout,
            &self.output_layout,
            rho.matrix(),
            rho.layout(),
        )?;
        Ok(DensityMatrix::from_trusted(m, layout))
    }

    /// Stinespring dilation `V = sum_k K_k ⊗ |k>_E`, environment indexed by
    /// Kraus order.
    pub fn isometric_extension(&self) -> Isometry {
        let denv = self.kraus.len();
        let (din, dout) = (self.din(), self.dout());
        let mut v = ComplexMatrix::zeros(dout * denv, din);
        for (k, op) in self.kraus.iter().enumerate() {
            for b in 0..dout {
                for i in 0..din {
                    v[(b * denv + k, i)] = op[(b, i)];
                }
            }
        }
        let env = fresh_label(ENV_LABEL, &self.output_layout);
        let output_layout = self
            .output_layout
            .concat(&SubsystemLayout::single(denv, &env))
            .expect("fresh environment label");
        Isometry {
            matrix: v,
            denv,
            input_layout: self.input_layout.clone(),
            output_layout,
        }
    }

    /// `rho -> tr_B (V rho V†)` onto the environment of
    /// [`Self::isometric_extension`].
    pub fn complementary(&self) -> QuantumChannel {
        let denv = self.kraus.len();
        let (din, dout) = (self.din(), self.dout());
        let kraus = (0..dout)
            .map(|b| ComplexMatrix::from_fn(denv, din, |k, i| self.kraus[k][(b, i)]))
            .collect();
        QuantumChannel {
            kraus,
            input_layout: self.input_layout.clone(),
            output_layout: SubsystemLayout::single(denv, ENV_LABEL),
        }
    }

    /// Unnormalized Choi matrix `sum_ij |i><j| ⊗ N(|i><j|)`, input first.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let (din, dout) = (self.din(), self.dout());
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for k in &self.kraus {
            let v = ComplexVector::from_fn(din * dout, |idx, _| k[(idx % dout, idx / dout)]);
            choi += &v * v.adjoint();
        }
        choi
    }

    /// `after ∘ self`
    pub fn then(&self, after: &QuantumChannel) -> Result<QuantumChannel> {
        compose(after, self)
    }

    /// Parallel composition; input and output labels must stay distinct.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor(a, b));
            }
        }
        Ok(QuantumChannel {
            kraus,
            input_layout: self.input_layout.concat(&other.input_layout)?,
            output_layout: self.output_layout.concat(&other.output_layout)?,
        })
    }

    /// `k`-fold parallel copies with the default dimension cap.
    pub fn tensor_power(&self, k: usize) -> Result<QuantumChannel> {
        self.tensor_power_capped(k, DEFAULT_DIM_CAP)
    }

    /// Copy `j` (1-based) of every factor label `L` is renamed `L#j`, and
    /// factors are ordered copy by copy.
    pub fn tensor_power_capped(&self, k: usize, cap: usize) -> Result<QuantumChannel> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor power needs k >= 1".into()));
        }
        let dim = (self.din() as u128).saturating_pow(k as u32);
        if dim > cap as u128 {
            return Err(Error::CapExceeded {
                dim: dim.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let copy = |j: usize| -> Result<QuantumChannel> {
            let rename = |layout: &SubsystemLayout| {
                SubsystemLayout::new(
                    layout.dims().to_vec(),
                    layout.labels().iter().map(|l| format!("{l}#{j}")).collect(),
                )
            };
            Ok(QuantumChannel {
                kraus: self.kraus.clone(),
                input_layout: rename(&self.input_layout)?,
                output_layout: rename(&self.output_layout)?,
            })
        };
        let mut acc = copy(1)?;
        for j in 2..=k {
            acc = acc.tensor(&copy(j)?)?;
        }
        Ok(acc)
    }

    /// Output `U N(rho) U†`, e.g. a relabelling of an environment basis.
    pub fn rotate_output(&self, u: &ComplexMatrix) -> Result<QuantumChannel> {
        if u.nrows() != self.dout() || u.ncols() != self.dout() {
            return Err(Error::DimensionMismatch {
                expected: self.dout(),
                got: u.nrows(),
            });
        }
        Ok(QuantumChannel {
            kraus: self.kraus.iter().map(|k| u * k).collect(),
            input_layout: self.input_layout.clone(),
            output_layout: self.output_layout.clone(),
        })
    }
}

/// `outer ∘ inner`
pub fn compose(outer: &QuantumChannel, inner: &QuantumChannel) -> Result<QuantumChannel> {
    if outer.din() != inner.dout() {
        return Err(Error::DimensionMismatch {
            expected: inner.dout(),
            got: outer.din(),
        });
    }
    let mut kraus = Vec::with_capacity(outer.kraus.len() * inner.kraus.len());
    for a in &outer.kraus {
        for b in &inner.kraus {
            kraus.push(a * b);
        }
    }
    Ok(QuantumChannel {
        kraus,
        input_layout: inner.input_layout.clone(),
        output_layout: outer.output_layout.clone(),
    })
}

/// Max-entry distance between Choi matrices.
pub fn channel_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.din() != b.din() {
        return Err(Error::DimensionMismatch {
            expected: a.din(),
            got: b.din(),
        });
    }
    if a.dout() != b.dout() {
        return Err(Error::DimensionMismatch {
            expected: a.dout(),
            got: b.dout(),
        });
    }
    Ok(max_abs_diff(&a.choi_matrix(), &b.choi_matrix()))
}

/// Isometry `V: A' -> B E` with `V†V = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    pub matrix: ComplexMatrix,
    pub denv: usize,
    pub input_layout: SubsystemLayout,
    /// Channel output factors followed by the environment.
    pub output_layout: SubsystemLayout,
}

impl Isometry {
    pub fn env_label(&self) -> &str {
        self.output_layout
            .labels()
            .last()
            .expect("environment factor")
    }

    pub fn isometry_error(&self) -> f64 {
        max_abs_diff(
            &(self.matrix.adjoint() * &self.matrix),
            &linalg::identity(self.matrix.ncols()),
        )
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let (m, layout) = apply_extended(
            std::slice::from_ref(&self.matrix),
            &self.input_layout,
            &self.output_layout,
            rho.matrix(),
            rho.layout(),
        )?;
        Ok(DensityMatrix::from_trusted(m, layout))
    }

    /// `(1 ⊗ V)|psi>` with the same factor convention as
    /// [`QuantumChannel::apply`].
    pub fn apply_pure(&self, psi: &PureState) -> Result<PureState> {
        let layout = psi.layout();
        for l in self.input_layout.labels() {
            if layout.dim_of(l)? != self.input_layout.dim_of(l)? {
                return Err(Error::DimensionMismatch {
                    expected: self.input_layout.dim_of(l)?,
                    got: layout.dim_of(l)?,
                });
            }
        }
        let kept: Vec<&str> = layout
            .labels()
            .iter()
            .map(String::as_str)
            .filter(|l| !self.input_layout.contains(l))
            .collect();
        let mut order = kept.clone();
        order.extend(self.input_layout.label_refs());
        let front = psi.permute(&order)?;
        let din = self.input_layout.total_dim();
        let dk = front.dim() / din;
        let dout = self.matrix.nrows();
        let amps = front.amplitudes();
        let mut out = ComplexVector::zeros(dk * dout);
        for a in 0..dk {
            let block = amps.rows(a * din, din);
            let image = &self.matrix * block;
            out.rows_mut(a * dout, dout).copy_from(&image);
        }
        let out_layout = if kept.is_empty() {
            self.output_layout.clone()
        } else {
            layout.select(&kept)?.concat(&self.output_layout)?
        };
        Ok(PureState::from_trusted(out, out_layout))
    }
}

/// Collection of CP maps (one per classical outcome) summing to a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumInstrument {
    components: Vec<Vec<ComplexMatrix>>,
    input_layout: SubsystemLayout,
    output_layout: SubsystemLayout,
}

impl QuantumInstrument {
    pub fn new(
        components: Vec<Vec<ComplexMatrix>>,
        input_layout: SubsystemLayout,
        output_layout: SubsystemLayout,
        tol: f64,
    ) -> Result<Self> {
        if components.is_empty() || components.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument(
                "instrument components need Kraus operators".into(),
            ));
        }
        let all: Vec<ComplexMatrix> = components.iter().flatten().cloned().collect();
        check_kraus_shapes(&all, &input_layout, &output_layout)?;
        let err = completeness_error(&all, input_layout.total_dim());
        if err > tol {
            return Err(Error::NotTracePreserving(err));
        }
        Ok(Self {
            components,
            input_layout,
            output_layout,
        })
    }

    /// Single-outcome instrument.
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self {
            components: vec![ch.kraus.clone()],
            input_layout: ch.input_layout.clone(),
            output_layout: ch.output_layout.clone(),
        }
    }

    pub fn components(&self) -> &[Vec<ComplexMatrix>] {
        &self.components
    }

    pub fn num_outcomes(&self) -> usize {
        self.components.len()
    }

    pub fn input_layout(&self) -> &SubsystemLayout {
        &self.input_layout
    }

    pub fn output_layout(&self) -> &SubsystemLayout {
        &self.output_layout
    }

    /// Unnormalized output `N_x(rho)` with identity on non-input factors.
    pub fn apply_component(
        &self,
        x: usize,
        rho: &DensityMatrix,
    ) -> Result<(ComplexMatrix, SubsystemLayout)> {
        let kraus = self
            .components
            .get(x)
            .ok_or_else(|| Error::InvalidArgument(format!("no outcome {x}")))?;
        apply_extended(
            kraus,
            &self.input_layout,
            &self.output_layout,
            rho.matrix(),
            rho.layout(),
        )
    }

    /// The trace-preserving map `sum_x N_x`.
    pub fn total_channel(&self) -> QuantumChannel {
        QuantumChannel {
            kraus: self.components.iter().flatten().cloned().collect(),
            input_layout: self.input_layout.clone(),
            output_layout: self.output_layout.clone(),
        }
    }

    /// Completeness deviation of the summed components.
    pub fn completeness_error(&self) -> f64 {
        let all: Vec<ComplexMatrix> = self.components.iter().flatten().cloned().collect();
        completeness_error(&all, self.input_layout.total_dim())
    }
}

fn sigma_z() -> ComplexMatrix {
    diag(&[1.0, -1.0])
}

fn mac_layout(da: usize, db: usize) -> SubsystemLayout {
    SubsystemLayout::new(vec![da, db], vec!["A'", "B'"]).expect("distinct labels")
}

/// Multiple-access erasure channel `A'(2) B'(d) -> C(d+1)`.
///
/// Alice's qubit is measured in the computational basis. On `0` Charlie
/// receives `|0>`; on `1` Bob's input is carried to `span{|1>..|d>}`:
/// `N(tau ⊗ rho) = tau_00 |0><0| + tau_11 rho`. Kraus operators are
/// `|0><0|<j|` for each `j`, then the embedding `sum_i |i><1|<i|`.
pub fn erasure_mac(d: usize) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "erasure channel needs d >= 2, got {d}"
        )));
    }
    let (din, dout) = (2 * d, d + 1);
    let mut kraus = Vec::with_capacity(d + 1);
    for j in 0..d {
        let mut k = ComplexMatrix::zeros(dout, din);
        k[(0, j)] = ONE;
        kraus.push(k);
    }
    let mut embed = ComplexMatrix::zeros(dout, din);
    for i in 0..d {
        embed[(i + 1, d + i)] = ONE;
    }
    kraus.push(embed);
    channel_from_kraus(
        kraus,
        mac_layout(2, d),
        SubsystemLayout::single(dout, "C"),
        CHANNEL_TOL,
    )
}

/// The erasure channel read as an instrument that also reports Alice's
/// measurement outcome (0 = erased, 1 = transmitted).
pub fn erasure_mac_instrument(d: usize) -> Result<QuantumInstrument> {
    let ch = erasure_mac(d)?;
    let mut kraus = ch.kraus.clone();
    let transmit = kraus.pop().expect("d+1 operators");
    QuantumInstrument::new(
        vec![kraus, vec![transmit]],
        ch.input_layout.clone(),
        ch.output_layout.clone(),
        CHANNEL_TOL,
    )
}

/// `N_p(rho) = (1-p) rho + p (Z⊗Z) rho (Z⊗Z)` on two qubits, output `C`
/// of dimension 4.
pub fn collective_phase_flip(p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "flip probability {p} outside [0, 1]"
        )));
    }
    let zz = tensor(&sigma_z(), &sigma_z());
    let kraus = vec![
        linalg::identity(4).scale((1.0 - p).sqrt()),
        zz.scale(p.sqrt()),
    ];
    channel_from_kraus(
        kraus,
        mac_layout(2, 2),
        SubsystemLayout::single(4, "C"),
        CHANNEL_TOL,
    )
}

/// Degrading map `C -> E` for [`collective_phase_flip`]: measure the `Z⊗Z`
/// parity and prepare `sqrt(1-p)|0> ± sqrt(p)|1>` accordingly. Matches the
/// environment basis of [`QuantumChannel::complementary`].
pub fn phase_flip_degrading_map(p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "flip probability {p} outside [0, 1]"
        )));
    }
    let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
    let even = [a, b];
    let odd = [a, -b];
    let mut kraus = Vec::with_capacity(4);
    for (basis_index, v) in [(0, even), (3, even), (1, odd), (2, odd)] {
        let mut k = ComplexMatrix::zeros(2, 4);
        k[(0, basis_index)] = c(v[0], 0.0);
        k[(1, basis_index)] = c(v[1], 0.0);
        kraus.push(k);
    }
    channel_from_kraus(
        kraus,
        SubsystemLayout::single(4, "C"),
        SubsystemLayout::single(2, ENV_LABEL),
        CHANNEL_TOL,
    )
}

/// Qubit dephasing `{sqrt(1-p) I, sqrt(p) Z}`.
pub fn dephasing(p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "dephasing probability {p} outside [0, 1]"
        )));
    }
    channel_from_kraus(
        vec![
            linalg::identity(2).scale((1.0 - p).sqrt()),
            sigma_z().scale(p.sqrt()),
        ],
        SubsystemLayout::single(2, "A'"),
        SubsystemLayout::single(2, "B"),
        CHANNEL_TOL,
    )
}

/// Complete dephasing in the computational basis `{|j><j|}`.
pub fn full_dephasing(d: usize) -> QuantumChannel {
    let kraus = (0..d)
        .map(|j| {
            let mut k = ComplexMatrix::zeros(d, d);
            k[(j, j)] = ONE;
            k
        })
        .collect();
    QuantumChannel {
        kraus,
        input_layout: SubsystemLayout::single(d, "A'"),
        output_layout: SubsystemLayout::single(d, "B"),
    }
}

/// Discards the input and prepares `|0>` in dimension `dout`.
pub fn trace_and_prepare(
    input_layout: SubsystemLayout,
    dout: usize,
    label: &str,
) -> QuantumChannel {
    let din = input_layout.total_dim();
    let kraus = (0..din)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(dout, din);
            k[(0, i)] = ONE;
            k
        })
        .collect();
    QuantumChannel {
        kraus,
        input_layout,
        output_layout: SubsystemLayout::single(dout, label),
    }
}

/// Outcome of a degradability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradingCheck {
    pub degrades: bool,
    /// Choi distance between `D ∘ N` and the complement (infinite when the
    /// output dimensions differ).
    pub residual: f64,
}

/// Tests `D ∘ N = U N_c U†`, where `env_alignment` (default identity)
/// relabels the environment basis of the complementary channel.
pub fn check_degrading(
    n: &QuantumChannel,
    d: &QuantumChannel,
    tol: f64,
    env_alignment: Option<&ComplexMatrix>,
) -> Result<DegradingCheck> {
    let degraded = compose(d, n)?;
    let mut comp = n.complementary();
    if let Some(u) = env_alignment {
        comp = comp.rotate_output(u)?;
    }
    if degraded.dout() != comp.dout() {
        return Ok(DegradingCheck {
            degrades: false,
            residual: f64::INFINITY,
        });
    }
    let residual = channel_distance(&degraded, &comp)?;
    Ok(DegradingCheck {
        degrades: residual <= tol,
        residual,
    })
}

/// `exp(i H)` for the Hermitian `H` packed in `d^2` reals (diagonal first,
/// then real and imaginary parts of the strict upper triangle).
pub fn unitary_from_params(params: &[f64], d: usize) -> ComplexMatrix {
    assert_eq!(
        params.len(),
        d * d,
        "unitary parameterization needs d^2 reals"
    );
    let mut h = ComplexMatrix::zeros(d, d);
    let mut it = params.iter();
    for i in 0..d {
        h[(i, i)] = c(*it.next().unwrap(), 0.0);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(*it.next().unwrap(), *it.next().unwrap());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    let eig = eig_hermitian(&h, 1e-9).expect("hermitian by construction");
    let mut scaled = eig.vectors.clone();
    for (k, &l) in eig.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, l);
        for i in 0..d {
            scaled[(i, k)] *= phase;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Searches the environment relabelling unitary minimizing the degrading
/// residual. Returns the best unitary and its check.
pub fn search_degrading_alignment(
    n: &QuantumChannel,
    d: &QuantumChannel,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<(ComplexMatrix, DegradingCheck)> {
    use rand::Rng;
    let denv = n.kraus.len();
    let base = check_degrading(n, d, tol, None)?;
    if !base.residual.is_finite() {
        return Ok((linalg::identity(denv), base));
    }
    let degraded_choi = compose(d, n)?.choi_matrix();
    let comp = n.complementary();
    let objective = |x: &[f64]| {
        let u = unitary_from_params(x, denv);
        comp.rotate_output(&u)
            .map(|r| max_abs_diff(&degraded_choi, &r.choi_matrix()))
            .unwrap_or(f64::INFINITY)
    };
    let nm = NelderMead {
        max_iters: 4000,
        tolerance: 1e-14,
        ..Default::default()
    };
    let mut rng = rng_from_seed(seed);
    let mut best_point = vec![0.0; denv * denv];
    let mut best_value = objective(&best_point);
    for r in 0..restarts.max(1) {
        let x0: Vec<f64> = if r == 0 {
            best_point.clone()
        } else {
            (0..denv * denv)
                .map(|_| rng.random_range(-3.0..3.0))
                .collect()
        };
        let m = nm.minimize(objective, &x0);
        if m.value < best_value {
            best_value = m.value;
            best_point = m.point;
        }
    }
    let u = unitary_from_params(&best_point, denv);
    let check = check_degrading(n, d, tol, Some(&u))?;
    Ok((u, check))
}

/// Random channel `C^din -> C^dout` obtained by tracing the environment of
/// a random isometry into `dout * denv` dimensions.
pub fn random_channel_with<R: rand::Rng + ?Sized>(
    rng: &mut R,
    din: usize,
    dout: usize,
    denv: usize,
) -> QuantumChannel {
    assert!(dout * denv >= din, "dilation too small for an isometry");
    let v = random_isometry_with(rng, din, dout * denv);
    let kraus = (0..denv)
        .map(|k| ComplexMatrix::from_fn(dout, din, |b, i| v[(b * denv + k, i)]))
        .collect();
    QuantumChannel {
        kraus,
        input_layout: SubsystemLayout::single(din, "A'"),
        output_layout: SubsystemLayout::single(dout, "B"),
    }
}

/// Measures in the computational basis and keeps the post-measurement state.
pub fn measure_and_keep(d: usize) -> QuantumInstrument {
    let components = (0..d)
        .map(|j| {
            let mut k = ComplexMatrix::zeros(d, d);
            k[(j, j)] = ONE;
            vec![k]
        })
        .collect();
    QuantumInstrument {
        components,
        input_layout: SubsystemLayout::single(d, "A'"),
        output_layout: SubsystemLayout::single(d, "B"),
    }
}
