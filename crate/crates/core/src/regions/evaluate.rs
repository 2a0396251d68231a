//! Single-letter information quantities of a two-sender channel.
//!
//! Everything is computed from the purified output `(1 ⊗ V)|input⟩`, where
//! `V` is the isometric extension, stored as a `(dout·denv) × dref` matrix
//! `W = V · In` whose column-major data is the pure state on
//! `[references.., C, E]`. Marginals on `C`, `E` and `RC` are contracted
//! straight out of `W`; this path is the optimizer's inner loop.

use serde::{Deserialize, Serialize};

use super::Pentagon;
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::information::{matrix_entropy, spectrum_entropy};
use crate::linalg::{pure_marginal_spectrum, ComplexMatrix, ComplexVector, SubsystemLayout, ZERO};
use crate::states::{validate_distribution, CqEnsemble, CqqState, DensityMatrix, PureState};

/// Splits the channel input factors into Alice's and Bob's by base label
/// (the part before `#`, so tensor powers keep their owners). The first
/// base seen belongs to Alice.
pub fn mac_split(layout: &SubsystemLayout) -> Result<(Vec<usize>, Vec<usize>)> {
    let base = |l: &str| l.split('#').next().unwrap_or(l).to_string();
    let labels = layout.labels();
    let mut bases: Vec<String> = Vec::new();
    for l in labels {
        let b = base(l);
        if !bases.contains(&b) {
            bases.push(b);
        }
    }
    if bases.len() != 2 {
        return Err(Error::Layout(format!(
            "a two-sender channel needs exactly two input parties, found {:?}",
            bases
        )));
    }
    let alice = (0..labels.len())
        .filter(|&i| base(&labels[i]) == bases[0])
        .collect();
    let bob = (0..labels.len())
        .filter(|&i| base(&labels[i]) == bases[1])
        .collect();
    Ok((alice, bob))
}

/// Dilation of a two-sender channel with Alice/Bob index bookkeeping.
#[derive(Debug, Clone)]
pub struct MacGeometry {
    pub iso: ComplexMatrix,
    pub din: usize,
    pub dout: usize,
    pub denv: usize,
    pub alice_dim: usize,
    pub bob_dim: usize,
    pub alice_labels: Vec<String>,
    pub bob_labels: Vec<String>,
    /// `index[a * bob_dim + b]` is the channel input index of `|a⟩|b⟩`.
    index: Vec<usize>,
}

impl MacGeometry {
    pub fn new(ch: &QuantumChannel) -> Result<Self> {
        let layout = ch.input_layout();
        let (alice, bob) = mac_split(layout)?;
        let dims = layout.dims();
        let alice_dim: usize = alice.iter().map(|&i| dims[i]).product();
        let bob_dim: usize = bob.iter().map(|&i| dims[i]).product();
        let din = ch.din();
        let mut index = vec![0; din];
        for i in 0..din {
            // big-endian digits of i
            let mut digits = vec![0; dims.len()];
            let mut rest = i;
            for f in (0..dims.len()).rev() {
                digits[f] = rest % dims[f];
                rest /= dims[f];
            }
            let a = alice.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            let b = bob.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            index[a * bob_dim + b] = i;
        }
        let iso = ch.isometric_extension();
        Ok(Self {
            denv: iso.denv,
            iso: iso.matrix,
            din,
            dout: ch.dout(),
            alice_dim,
            bob_dim,
            alice_labels: alice.iter().map(|&i| layout.labels()[i].clone()).collect(),
            bob_labels: bob.iter().map(|&i| layout.labels()[i].clone()).collect(),
            index,
        })
    }

    /// Channel input index of Alice's `a` and Bob's `b`.
    pub fn input_index(&self, a: usize, b: usize) -> usize {
        self.index[a * self.bob_dim + b]
    }

    fn dilate(&self, input: &ComplexMatrix) -> ComplexMatrix {
        &self.iso * input
    }

    /// `W` for Alice's pure `phi` and Bob's reference matrix `m[r, b]`.
    fn dilate_cq(&self, phi: &ComplexVector, m: &ComplexMatrix) -> ComplexMatrix {
        let dref = m.nrows();
        let mut input = ComplexMatrix::zeros(self.din, dref);
        for a in 0..self.alice_dim {
            if phi[a] == ZERO {
                continue;
            }
            for b in 0..self.bob_dim {
                let i = self.input_index(a, b);
                for r in 0..dref {
                    input[(i, r)] = phi[a] * m[(r, b)];
                }
            }
        }
        self.dilate(&input)
    }

    /// `W` for `psi_a[ra, a]` and `psi_b[rb, b]`, columns indexed `ra·drb + rb`.
    fn dilate_qq(&self, psi_a: &ComplexMatrix, psi_b: &ComplexMatrix) -> ComplexMatrix {
        let (dra, drb) = (psi_a.nrows(), psi_b.nrows());
        let mut input = ComplexMatrix::zeros(self.din, dra * drb);
        for a in 0..self.alice_dim {
            for b in 0..self.bob_dim {
                let i = self.input_index(a, b);
                for ra in 0..dra {
                    let x = psi_a[(ra, a)];
                    if x == ZERO {
                        continue;
                    }
                    for rb in 0..drb {
                        input[(i, ra * drb + rb)] = x * psi_b[(rb, b)];
                    }
                }
            }
        }
        self.dilate(&input)
    }

    fn rho_c(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let (dout, denv) = (self.dout, self.denv);
        let mut rho = ComplexMatrix::zeros(dout, dout);
        for r in 0..w.ncols() {
            let col = w.column(r);
            for c in 0..dout {
                for c2 in 0..=c {
                    let mut s = ZERO;
                    for k in 0..denv {
                        s += col[c * denv + k] * col[c2 * denv + k].conj();
                    }
                    rho[(c, c2)] += s;
                }
            }
        }
        hermitian_fill(&mut rho);
        rho
    }

    fn rho_e(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let (dout, denv) = (self.dout, self.denv);
        let mut rho = ComplexMatrix::zeros(denv, denv);
        for r in 0..w.ncols() {
            let col = w.column(r);
            for k in 0..denv {
                for k2 in 0..=k {
                    let mut s = ZERO;
                    for c in 0..dout {
                        s += col[c * denv + k] * col[c * denv + k2].conj();
                    }
                    rho[(k, k2)] += s;
                }
            }
        }
        hermitian_fill(&mut rho);
        rho
    }

    /// Marginal on (reference, C), reference index major.
    fn rho_rc(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let (dout, denv, dref) = (self.dout, self.denv, w.ncols());
        let mut g = ComplexMatrix::zeros(dref * dout, denv);
        for r in 0..dref {
            for c in 0..dout {
                for k in 0..denv {
                    g[(r * dout + c, k)] = w[(c * denv + k, r)];
                }
            }
        }
        &g * g.adjoint()
    }
}

fn hermitian_fill(m: &mut ComplexMatrix) {
    for i in 0..m.nrows() {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

/// CQ input: Alice's ensemble `{p_x, |phi_x⟩}` and Bob's purified input
/// `reference[r, b]` (amplitude of `|r⟩|b⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct CqInput {
    pub probs: Vec<f64>,
    pub states: Vec<ComplexVector>,
    pub reference: ComplexMatrix,
}

impl CqInput {
    /// Reads an ensemble whose reference state has the reference factor first.
    pub fn from_ensemble(ens: &CqEnsemble) -> Result<Self> {
        let psi = ens.reference();
        let dref = psi.layout().dims()[0];
        let db = psi.dim() / dref;
        let amps = psi.amplitudes();
        Ok(Self {
            probs: ens.probs().to_vec(),
            states: ens
                .states()
                .iter()
                .map(|s| s.amplitudes().clone())
                .collect(),
            reference: ComplexMatrix::from_fn(dref, db, |r, b| amps[r * db + b]),
        })
    }

    /// Product input for two independent uses (first use most significant).
    pub fn tensor(&self, other: &CqInput) -> CqInput {
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        let mut states = Vec::with_capacity(probs.capacity());
        for (p, s) in self.probs.iter().zip(&self.states) {
            for (q, t) in other.probs.iter().zip(&other.states) {
                probs.push(p * q);
                states.push(s.kronecker(t));
            }
        }
        CqInput {
            probs,
            states,
            reference: self.reference.kronecker(&other.reference),
        }
    }

    fn check(&self, geo: &MacGeometry) -> Result<()> {
        validate_distribution(&self.probs)?;
        if self.states.len() != self.probs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {} states",
                self.probs.len(),
                self.states.len()
            )));
        }
        if let Some(s) = self.states.iter().find(|s| s.len() != geo.alice_dim) {
            return Err(Error::DimensionMismatch {
                expected: geo.alice_dim,
                got: s.len(),
            });
        }
        if self.reference.ncols() != geo.bob_dim {
            return Err(Error::DimensionMismatch {
                expected: geo.bob_dim,
                got: self.reference.ncols(),
            });
        }
        Ok(())
    }
}

/// Raw (unclamped) CQ information quantities; `B` is Bob's reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqValues {
    /// `I(X;C)`
    pub mutual_c: f64,
    /// `I_c(B⟩CX)`
    pub coherent_cx: f64,
    /// `I(X;BC)`
    pub mutual_bc: f64,
    /// `I_c(B⟩C)`
    pub coherent_c: f64,
}

impl CqValues {
    pub fn rectangle(&self) -> Pentagon {
        Pentagon::rectangle(self.mutual_c, self.coherent_cx)
    }

    pub fn pentagon(&self) -> Pentagon {
        Pentagon::new(
            self.mutual_bc,
            self.coherent_cx,
            self.mutual_c + self.coherent_cx,
        )
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            mutual_c: self.mutual_c * f,
            coherent_cx: self.coherent_cx * f,
            mutual_bc: self.mutual_bc * f,
            coherent_c: self.coherent_c * f,
        }
    }
}

/// Rectangle and pentagon with negatives clamped to zero, plus raw values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqPoint {
    pub rectangle: Pentagon,
    pub pentagon: Pentagon,
    pub values: CqValues,
}

fn clamp(p: Pentagon) -> Pentagon {
    Pentagon::new(p.a_max.max(0.0), p.b_max.max(0.0), p.sum_max.max(0.0))
}

/// `(I(X;C), I_c(B⟩CX))` only: the optimizer objective.
pub(crate) fn cq_rectangle_fast(geo: &MacGeometry, input: &CqInput) -> Result<(f64, f64)> {
    let mut avg_c = ComplexMatrix::zeros(geo.dout, geo.dout);
    let (mut h_c, mut h_e) = (0.0, 0.0);
    for (p, phi) in input.probs.iter().zip(&input.states) {
        if *p <= 0.0 {
            continue;
        }
        let w = geo.dilate_cq(phi, &input.reference);
        let rc = geo.rho_c(&w);
        h_c += p * matrix_entropy(&rc)?;
        h_e += p * matrix_entropy(&geo.rho_e(&w))?;
        avg_c += rc * crate::linalg::c(*p, 0.0);
    }
    Ok((matrix_entropy(&avg_c)? - h_c, h_c - h_e))
}

pub(crate) fn cq_values_geo(geo: &MacGeometry, input: &CqInput) -> Result<CqValues> {
    input.check(geo)?;
    let dref = input.reference.nrows();
    let mut avg_c = ComplexMatrix::zeros(geo.dout, geo.dout);
    let mut avg_rc = ComplexMatrix::zeros(dref * geo.dout, dref * geo.dout);
    let (mut h_c, mut h_e) = (0.0, 0.0);
    for (p, phi) in input.probs.iter().zip(&input.states) {
        if *p <= 0.0 {
            continue;
        }
        let w = geo.dilate_cq(phi, &input.reference);
        let pc = crate::linalg::c(*p, 0.0);
        let rc = geo.rho_c(&w);
        h_c += p * matrix_entropy(&rc)?;
        // H(E) = H(BC) on the pure block
        h_e += p * matrix_entropy(&geo.rho_e(&w))?;
        avg_c += rc * pc;
        avg_rc += geo.rho_rc(&w) * pc;
    }
    let s_c = matrix_entropy(&avg_c)?;
    let s_rc = matrix_entropy(&avg_rc)?;
    Ok(CqValues {
        mutual_c: s_c - h_c,
        coherent_cx: h_c - h_e,
        mutual_bc: s_rc - h_e,
        coherent_c: s_c - s_rc,
    })
}

/// Raw CQ values of an already-decoded input.
pub fn cq_input_values(ch: &QuantumChannel, input: &CqInput) -> Result<CqValues> {
    cq_values_geo(&MacGeometry::new(ch)?, input)
}

/// Raw QQ values of an already-decoded input.
pub fn qq_input_values(ch: &QuantumChannel, input: &QqInput) -> Result<QqValues> {
    qq_values_geo(&MacGeometry::new(ch)?, input)
}

/// Raw CQ values of `ens` through `ch`.
pub fn cq_values(ch: &QuantumChannel, ens: &CqEnsemble) -> Result<CqValues> {
    let geo = MacGeometry::new(ch)?;
    cq_values_geo(&geo, &CqInput::from_ensemble(ens)?)
}

/// Rectangle `(I(X;C), I_c(B⟩CX))` and pentagon
/// `(I(X;BC), I_c(B⟩CX), I(X;C) + I_c(B⟩CX))` of the state
/// `Σ p(x)|x⟩⟨x| ⊗ N(phi_x ⊗ Psi)`.
pub fn cq_point(ch: &QuantumChannel, ens: &CqEnsemble) -> Result<CqPoint> {
    let values = cq_values(ch, ens)?;
    Ok(CqPoint {
        rectangle: clamp(values.rectangle()),
        pentagon: clamp(values.pentagon()),
        values,
    })
}

/// The cqq state `Σ p(x)|x⟩⟨x| ⊗ (1 ⊗ N)(phi_x ⊗ Psi)` with blocks on
/// `[B, outputs..]`, built by applying the channel's Kraus operators to
/// density matrices (independent of the dilation path).
pub fn cq_state(ch: &QuantumChannel, ens: &CqEnsemble) -> Result<CqqState> {
    let geo = MacGeometry::new(ch)?;
    let input = CqInput::from_ensemble(ens)?;
    input.check(&geo)?;
    let in_layout = ch.input_layout();
    let (alice, bob) = mac_split(in_layout)?;
    let reference = if in_layout.contains("B") || ch.output_layout().contains("B") {
        "B~"
    } else {
        "B"
    };
    let mut dims = Vec::new();
    let mut labels = Vec::new();
    for &i in &alice {
        dims.push(in_layout.dims()[i]);
        labels.push(in_layout.labels()[i].clone());
    }
    dims.push(input.reference.nrows());
    labels.push(reference.to_string());
    for &i in &bob {
        dims.push(in_layout.dims()[i]);
        labels.push(in_layout.labels()[i].clone());
    }
    let layout = SubsystemLayout::new(dims, labels)?;
    let psi = ComplexVector::from_iterator(
        input.reference.len(),
        (0..input.reference.nrows())
            .flat_map(|r| (0..geo.bob_dim).map(move |b| (r, b)))
            .map(|(r, b)| input.reference[(r, b)]),
    );
    let mut blocks = Vec::with_capacity(input.probs.len());
    for phi in &input.states {
        let state = PureState::new(phi.kronecker(&psi), layout.clone())?;
        let out = ch.apply(&state.projector())?;
        let mut order = vec![reference];
        order.extend(ch.output_layout().labels().iter().map(String::as_str));
        blocks.push(out.permute(&order)?);
    }
    CqqState::new(input.probs.clone(), blocks)
}

/// QQ input: `psi_a[ra, a]` on Alice's reference and input, likewise Bob.
#[derive(Debug, Clone, PartialEq)]
pub struct QqInput {
    pub psi_a: ComplexMatrix,
    pub psi_b: ComplexMatrix,
}

fn state_matrix(psi: &PureState) -> ComplexMatrix {
    let dref = psi.layout().dims()[0];
    let din = psi.dim() / dref;
    let amps = psi.amplitudes();
    ComplexMatrix::from_fn(dref, din, |r, i| amps[r * din + i])
}

impl QqInput {
    /// Both states have their reference factor first.
    pub fn from_states(psi1: &PureState, psi2: &PureState) -> Self {
        Self {
            psi_a: state_matrix(psi1),
            psi_b: state_matrix(psi2),
        }
    }

    pub fn tensor(&self, other: &QqInput) -> QqInput {
        QqInput {
            psi_a: self.psi_a.kronecker(&other.psi_a),
            psi_b: self.psi_b.kronecker(&other.psi_b),
        }
    }

    fn check(&self, geo: &MacGeometry) -> Result<()> {
        if self.psi_a.ncols() != geo.alice_dim {
            return Err(Error::DimensionMismatch {
                expected: geo.alice_dim,
                got: self.psi_a.ncols(),
            });
        }
        if self.psi_b.ncols() != geo.bob_dim {
            return Err(Error::DimensionMismatch {
                expected: geo.bob_dim,
                got: self.psi_b.ncols(),
            });
        }
        Ok(())
    }
}

/// Raw coherent informations of `σ^{ABC}`; `A`, `B` are the references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqValues {
    /// `I_c(A⟩BC)`
    pub a_bc: f64,
    /// `I_c(B⟩AC)`
    pub b_ac: f64,
    /// `I_c(AB⟩C)`
    pub ab_c: f64,
    /// `I_c(A⟩C)`
    pub a_c: f64,
    /// `I_c(B⟩C)`
    pub b_c: f64,
}

impl QqValues {
    pub fn pentagon(&self) -> Pentagon {
        Pentagon::new(self.a_bc, self.b_ac, self.ab_c)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            a_bc: self.a_bc * f,
            b_ac: self.b_ac * f,
            ab_c: self.ab_c * f,
            a_c: self.a_c * f,
            b_c: self.b_c * f,
        }
    }
}

fn qq_layout(dra: usize, drb: usize, geo: &MacGeometry) -> SubsystemLayout {
    SubsystemLayout::new(vec![dra, drb, geo.dout, geo.denv], vec!["A", "B", "C", "E"])
        .expect("distinct labels")
}

pub(crate) fn qq_values_geo(geo: &MacGeometry, input: &QqInput) -> Result<QqValues> {
    input.check(geo)?;
    let (dra, drb) = (input.psi_a.nrows(), input.psi_b.nrows());
    let w = geo.dilate_qq(&input.psi_a, &input.psi_b);
    let h_c = matrix_entropy(&geo.rho_c(&w))?;
    let h_e = matrix_entropy(&geo.rho_e(&w))?;
    let layout = qq_layout(dra, drb, geo);
    let v = ComplexVector::from_column_slice(w.as_slice());
    let h_ae = spectrum_entropy(&pure_marginal_spectrum(&v, &layout, &["A", "E"])?);
    let h_be = spectrum_entropy(&pure_marginal_spectrum(&v, &layout, &["B", "E"])?);
    // on the pure state ABCE: H(BC) = H(AE), H(ABC) = H(E), H(AC) = H(BE)
    Ok(QqValues {
        a_bc: h_ae - h_e,
        b_ac: h_be - h_e,
        ab_c: h_c - h_e,
        a_c: h_c - h_be,
        b_c: h_c - h_ae,
    })
}

pub fn qq_values(ch: &QuantumChannel, psi1: &PureState, psi2: &PureState) -> Result<QqValues> {
    let geo = MacGeometry::new(ch)?;
    qq_values_geo(&geo, &QqInput::from_states(psi1, psi2))
}

/// Raw pentagon `(I_c(A⟩BC), I_c(B⟩AC), I_c(AB⟩C))` of
/// `(1 ⊗ N)(psi1 ⊗ psi2)`; each state has its reference factor first.
pub fn qq_corners(ch: &QuantumChannel, psi1: &PureState, psi2: &PureState) -> Result<Pentagon> {
    qq_values(ch, psi1, psi2).map(|v| v.pentagon())
}

/// The state `σ^{ABC}` on `[A, B, outputs..]` via Kraus operators.
pub fn qq_state(ch: &QuantumChannel, psi1: &PureState, psi2: &PureState) -> Result<DensityMatrix> {
    let geo = MacGeometry::new(ch)?;
    let input = QqInput::from_states(psi1, psi2);
    input.check(&geo)?;
    let in_layout = ch.input_layout();
    let (alice, bob) = mac_split(in_layout)?;
    let (ra, rb) = ("A", "B");
    if in_layout.contains(ra) || in_layout.contains(rb) {
        return Err(Error::Layout(
            "channel inputs may not be named A or B".into(),
        ));
    }
    let mut dims = vec![input.psi_a.nrows()];
    let mut labels = vec![ra.to_string()];
    for &i in &alice {
        dims.push(in_layout.dims()[i]);
        labels.push(in_layout.labels()[i].clone());
    }
    dims.push(input.psi_b.nrows());
    labels.push(rb.to_string());
    for &i in &bob {
        dims.push(in_layout.dims()[i]);
        labels.push(in_layout.labels()[i].clone());
    }
    let flat = |m: &ComplexMatrix| {
        ComplexVector::from_iterator(
            m.len(),
            (0..m.nrows())
                .flat_map(|r| (0..m.ncols()).map(move |i| (r, i)))
                .map(|(r, i)| m[(r, i)]),
        )
    };
    let amps = flat(&input.psi_a).kronecker(&flat(&input.psi_b));
    let state = PureState::new(amps, SubsystemLayout::new(dims, labels)?)?;
    let out = ch.apply(&state.projector())?;
    let mut order = vec![ra, rb];
    order.extend(ch.output_layout().labels().iter().map(String::as_str));
    out.permute(&order)
}

/// Pure-state ensemble `{p(x), |psi_x⟩}` on a reference and one sender's
/// input, stored as `states[x][r, i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteEnsemble {
    pub probs: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
}

impl BipartiteEnsemble {
    /// States have their reference factor first.
    pub fn new(probs: Vec<f64>, states: &[PureState]) -> Result<Self> {
        validate_distribution(&probs)?;
        if probs.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        let states: Vec<ComplexMatrix> = states.iter().map(state_matrix).collect();
        if let Some(first) = states.first() {
            if let Some(bad) = states.iter().find(|s| s.shape() != first.shape()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        Ok(Self { probs, states })
    }
}

/// The six bounds on `(r, s, R, S)` evaluated on
/// `Σ p(x)p(y)|x⟩⟨x| ⊗ |y⟩⟨y| ⊗ N(psi_x ⊗ phi_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimultaneousBounds {
    /// `I(X;C|Y)`
    pub r: f64,
    /// `I(Y;C|X)`
    pub s: f64,
    /// `I(XY;C)`
    pub r_plus_s: f64,
    /// `I_c(A⟩BCXY)`
    pub big_r: f64,
    /// `I_c(B⟩ACXY)`
    pub big_s: f64,
    /// `I_c(AB⟩CXY)`
    pub big_r_plus_big_s: f64,
}

pub fn simultaneous_bounds(
    ch: &QuantumChannel,
    ens_a: &BipartiteEnsemble,
    ens_b: &BipartiteEnsemble,
) -> Result<SimultaneousBounds> {
    let geo = MacGeometry::new(ch)?;
    let (nx, ny) = (ens_a.probs.len(), ens_b.probs.len());
    let dout = geo.dout;
    // rho^C per (x, y) and entropies
    let mut rho_c = vec![vec![ComplexMatrix::zeros(dout, dout); ny]; nx];
    let mut h_c = vec![vec![0.0; ny]; nx];
    let (mut big_r, mut big_s, mut big_rs) = (0.0, 0.0, 0.0);
    for x in 0..nx {
        for y in 0..ny {
            let input = QqInput {
                psi_a: ens_a.states[x].clone(),
                psi_b: ens_b.states[y].clone(),
            };
            let v = qq_values_geo(&geo, &input)?;
            let w = geo.dilate_qq(&input.psi_a, &input.psi_b);
            rho_c[x][y] = geo.rho_c(&w);
            h_c[x][y] = matrix_entropy(&rho_c[x][y])?;
            let pxy = ens_a.probs[x] * ens_b.probs[y];
            big_r += pxy * v.a_bc;
            big_s += pxy * v.b_ac;
            big_rs += pxy * v.ab_c;
        }
    }
    let mix = |terms: &mut dyn Iterator<Item = (f64, &ComplexMatrix)>| -> Result<f64> {
        let mut m = ComplexMatrix::zeros(dout, dout);
        for (p, r) in terms {
            m += r * crate::linalg::c(p, 0.0);
        }
        matrix_entropy(&m)
    };
    let avg_h: f64 = ens_a
        .probs
        .iter()
        .zip(&h_c)
        .map(|(pa, row)| {
            pa * ens_b
                .probs
                .iter()
                .zip(row)
                .map(|(pb, h)| pb * h)
                .sum::<f64>()
        })
        .sum();
    // I(X;C|Y) = Σ_y p(y) [H(Σ_x p(x) ρ_xy) - Σ_x p(x) H(ρ_xy)]
    let mut r = 0.0;
    for (y, pb) in ens_b.probs.iter().enumerate() {
        let h = mix(&mut ens_a
            .probs
            .iter()
            .zip(&rho_c)
            .map(|(pa, row)| (*pa, &row[y])))?;
        r += pb * h;
    }
    r -= avg_h;
    let mut s = 0.0;
    for (pa, row) in ens_a.probs.iter().zip(&rho_c) {
        let h = mix(&mut ens_b.probs.iter().copied().zip(row))?;
        s += pa * h;
    }
    s -= avg_h;
    let total = mix(&mut (0..nx)
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .map(|(x, y)| (ens_a.probs[x] * ens_b.probs[y], &rho_c[x][y])))?;
    Ok(SimultaneousBounds {
        r,
        s,
        r_plus_s: total - avg_h,
        big_r,
        big_s,
        big_r_plus_big_s: big_rs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{collective_phase_flip, erasure_mac};
    use crate::information::{
        binary_entropy, coherent_information_between, conditional_coherent_information,
        mutual_information_between, Direction,
    };
    use crate::linalg::c;
    use crate::states::{maximally_entangled_on, random_pure_with, rng_from_seed, CLASSICAL_LABEL};

    fn erasure_ensemble(q: f64, d: usize) -> CqEnsemble {
        CqEnsemble::new(
            vec![q, 1.0 - q],
            vec![
                PureState::basis(2, 0, "A'").unwrap(),
                PureState::basis(2, 1, "A'").unwrap(),
            ],
            maximally_entangled_on(d, "B", "B'").unwrap(),
        )
        .unwrap()
    }

    fn bell_plus() -> PureState {
        maximally_entangled_on(2, "R", "A'").unwrap()
    }

    #[test]
    fn erasure_rectangle_matches_closed_form() {
        for d in [2, 3] {
            let ch = erasure_mac(d).unwrap();
            for q in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
                let pt = cq_point(&ch, &erasure_ensemble(q, d)).unwrap();
                let h = binary_entropy(q).unwrap().0;
                let s = (1.0 - 2.0 * q) * (d as f64).log2();
                assert!((pt.rectangle.a_max - h).abs() < 1e-9, "q={q}");
                assert!((pt.rectangle.b_max - s).abs() < 1e-9, "q={q}");
                // the pentagon corner stays inside the rectangle for erasure
                let v = pt.values;
                assert!(v.mutual_bc + v.coherent_c - v.mutual_c - v.coherent_cx < 1e-9);
                assert!(Pentagon::rectangle(v.mutual_c, v.coherent_cx)
                    .contains(RatePointCheck::corner(&pt.pentagon), 1e-9));
            }
        }
    }

    struct RatePointCheck;
    impl RatePointCheck {
        fn corner(p: &Pentagon) -> super::super::RatePoint {
            super::super::RatePoint(p.sum_max - p.b_max, p.b_max)
        }
    }

    #[test]
    fn constant_label_gives_zero_classical_rate() {
        let ch = erasure_mac(2).unwrap();
        let ens = CqEnsemble::new(
            vec![1.0],
            vec![PureState::basis(2, 1, "A'").unwrap()],
            maximally_entangled_on(2, "B", "B'").unwrap(),
        )
        .unwrap();
        let v = cq_values(&ch, &ens).unwrap();
        assert!(v.mutual_c.abs() < 1e-12);
        assert!((v.coherent_cx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_route_matches_density_route() {
        let mut rng = rng_from_seed(3);
        let ch = erasure_mac(2).unwrap();
        let mut states = Vec::new();
        for _ in 0..3 {
            let s = random_pure_with(&mut rng, 2).unwrap();
            states.push(
                PureState::new(s.amplitudes().clone(), SubsystemLayout::single(2, "A'")).unwrap(),
            );
        }
        let r = random_pure_with(&mut rng, 4).unwrap();
        let reference = PureState::new(
            r.amplitudes().clone(),
            SubsystemLayout::new(vec![2, 2], vec!["B", "B'"]).unwrap(),
        )
        .unwrap();
        let ens = CqEnsemble::new(vec![0.2, 0.5, 0.3], states, reference).unwrap();
        let v = cq_values(&ch, &ens).unwrap();
        let cqq = cq_state(&ch, &ens).unwrap();
        let sigma = cqq.assemble();
        let x = CLASSICAL_LABEL;
        let i_xc = mutual_information_between(&sigma, &[x], &["C"]).unwrap().0;
        let i_xbc = mutual_information_between(&sigma, &[x], &["B", "C"])
            .unwrap()
            .0;
        let ic_cx = conditional_coherent_information(&cqq, Direction::FirstToSecond)
            .unwrap()
            .0;
        let ic_c = coherent_information_between(&sigma, &["B"], &["C"])
            .unwrap()
            .0;
        assert!((v.mutual_c - i_xc).abs() < 1e-9);
        assert!((v.mutual_bc - i_xbc).abs() < 1e-9);
        assert!((v.coherent_cx - ic_cx).abs() < 1e-9);
        assert!((v.coherent_c - ic_c).abs() < 1e-9);
        assert!((v.mutual_c + v.coherent_cx - v.mutual_bc - v.coherent_c).abs() < 1e-9);
    }

    #[test]
    fn phase_flip_pentagon() {
        for p in [0.0, 0.1, 0.25, 0.5] {
            let ch = collective_phase_flip(p).unwrap();
            let v = qq_values(
                &ch,
                &bell_plus(),
                &maximally_entangled_on(2, "S", "B'").unwrap(),
            )
            .unwrap();
            let h = binary_entropy(p).unwrap().0;
            assert!((v.a_bc - 1.0).abs() < 1e-9);
            assert!((v.b_ac - 1.0).abs() < 1e-9);
            assert!((v.ab_c - (2.0 - h)).abs() < 1e-9);
            assert!((v.a_c + v.b_ac - v.ab_c).abs() < 1e-9);
            assert!((v.b_c + v.a_bc - v.ab_c).abs() < 1e-9);
        }
    }

    #[test]
    fn qq_dilation_route_matches_density_route() {
        let mut rng = rng_from_seed(9);
        let ch = collective_phase_flip(0.3).unwrap();
        let mk = |rng: &mut _, l: &str| {
            let s = random_pure_with(rng, 4).unwrap();
            PureState::new(
                s.amplitudes().clone(),
                SubsystemLayout::new(vec![2, 2], vec!["R", l]).unwrap(),
            )
            .unwrap()
        };
        let (p1, p2) = (mk(&mut rng, "A'"), mk(&mut rng, "B'"));
        let v = qq_values(&ch, &p1, &p2).unwrap();
        let sigma = qq_state(&ch, &p1, &p2).unwrap();
        let ic = |a: &[&str], b: &[&str]| coherent_information_between(&sigma, a, b).unwrap().0;
        assert!((v.a_bc - ic(&["A"], &["B", "C"])).abs() < 1e-9);
        assert!((v.b_ac - ic(&["B"], &["A", "C"])).abs() < 1e-9);
        assert!((v.ab_c - ic(&["A", "B"], &["C"])).abs() < 1e-9);
        assert!((v.a_c - ic(&["A"], &["C"])).abs() < 1e-9);
    }

    #[test]
    fn unentangled_inputs_give_nonpositive_quantum_rates() {
        let ch = collective_phase_flip(0.1).unwrap();
        let prod = |l: &str| {
            PureState::new(
                ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
                SubsystemLayout::new(vec![2, 2], vec!["R", l]).unwrap(),
            )
            .unwrap()
        };
        let p = qq_corners(&ch, &prod("A'"), &prod("B'")).unwrap();
        assert!(p.a_max <= 1e-12 && p.b_max <= 1e-12 && p.sum_max <= 1e-12);
        assert!(p.is_empty());
    }

    #[test]
    fn simultaneous_bounds_reduce_to_known_cases() {
        let ch = collective_phase_flip(0.1).unwrap();
        let phi = |l: &str| maximally_entangled_on(2, "R", l).unwrap();
        let a = BipartiteEnsemble::new(vec![1.0], &[phi("A'")]).unwrap();
        let b = BipartiteEnsemble::new(vec![1.0], &[phi("B'")]).unwrap();
        let sb = simultaneous_bounds(&ch, &a, &b).unwrap();
        assert!(sb.r.abs() < 1e-12 && sb.s.abs() < 1e-12 && sb.r_plus_s.abs() < 1e-12);
        assert!((sb.big_r - 1.0).abs() < 1e-9);
        assert!((sb.big_r_plus_big_s - (2.0 - binary_entropy(0.1).unwrap().0)).abs() < 1e-9);

        // classical on A, entangled on B: cross-check against cq_point
        let q = 0.2;
        let ch = erasure_mac(2).unwrap();
        let basis = |i: usize| {
            let mut v = ComplexVector::zeros(2);
            v[i] = c(1.0, 0.0);
            PureState::new(
                v,
                SubsystemLayout::new(vec![1, 2], vec!["R", "A'"]).unwrap(),
            )
            .unwrap()
        };
        let a = BipartiteEnsemble::new(vec![q, 1.0 - q], &[basis(0), basis(1)]).unwrap();
        let b = BipartiteEnsemble::new(vec![1.0], &[maximally_entangled_on(2, "R", "B'").unwrap()])
            .unwrap();
        let sb = simultaneous_bounds(&ch, &a, &b).unwrap();
        let pt = cq_point(&ch, &erasure_ensemble(q, 2)).unwrap();
        assert!((sb.r - pt.values.mutual_c).abs() < 1e-9);
        assert!((sb.r - binary_entropy(q).unwrap().0).abs() < 1e-9);
        assert!((sb.big_s - (1.0 - 2.0 * q)).abs() < 1e-9);
        assert!((sb.big_s - pt.values.coherent_cx).abs() < 1e-9);
    }

    #[test]
    fn tensor_inputs_are_additive() {
        let ch = erasure_mac(2).unwrap();
        let ch2 = ch.tensor_power(2).unwrap();
        let (g1, g2) = (
            MacGeometry::new(&ch).unwrap(),
            MacGeometry::new(&ch2).unwrap(),
        );
        let a = CqInput::from_ensemble(&erasure_ensemble(0.1, 2)).unwrap();
        let b = CqInput::from_ensemble(&erasure_ensemble(0.4, 2)).unwrap();
        let va = cq_values_geo(&g1, &a).unwrap();
        let vb = cq_values_geo(&g1, &b).unwrap();
        let vab = cq_values_geo(&g2, &a.tensor(&b)).unwrap();
        assert!((vab.mutual_c - va.mutual_c - vb.mutual_c).abs() < 1e-9);
        assert!((vab.coherent_cx - va.coherent_cx - vb.coherent_cx).abs() < 1e-9);
        let fast = cq_rectangle_fast(&g2, &a.tensor(&b)).unwrap();
        assert!((fast.0 - vab.mutual_c).abs() < 1e-12 && (fast.1 - vab.coherent_cx).abs() < 1e-12);
    }
}
