//! Entropic quantities, distance measures and the randomized inequality
//! suite.

mod suite;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::channels::{QuantumChannel, QuantumInstrument};
use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_hermitian, hermitian_eigenvalues, pure_marginal_spectrum, trace_norm, ComplexMatrix,
    SubsystemLayout,
};
use crate::states::{purify_with_label, CqqState, DensityMatrix, PureState, CLASSICAL_LABEL};

pub use suite::{run_property_suite, PropertyReport, SuiteConfig, Witness, CHECK_NAMES};

/// Eigenvalues at or below this are left out of entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// An information quantity in base-2 units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl From<Bits> for f64 {
    fn from(b: Bits) -> f64 {
        b.0
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl AddAssign for Bits {
    fn add_assign(&mut self, rhs: Bits) {
        self.0 += rhs.0;
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

impl Neg for Bits {
    type Output = Bits;
    fn neg(self) -> Bits {
        Bits(-self.0)
    }
}

impl Mul<f64> for Bits {
    type Output = Bits;
    fn mul(self, rhs: f64) -> Bits {
        Bits(self.0 * rhs)
    }
}

impl std::iter::Sum for Bits {
    fn sum<I: Iterator<Item = Bits>>(iter: I) -> Bits {
        Bits(iter.map(|b| b.0).sum())
    }
}

/// `-sum l log2 l` over the entries above [`ENTROPY_CUTOFF`].
pub fn spectrum_entropy(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Entropy of a (trusted) density matrix given as a bare matrix.
pub fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(spectrum_entropy(&hermitian_eigenvalues(m)?))
}

pub fn entropy(rho: &DensityMatrix) -> Result<Bits> {
    matrix_entropy(rho.matrix()).map(Bits)
}

/// Entropy of the marginal on `labels`.
pub fn marginal_entropy(rho: &DensityMatrix, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    if labels.len() == rho.layout().len() {
        return matrix_entropy(rho.matrix());
    }
    matrix_entropy(&linalg::partial_trace(rho.matrix(), rho.layout(), labels)?)
}

/// Entropy of the marginal on `labels` of a pure state, evaluated on the
/// smaller side of the cut.
pub fn pure_marginal_entropy(psi: &PureState, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() || labels.len() == psi.layout().len() {
        return Ok(0.0);
    }
    Ok(spectrum_entropy(&pure_marginal_spectrum(
        psi.amplitudes(),
        psi.layout(),
        labels,
    )?))
}

pub fn binary_entropy(p: f64) -> Result<Bits> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "binary entropy argument {p} outside [0, 1]"
        )));
    }
    Ok(Bits(spectrum_entropy(&[p, 1.0 - p])))
}

fn bipartite_labels(rho: &DensityMatrix) -> Result<(&str, &str)> {
    match rho.layout().labels() {
        [a, b] => Ok((a, b)),
        other => Err(Error::Layout(format!(
            "expected a bipartite layout, got {} factors",
            other.len()
        ))),
    }
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out
}

/// `I(X;B) = H(X) + H(B) - H(XB)` for a two-factor state.
pub fn mutual_information(rho: &DensityMatrix) -> Result<Bits> {
    let (a, b) = bipartite_labels(rho)?;
    mutual_information_between(rho, &[a], &[b])
}

/// `I(a;b)` between two disjoint groups of factors.
pub fn mutual_information_between(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<Bits> {
    let ab = union(a, b);
    Ok(Bits(
        marginal_entropy(rho, a)? + marginal_entropy(rho, b)? - marginal_entropy(rho, &ab)?,
    ))
}

/// `I(a;b|c) = H(ac) + H(bc) - H(abc) - H(c)`.
pub fn conditional_mutual_information(
    rho: &DensityMatrix,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<Bits> {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    Ok(Bits(
        marginal_entropy(rho, &ac)? + marginal_entropy(rho, &bc)?
            - marginal_entropy(rho, &abc)?
            - marginal_entropy(rho, c)?,
    ))
}

/// `I_c(A⟩B) = H(B) - H(AB)` for a two-factor state on `(A, B)`.
pub fn coherent_information(rho: &DensityMatrix) -> Result<Bits> {
    let (a, b) = bipartite_labels(rho)?;
    coherent_information_between(rho, &[a], &[b])
}

/// `I_c(a⟩b) = H(b) - H(ab)`; conditioning systems go into `b`.
pub fn coherent_information_between(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<Bits> {
    let ab = union(a, b);
    Ok(Bits(
        marginal_entropy(rho, b)? - marginal_entropy(rho, &ab)?,
    ))
}

/// Same as [`coherent_information_between`] on a pure global state.
pub fn pure_coherent_information(psi: &PureState, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(a, b);
    Ok(pure_marginal_entropy(psi, b)? - pure_marginal_entropy(psi, &ab)?)
}

fn fresh_label(base: &str, layout: &SubsystemLayout) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('\'');
    }
    label
}

/// `I_c(rho, N) = H(N(rho)) - H((1 ⊗ N)(phi_rho))`, evaluated on the pure
/// state `(1 ⊗ V)|phi_rho>` for the Stinespring dilation `V`.
pub fn channel_coherent_information(rho: &DensityMatrix, ch: &QuantumChannel) -> Result<Bits> {
    let reference = fresh_label("R", rho.layout());
    let phi = purify_with_label(rho, &reference)?;
    channel_coherent_information_pure(&phi, ch)
}

/// `I_c(rest⟩out)` after applying `ch` to its input factors of the pure
/// state `phi`, where `rest` is every factor the channel does not touch.
pub fn channel_coherent_information_pure(phi: &PureState, ch: &QuantumChannel) -> Result<Bits> {
    let v = ch.isometric_extension();
    let env = v.env_label().to_string();
    let omega = v.apply_pure(phi)?;
    let outputs: Vec<&str> = ch.output_layout().label_refs();
    let env_ref = [env.as_str()];
    // H(R B) = H(E) on the pure global state
    let h_out = pure_marginal_entropy(&omega, &outputs)?;
    let h_env = pure_marginal_entropy(&omega, &env_ref)?;
    Ok(Bits(h_out - h_env))
}

/// Which factor of a `(B, C)` cqq block plays the role of the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `I_c(B⟩CX)`
    FirstToSecond,
    /// `I_c(C⟩BX)`
    SecondToFirst,
}

fn direction_labels(layout: &SubsystemLayout, dir: Direction) -> Result<(&str, &str)> {
    match layout.labels() {
        [b, c] => Ok(match dir {
            Direction::FirstToSecond => (b, c),
            Direction::SecondToFirst => (c, b),
        }),
        other => Err(Error::Layout(format!(
            "cqq blocks must be bipartite, got {} factors",
            other.len()
        ))),
    }
}

/// Expected coherent information `sum_x p(x) I_c(B⟩C)_x`.
pub fn conditional_coherent_information(cqq: &CqqState, dir: Direction) -> Result<Bits> {
    let (a, b) = direction_labels(cqq.block_layout(), dir)?;
    let mut total = 0.0;
    for (p, block) in cqq.probs.iter().zip(&cqq.blocks) {
        if *p > 0.0 {
            total += p * coherent_information_between(block, &[a], &[b])?.0;
        }
    }
    Ok(Bits(total))
}

/// `I_c(B⟩CX) = H(CX) - H(BCX)` on the assembled block-diagonal state.
pub fn conditional_coherent_information_assembled(cqq: &CqqState, dir: Direction) -> Result<Bits> {
    let (a, b) = direction_labels(cqq.block_layout(), dir)?;
    let (a, b) = (a.to_string(), b.to_string());
    let sigma = cqq.assemble();
    coherent_information_between(&sigma, &[&a], &[&b, CLASSICAL_LABEL])
}

/// `I_c(A⟩BX)` of `sum_x |x><x| ⊗ (1 ⊗ N_x)(phi_rho)`.
pub fn instrument_coherent_information(
    rho: &DensityMatrix,
    instr: &QuantumInstrument,
) -> Result<Bits> {
    let reference = fresh_label("R", rho.layout());
    let phi = purify_with_label(rho, &reference)?.projector();
    let mut total = 0.0;
    for x in 0..instr.num_outcomes() {
        let (m, layout) = instr.apply_component(x, &phi)?;
        let p = linalg::trace(&m).re;
        if p <= 1e-14 {
            continue;
        }
        let block = DensityMatrix::from_trusted(m.unscale(p), layout);
        let outputs = instr.output_layout().label_refs();
        total += p * coherent_information_between(&block, &[reference.as_str()], &outputs)?.0;
    }
    Ok(Bits(total))
}

fn check_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Square root that discards eigenvalues below the entropy cutoff, so that
/// numerically rank-deficient inputs do not contribute `sqrt(noise)` terms.
fn sqrt_psd_truncated(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m, 1e-8)?;
    Ok(eig.map(|l| if l > ENTROPY_CUTOFF { l.sqrt() } else { 0.0 }))
}

/// `F(rho, sigma) = (tr |sqrt(rho) sqrt(sigma)|)^2`.
pub fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let product = sqrt_psd_truncated(rho)? * sqrt_psd_truncated(sigma)?;
    let s: f64 = product.singular_values().iter().sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Squared Uhlmann fidelity, in `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

/// `|rho - sigma|_1`, in `[0, 2]`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{collective_phase_flip, erasure_mac, full_dephasing, QuantumInstrument};
    use crate::linalg::{c, diag, psd_sqrt, ComplexVector};
    use crate::states::{
        maximally_entangled, maximally_entangled_on, random_density_with, random_pure_with,
        random_unitary_with, rng_from_seed,
    };

    #[test]
    fn entropy_examples() {
        let pi2 = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "A"));
        assert!((entropy(&pi2).unwrap().0 - 1.0).abs() < 1e-12);
        let psi = random_pure_with(&mut rng_from_seed(1), 5).unwrap();
        assert!(entropy(&psi.projector()).unwrap().0.abs() < 1e-9);
        let d = DensityMatrix::from_matrix(diag(&[0.75, 0.25])).unwrap();
        let expected = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((entropy(&d).unwrap().0 - expected).abs() < 1e-12);
        assert!((binary_entropy(0.25).unwrap().0 - expected).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap().0, 0.0);
        assert_eq!(binary_entropy(1.0).unwrap().0, 0.0);
        assert!((binary_entropy(0.5).unwrap().0 - 1.0).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
        for i in 0..100 {
            let p = (i as f64 * 0.6180339887).fract();
            let a = binary_entropy(p).unwrap().0;
            let b = binary_entropy(1.0 - p).unwrap().0;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = rng_from_seed(4);
        let a = random_density_with(&mut rng, 2, 2)
            .unwrap()
            .relabel("S", "A")
            .unwrap();
        let b = random_density_with(&mut rng, 3, 3)
            .unwrap()
            .relabel("S", "B")
            .unwrap();
        assert!(mutual_information(&a.tensor(&b).unwrap()).unwrap().0.abs() < 1e-9);
        for d in 2..=4 {
            let phi = maximally_entangled(d).unwrap().projector();
            let mi = mutual_information(&phi).unwrap().0;
            assert!((mi - 2.0 * (d as f64).log2()).abs() < 1e-9);
        }
        let tri = DensityMatrix::maximally_mixed(
            SubsystemLayout::new(vec![2, 2, 2], vec!["A", "B", "C"]).unwrap(),
        );
        assert!(matches!(mutual_information(&tri), Err(Error::Layout(_))));
    }

    #[test]
    fn coherent_information_examples() {
        for d in 2..=4 {
            let phi = maximally_entangled(d).unwrap().projector();
            let ic = coherent_information(&phi).unwrap().0;
            assert!((ic - (d as f64).log2()).abs() < 1e-9);
        }
        let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "A"));
        let sigma = random_density_with(&mut rng_from_seed(3), 3, 2)
            .unwrap()
            .relabel("S", "B")
            .unwrap();
        let ic = coherent_information(&pi.tensor(&sigma).unwrap()).unwrap().0;
        assert!((ic + 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_flip_sum_coherent_information() {
        for p in [0.0, 0.1, 0.25, 0.5] {
            let n = collective_phase_flip(p).unwrap();
            let a = maximally_entangled_on(2, "A", "A'").unwrap();
            let b = maximally_entangled_on(2, "B", "B'").unwrap();
            let omega = n.apply(&a.tensor(&b).unwrap().projector()).unwrap();
            let ic = coherent_information_between(&omega, &["A", "B"], &["C"])
                .unwrap()
                .0;
            let expected = 2.0 - binary_entropy(p).unwrap().0;
            assert!((ic - expected).abs() < 1e-9, "p={p}: {ic}");

            let pi4 = DensityMatrix::maximally_mixed(n.input_layout().clone());
            let via_channel = channel_coherent_information(&pi4, &n).unwrap().0;
            assert!((via_channel - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn channel_coherent_information_examples() {
        for d in 2..=4 {
            let id = QuantumChannel::identity(SubsystemLayout::single(d, "A'"));
            let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(d, "A'"));
            let ic = channel_coherent_information(&pi, &id).unwrap().0;
            assert!((ic - (d as f64).log2()).abs() < 1e-9);
        }
        let deph = full_dephasing(2);
        let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "A'"));
        assert!(channel_coherent_information(&pi, &deph).unwrap().0.abs() < 1e-9);

        // brute force through the density-matrix route
        let phi = purify_with_label(&pi, "R").unwrap().projector();
        let out = deph.apply(&phi).unwrap();
        let brute = coherent_information(&out).unwrap().0;
        assert!(brute.abs() < 1e-9);

        let wrong = DensityMatrix::maximally_mixed(SubsystemLayout::single(3, "A'"));
        assert!(channel_coherent_information(&wrong, &deph).is_err());
    }

    #[test]
    fn channel_coherent_information_is_purification_independent() {
        let mut rng = rng_from_seed(31);
        let ch = erasure_mac(2).unwrap();
        for _ in 0..20 {
            let rho = random_density_with(&mut rng, 4, 3)
                .unwrap()
                .with_layout(ch.input_layout().clone())
                .unwrap();
            let direct = channel_coherent_information(&rho, &ch).unwrap().0;
            // alternate purification: rotate the reference
            let phi = purify_with_label(&rho, "R").unwrap();
            let dr = phi.layout().dim_of("R").unwrap();
            let u = random_unitary_with(&mut rng, dr);
            let rotated = phi.apply_local("R", &u).unwrap();
            let out = ch.apply(&rotated.projector()).unwrap();
            let alt = coherent_information_between(&out, &["R"], &["C"])
                .unwrap()
                .0;
            assert!((direct - alt).abs() < 1e-9);
        }
    }

    fn random_cqq(seed: u64, nx: usize) -> CqqState {
        let mut rng = rng_from_seed(seed);
        let layout = SubsystemLayout::new(vec![2, 3], vec!["B", "C"]).unwrap();
        let mut probs: Vec<f64> = (0..nx).map(|i| 1.0 + i as f64).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let blocks = (0..nx)
            .map(|_| {
                random_density_with(&mut rng, 6, 3)
                    .unwrap()
                    .with_layout(layout.clone())
                    .unwrap()
            })
            .collect();
        CqqState::new(probs, blocks).unwrap()
    }

    #[test]
    fn conditional_coherent_information_forms_agree() {
        for seed in 0..10 {
            let cqq = random_cqq(seed, 3);
            for dir in [Direction::FirstToSecond, Direction::SecondToFirst] {
                let a = conditional_coherent_information(&cqq, dir).unwrap().0;
                let b = conditional_coherent_information_assembled(&cqq, dir)
                    .unwrap()
                    .0;
                assert!((a - b).abs() < 1e-9);
            }
        }
        let single = random_cqq(5, 1);
        let a = conditional_coherent_information(&single, Direction::FirstToSecond)
            .unwrap()
            .0;
        let b = coherent_information(&single.blocks[0]).unwrap().0;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn erasure_conditional_coherent_information() {
        let d = 2;
        let ch = erasure_mac(d).unwrap();
        for q in [0.0, 0.2, 0.35] {
            let psi = maximally_entangled_on(d, "B", "B'").unwrap();
            let blocks = (0..2)
                .map(|x| {
                    let a = PureState::basis(2, x, "A'").unwrap();
                    let input = psi.tensor(&a).unwrap();
                    ch.apply(&input.projector()).unwrap()
                })
                .collect();
            let cqq = CqqState::new(vec![q, 1.0 - q], blocks).unwrap();
            let ic = conditional_coherent_information(&cqq, Direction::FirstToSecond)
                .unwrap()
                .0;
            assert!((ic - (1.0 - 2.0 * q)).abs() < 1e-9, "q={q}: {ic}");
        }
    }

    #[test]
    fn instrument_examples() {
        let ch = erasure_mac(2).unwrap();
        let single = QuantumInstrument::from_channel(&ch);
        let mut rng = rng_from_seed(9);
        let rho = random_density_with(&mut rng, 4, 4)
            .unwrap()
            .with_layout(ch.input_layout().clone())
            .unwrap();
        let a = instrument_coherent_information(&rho, &single).unwrap().0;
        let b = channel_coherent_information(&rho, &ch).unwrap().0;
        assert!((a - b).abs() < 1e-9);

        let measure = QuantumInstrument::new(
            vec![vec![diag(&[1.0, 0.0])], vec![diag(&[0.0, 1.0])]],
            SubsystemLayout::single(2, "A'"),
            SubsystemLayout::single(2, "B"),
            1e-9,
        )
        .unwrap();
        let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "A'"));
        let ic = instrument_coherent_information(&pi, &measure).unwrap().0;
        assert!(ic.abs() < 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = rng_from_seed(17);
        let rho = random_density_with(&mut rng, 3, 3).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        let zero = PureState::basis(2, 0, "S").unwrap().projector();
        let one = PureState::basis(2, 1, "S").unwrap().projector();
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "S"));
        assert!((fidelity(&zero, &pi).unwrap() - 0.5).abs() < 1e-12);
        let wrong = DensityMatrix::maximally_mixed(SubsystemLayout::single(3, "S"));
        assert!(fidelity(&zero, &wrong).is_err());
    }

    #[test]
    fn fidelity_matches_literal_formula() {
        let mut rng = rng_from_seed(23);
        for d in 2..=4 {
            for _ in 0..20 {
                let rho = random_density_with(&mut rng, d, d).unwrap();
                let sigma = random_density_with(&mut rng, d, d).unwrap();
                let sr = psd_sqrt(rho.matrix()).unwrap();
                let inner = &sr * sigma.matrix() * &sr;
                let literal = linalg::trace(&psd_sqrt(&inner).unwrap()).re.powi(2);
                let f = fidelity(&rho, &sigma).unwrap();
                assert!((f - literal).abs() < 1e-9);
                assert!((f - fidelity(&sigma, &rho).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trace_distance_examples() {
        let mut rng = rng_from_seed(2);
        let rho = random_density_with(&mut rng, 3, 2).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        let zero = PureState::basis(2, 0, "S").unwrap().projector();
        let one = PureState::basis(2, 1, "S").unwrap().projector();
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
        let pi = DensityMatrix::maximally_mixed(SubsystemLayout::single(2, "S"));
        assert!((trace_distance(&zero, &pi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bits_arithmetic() {
        let a = Bits(1.5) + Bits(0.5) - Bits(1.0);
        assert_eq!(a, Bits(1.0));
        assert_eq!(-a * 2.0, Bits(-2.0));
        let total: Bits = [Bits(1.0), Bits(2.0)].into_iter().sum();
        assert_eq!(f64::from(total), 3.0);
        assert_eq!(serde_json::to_string(&Bits(0.25)).unwrap(), "0.25");
    }

    #[test]
    fn pure_route_matches_density_route() {
        let mut rng = rng_from_seed(5);
        let psi = random_pure_with(&mut rng, 12)
            .unwrap()
            .with_layout(SubsystemLayout::new(vec![2, 3, 2], vec!["A", "B", "C"]).unwrap())
            .unwrap();
        let rho = psi.projector();
        for (a, b) in [
            (vec!["A"], vec!["B"]),
            (vec!["B"], vec!["A", "C"]),
            (vec!["C"], vec!["A"]),
        ] {
            let x = pure_coherent_information(&psi, &a, &b).unwrap();
            let y = coherent_information_between(&rho, &a, &b).unwrap().0;
            assert!((x - y).abs() < 1e-9);
        }
        let v = ComplexVector::from_vec(vec![c(1.0, 0.0)]);
        let trivial = PureState::new(v, SubsystemLayout::single(1, "T")).unwrap();
        assert_eq!(pure_marginal_entropy(&trivial, &["T"]).unwrap(), 0.0);
    }
}
