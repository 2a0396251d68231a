//! Randomized checks of distance-measure inequalities and the continuity,
//! gentle-measurement and conditioning bounds behind the rate regions.
//!
//! Every check asserts `lhs <= rhs` on sampled instances. Violations are
//! reported as data together with the worst witness rather than raised.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binary_entropy, coherent_information, fidelity, fidelity_matrices, trace_distance};
use crate::channels::random_channel_with;
use crate::error::Result;
use crate::linalg::{self, diag, trace_norm, ComplexMatrix, SubsystemLayout};
use crate::states::{
    purify_with_label, random_density_with, random_pure_with, random_unitary_with, DensityMatrix,
    PureState,
};

/// Default tolerance added to the right-hand side of every inequality.
pub const SUITE_SLACK: f64 = 1e-8;
/// Tolerance for the exact multiplicativity identity.
pub const EXACT_SLACK: f64 = 1e-10;

pub const CHECK_NAMES: [&str; 11] = [
    "fidelity_trace_bounds",
    "fidelity_trace_implications",
    "uhlmann_overlap",
    "fidelity_monotonicity",
    "trace_distance_monotonicity",
    "fidelity_multiplicativity",
    "fidelity_triangle",
    "measurement_continuity",
    "product_transitivity",
    "coherent_information_continuity",
    "gentle_measurement",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            dims: vec![2, 3, 4],
            seed: 42,
        }
    }
}

/// The sampled instance that came closest to (or went furthest past) the
/// bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub dims: Vec<usize>,
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub check: String,
    pub trials: usize,
    /// Number of trials where some `lhs - rhs` exceeded `slack`.
    pub violations: usize,
    /// `max(0, lhs - rhs)` over all trials.
    pub worst_violation: f64,
    /// `min(rhs - lhs)` over all trials; positive when every instance holds
    /// with room to spare.
    pub tightest_margin: f64,
    pub slack: f64,
    pub seed: u64,
    /// Present when at least one violation occurred.
    pub witness: Option<Witness>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// One sampled inequality `lhs <= rhs`.
struct Outcome {
    relation: String,
    lhs: f64,
    rhs: f64,
}

fn le(relation: &str, lhs: f64, rhs: f64) -> Outcome {
    Outcome {
        relation: relation.to_string(),
        lhs,
        rhs,
    }
}

type TrialFn = fn(&mut ChaCha8Rng, &[usize]) -> Result<Vec<Outcome>>;

fn checks() -> [(TrialFn, f64, usize); 11] {
    [
        (fidelity_trace_bounds, SUITE_SLACK, 1),
        (fidelity_trace_implications, SUITE_SLACK, 1),
        (uhlmann_overlap, SUITE_SLACK, 1),
        (fidelity_monotonicity, SUITE_SLACK, 2),
        (trace_distance_monotonicity, SUITE_SLACK, 2),
        (fidelity_multiplicativity, EXACT_SLACK, 2),
        (fidelity_triangle, SUITE_SLACK, 1),
        (measurement_continuity, SUITE_SLACK, 1),
        (product_transitivity, SUITE_SLACK, 2),
        (coherent_information_continuity, SUITE_SLACK, 2),
        (gentle_measurement, SUITE_SLACK, 1),
    ]
}

/// Runs every check `cfg.trials` times. Trial `t` of check `c` draws from a
/// ChaCha stream seeded with `seed + t` on stream `c`, so reports do not
/// depend on scheduling.
pub fn run_property_suite(cfg: &SuiteConfig) -> Vec<PropertyReport> {
    let dims: Vec<usize> = if cfg.dims.is_empty() {
        vec![2]
    } else {
        cfg.dims.iter().map(|&d| d.max(1)).collect()
    };
    checks()
        .iter()
        .enumerate()
        .map(|(index, &(trial, slack, arity))| {
            let results: Vec<(Vec<usize>, Vec<Outcome>)> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(t as u64));
                    rng.set_stream(index as u64);
                    let trial_dims: Vec<usize> =
                        (0..arity).map(|k| dims[(t + k) % dims.len()]).collect();
                    let outcomes = trial(&mut rng, &trial_dims).unwrap_or_else(|e| {
                        vec![le(&format!("evaluation failed: {e}"), f64::INFINITY, 0.0)]
                    });
                    (trial_dims, outcomes)
                })
                .collect();
            summarize(CHECK_NAMES[index], cfg, slack, results)
        })
        .collect()
}

fn summarize(
    name: &str,
    cfg: &SuiteConfig,
    slack: f64,
    results: Vec<(Vec<usize>, Vec<Outcome>)>,
) -> PropertyReport {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut tightest = f64::INFINITY;
    let mut witness = None;
    for (t, (dims, outcomes)) in results.into_iter().enumerate() {
        let mut violated = false;
        for o in outcomes {
            let gap = o.lhs - o.rhs;
            let gap = if gap.is_nan() { f64::INFINITY } else { gap };
            tightest = tightest.min(-gap);
            if gap > slack {
                violated = true;
            }
            if gap > worst {
                worst = gap;
                if gap > slack {
                    witness = Some(Witness {
                        trial: t,
                        dims: dims.clone(),
                        relation: o.relation.clone(),
                        lhs: o.lhs,
                        rhs: o.rhs,
                    });
                }
            }
        }
        if violated {
            violations += 1;
        }
    }
    PropertyReport {
        check: name.to_string(),
        trials: cfg.trials,
        violations,
        worst_violation: worst.max(0.0),
        tightest_margin: if tightest.is_finite() { tightest } else { 0.0 },
        slack,
        seed: cfg.seed,
        witness,
    }
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=d);
    random_density_with(rng, d, rank)
}

fn full_rank_state(rng: &mut ChaCha8Rng, d: usize) -> Result<DensityMatrix> {
    random_density_with(rng, d, d)
}

/// `sigma = (1 - t) rho + t tau` with `t` biased towards 0, so that close
/// pairs are well represented.
fn nearby_state(rng: &mut ChaCha8Rng, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let tau = random_state(rng, rho.dim())?.with_layout(rho.layout().clone())?;
    let u: f64 = rng.random();
    rho.mix(&tau, 1.0 - u * u)
}

/// `0 <= Lambda <= 1` with eigenvalues drawn from `[lo, 1]`.
fn random_effect(rng: &mut ChaCha8Rng, d: usize, lo: f64) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_unitary_with(rng, d);
    let vals: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=1.0)).collect();
    let roots: Vec<f64> = vals.iter().map(|v| v.sqrt()).collect();
    let effect = &u * diag(&vals) * u.adjoint();
    let root = &u * diag(&roots) * u.adjoint();
    (effect, root)
}

fn expectation(effect: &ComplexMatrix, rho: &DensityMatrix) -> f64 {
    linalg::trace(&(effect * rho.matrix())).re
}

fn fidelity_trace_bounds(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let rho = random_state(rng, dims[0])?;
    let sigma = nearby_state(rng, &rho)?;
    let f = fidelity(&rho, &sigma)?;
    let t = trace_distance(&rho, &sigma)?;
    Ok(vec![
        le("1 - sqrt(F) <= T/2", 1.0 - f.sqrt(), t / 2.0),
        le("T/2 <= sqrt(1 - F)", t / 2.0, (1.0 - f).max(0.0).sqrt()),
        le("1 - T <= F", 1.0 - t, f),
        le("F <= 1 - T^2/4", f, 1.0 - t * t / 4.0),
    ])
}

fn fidelity_trace_implications(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let rho = random_state(rng, dims[0])?;
    let sigma = nearby_state(rng, &rho)?;
    let f = fidelity(&rho, &sigma)?;
    let t = trace_distance(&rho, &sigma)?;
    let mut out = Vec::with_capacity(2);
    // smallest admissible epsilon plus a random margin
    let eps = ((1.0 - f) + rng.random_range(0.0..0.2)).min(1.0);
    if f > 1.0 - eps {
        out.push(le("F > 1 - eps => T <= 2 sqrt(eps)", t, 2.0 * eps.sqrt()));
    }
    if t <= 1.0 {
        let eps = t + rng.random_range(0.0..=1.0) * (1.0 - t);
        out.push(le("T <= eps => F > 1 - eps", 1.0 - eps, f));
    }
    Ok(out)
}

fn uhlmann_overlap(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let d = dims[0];
    let rho = random_state(rng, d)?;
    let sigma = nearby_state(rng, &rho)?;
    let u = random_unitary_with(rng, d);
    let v = random_unitary_with(rng, d);
    let psi = purify_with_label(&rho, "R")?.apply_local("R", &u)?;
    let phi = purify_with_label(&sigma, "R")?.apply_local("R", &v)?;
    let f = fidelity(&rho, &sigma)?;
    Ok(vec![le(
        "|<psi_rho|phi_sigma>|^2 <= F",
        psi.overlap(&phi)?,
        f,
    )])
}

fn random_channel_for(
    rng: &mut ChaCha8Rng,
    din: usize,
    dout: usize,
) -> crate::channels::QuantumChannel {
    let min_env = din.div_ceil(dout);
    let denv = rng.random_range(min_env..=min_env + 2);
    random_channel_with(rng, din, dout, denv)
}

fn fidelity_monotonicity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let rho = random_state(rng, dims[0])?;
    let sigma = nearby_state(rng, &rho)?;
    let ch = random_channel_for(rng, dims[0], dims[1]);
    let before = fidelity(&rho, &sigma)?;
    let after = fidelity_matrices(
        &ch.apply_matrix(rho.matrix())?,
        &ch.apply_matrix(sigma.matrix())?,
    )?;
    Ok(vec![le(
        "F(rho, sigma) <= F(N rho, N sigma)",
        before,
        after,
    )])
}

fn trace_distance_monotonicity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let rho = random_state(rng, dims[0])?;
    let sigma = nearby_state(rng, &rho)?;
    let ch = random_channel_for(rng, dims[0], dims[1]);
    let before = trace_distance(&rho, &sigma)?;
    let after = trace_norm(&(ch.apply_matrix(rho.matrix())? - ch.apply_matrix(sigma.matrix())?));
    Ok(vec![le(
        "|N rho - N sigma|_1 <= |rho - sigma|_1",
        after,
        before,
    )])
}

fn fidelity_multiplicativity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let r1 = full_rank_state(rng, dims[0])?;
    let s1 = full_rank_state(rng, dims[0])?;
    let r2 = full_rank_state(rng, dims[1])?;
    let s2 = full_rank_state(rng, dims[1])?;
    let joint = fidelity_matrices(
        &linalg::tensor(r1.matrix(), r2.matrix()),
        &linalg::tensor(s1.matrix(), s2.matrix()),
    )?;
    let product = fidelity(&r1, &s1)? * fidelity(&r2, &s2)?;
    Ok(vec![le(
        "|F(r1 r2, s1 s2) - F(r1, s1) F(r2, s2)| <= 0",
        (joint - product).abs(),
        0.0,
    )])
}

fn fidelity_triangle(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let r1 = random_state(rng, dims[0])?;
    let r2 = nearby_state(rng, &r1)?;
    let r3 = nearby_state(rng, &r2)?;
    let f12 = fidelity(&r1, &r2)?;
    let f23 = fidelity(&r2, &r3)?;
    let f13 = fidelity(&r1, &r3)?;
    let bound = 1.0 - 2.0 * (1.0 - f12).max(0.0).sqrt() - 2.0 * (1.0 - f23).max(0.0).sqrt();
    Ok(vec![le(
        "1 - 2 sqrt(1 - F12) - 2 sqrt(1 - F23) <= F13",
        bound,
        f13,
    )])
}

fn measurement_continuity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let d = dims[0];
    let rho = random_state(rng, d)?;
    let sigma = nearby_state(rng, &rho)?;
    let (effect, _) = random_effect(rng, d, 0.0);
    let t = trace_distance(&rho, &sigma)?;
    Ok(vec![le(
        "tr L rho - |rho - sigma|_1 <= tr L sigma",
        expectation(&effect, &rho) - t,
        expectation(&effect, &sigma),
    )])
}

fn product_transitivity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let (da, db) = (dims[0], dims[1]);
    let phi = random_pure_with(rng, da)?.with_layout(SubsystemLayout::single(da, "A"))?;
    let rho_prime = random_state(rng, db)?.relabel("S", "B")?;
    let layout = SubsystemLayout::new(vec![da, db], vec!["A", "B"])?;
    let junk = random_state(rng, da * db)?.with_layout(layout)?;
    let eps: f64 = rng.random_range(0.0..0.3);
    let omega = phi.projector().tensor(&rho_prime)?.mix(&junk, 1.0 - eps)?;
    let rho = nearby_state(rng, &rho_prime)?;

    // tightest epsilon for which the premise F(phi, Omega^A) >= 1 - eps holds
    let omega_a = omega.partial_trace(&["A"])?;
    let eps = (1.0 - fidelity(&phi.projector(), &omega_a)?).max(0.0);
    let omega_b = omega.partial_trace(&["B"])?;
    let lhs = 1.0 - trace_distance(&rho, &omega_b)? - 3.0 * eps;
    let rhs = fidelity(&phi.projector().tensor(&rho)?, &omega)?;
    Ok(vec![le(
        "1 - |rho - Omega^B|_1 - 3 eps <= F(phi rho, Omega)",
        lhs,
        rhs,
    )])
}

fn coherent_information_continuity(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let (dq, dr) = (dims[0], dims[1]);
    let layout = SubsystemLayout::new(vec![dq, dr], vec!["Q", "R"])?;
    let n = dq * dr;
    let (rho, sigma) = if rng.random_range(0..4) == 0 {
        // pure state against a mixture with an orthogonal pure state
        let psi = random_pure_with(rng, n)?;
        let other = random_pure_with(rng, n)?;
        let ov = psi.amplitudes().dotc(other.amplitudes());
        let perp = other.amplitudes() - psi.amplitudes() * ov;
        let perp = PureState::normalized(perp, SubsystemLayout::single(n, "S"))?;
        let eps: f64 = rng.random_range(0.0..=0.25);
        let rho = psi.projector();
        let sigma = rho.mix(&perp.projector(), 1.0 - eps)?;
        (rho, sigma)
    } else {
        let rho = random_state(rng, n)?;
        let tau = random_state(rng, n)?;
        let spread = trace_distance(&rho, &tau)?;
        let t = rng.random_range(0.0..=1.0f64).min(0.5 / spread.max(1e-300));
        let sigma = rho.mix(&tau, 1.0 - t)?;
        (rho, sigma)
    };
    let rho = rho.with_layout(layout.clone())?;
    let sigma = sigma.with_layout(layout)?;
    let eps = trace_distance(&rho, &sigma)?.min(0.5);
    let diff = (coherent_information(&rho)?.0 - coherent_information(&sigma)?.0).abs();
    let bound = 2.0 * binary_entropy(eps)?.0 + 4.0 * (dq as f64).log2() * eps;
    Ok(vec![le(
        "|dIc(Q>R)| <= 2 H(eps) + 4 log|Q| eps",
        diff,
        bound,
    )])
}

fn gentle_measurement(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<Vec<Outcome>> {
    let d = dims[0];
    let rho = random_state(rng, d)?;
    let lo = 1.0 - rng.random::<f64>().powi(2);
    let (effect, root) = random_effect(rng, d, lo);
    let eps = (1.0 - expectation(&effect, &rho)).max(0.0);
    let disturbed = &root * rho.matrix() * &root;
    let lhs = trace_norm(&(disturbed - rho.matrix()));
    Ok(vec![le(
        "|sqrt(L) rho sqrt(L) - rho|_1 <= sqrt(8 eps)",
        lhs,
        (8.0 * eps).sqrt(),
    )])
}
