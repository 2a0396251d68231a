//! Inner approximations of the CQ and QQ regions by weighted-sum sweeps.
//!
//! For each weight `w` the scalarization `w·x + (1-w)·y` is maximized over
//! an unconstrained parameterization of the inputs (softmax probabilities,
//! normalized complex vectors) with restarted Nelder-Mead. Restarts run in
//! parallel; the best start wins with ties going to the lower start index,
//! so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::{
    cq_rectangle_fast, cq_values_geo, qq_values_geo, CqInput, MacGeometry, QqInput,
};
use super::{Pentagon, RateRegion, RegionMetadata, SweepEntry};
use crate::channels::{QuantumChannel, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, ComplexVector};
use crate::optimize::NelderMead;
use crate::states::cardinality_bound;

/// Logit standing in for a zero probability.
const ZERO_LOGIT: f64 = -50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Cq,
    Qq,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Cq => "cq",
            RegionKind::Qq => "qq",
        }
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cq" => Ok(RegionKind::Cq),
            "qq" => Ok(RegionKind::Qq),
            _ => Err(Error::InvalidArgument(format!("unknown region kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Random starts per weight (on top of any warm starts).
    pub restarts: usize,
    pub max_iters: usize,
    pub simplex_tolerance: f64,
    /// CQ ensemble size; defaults to `min(|A'|, |C|)^2 + 1`.
    pub ensemble_size: Option<usize>,
    pub seed: u64,
    /// Cap on the channel input dimension (after tensor powers).
    pub dim_cap: usize,
    /// Number of equally spaced weights in `[0, 1]`.
    pub weights: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 2000,
            simplex_tolerance: 1e-9,
            ensemble_size: None,
            seed: 0,
            dim_cap: DEFAULT_DIM_CAP,
            weights: 21,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("optimizer config: {msg}")));
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if !(self.simplex_tolerance.is_finite() && self.simplex_tolerance > 0.0) {
            return bad("simplex_tolerance must be positive");
        }
        if self.ensemble_size == Some(0) {
            return bad("ensemble_size must be >= 1");
        }
        if self.weights < 2 {
            return bad("weights must be >= 2");
        }
        if self.dim_cap == 0 {
            return bad("dim_cap must be >= 1");
        }
        Ok(())
    }

    pub fn weight_grid(&self) -> Vec<f64> {
        let n = self.weights - 1;
        (0..=n).map(|j| j as f64 / n as f64).collect()
    }

    fn nelder_mead(&self) -> NelderMead {
        NelderMead {
            max_iters: self.max_iters,
            tolerance: self.simplex_tolerance,
            ..NelderMead::default()
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|x| x / total).collect()
}

fn unit_vector(params: &[f64]) -> ComplexVector {
    let n = params.len() / 2;
    let v = ComplexVector::from_fn(n, |i, _| c(params[2 * i], params[2 * i + 1]));
    let norm = v.norm();
    if norm > 1e-300 {
        v / c(norm, 0.0)
    } else {
        let mut e = ComplexVector::zeros(n);
        e[0] = c(1.0, 0.0);
        e
    }
}

fn push_complex(out: &mut Vec<f64>, values: impl Iterator<Item = crate::linalg::C64>) {
    for z in values {
        out.push(z.re);
        out.push(z.im);
    }
}

/// Row-major amplitudes of `m[r, i]` as one vector.
fn matrix_from_unit(params: &[f64], rows: usize, cols: usize) -> ComplexMatrix {
    let v = unit_vector(params);
    ComplexMatrix::from_fn(rows, cols, |r, i| v[r * cols + i])
}

fn push_matrix(out: &mut Vec<f64>, m: &ComplexMatrix) {
    push_complex(
        out,
        (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |i| m[(r, i)])),
    );
}

/// Parameter layout: `m` logits, `m` Alice states, one Bob reference.
#[derive(Debug, Clone, Copy)]
struct CqCodec {
    m: usize,
    da: usize,
    db: usize,
    dref: usize,
}

impl CqCodec {
    fn len(&self) -> usize {
        self.m + self.m * 2 * self.da + 2 * self.dref * self.db
    }

    fn decode(&self, x: &[f64]) -> CqInput {
        let probs = softmax(&x[..self.m]);
        let mut off = self.m;
        let states = (0..self.m)
            .map(|_| {
                let s = unit_vector(&x[off..off + 2 * self.da]);
                off += 2 * self.da;
                s
            })
            .collect();
        CqInput {
            probs,
            states,
            reference: matrix_from_unit(&x[off..], self.dref, self.db),
        }
    }

    /// Inputs with fewer states are padded with zero-probability copies.
    fn encode(&self, input: &CqInput) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for x in 0..self.m {
            let p = input.probs.get(x).copied().unwrap_or(0.0);
            out.push(if p > 0.0 { p.ln() } else { ZERO_LOGIT });
        }
        for x in 0..self.m {
            let s = input.states.get(x).unwrap_or(&input.states[0]);
            push_complex(&mut out, s.iter().copied());
        }
        push_matrix(&mut out, &input.reference);
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct QqCodec {
    da: usize,
    db: usize,
}

impl QqCodec {
    fn len(&self) -> usize {
        2 * self.da * self.da + 2 * self.db * self.db
    }

    fn decode(&self, x: &[f64]) -> QqInput {
        let split = 2 * self.da * self.da;
        QqInput {
            psi_a: matrix_from_unit(&x[..split], self.da, self.da),
            psi_b: matrix_from_unit(&x[split..], self.db, self.db),
        }
    }

    fn encode(&self, input: &QqInput) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        push_matrix(&mut out, &input.psi_a);
        push_matrix(&mut out, &input.psi_b);
        out
    }
}

/// Support function `max w x + (1-w) y` of a pentagon after removing
/// redundant bounds but without clamping at zero, so that the objective
/// keeps a slope where all rates are still negative.
fn pentagon_objective(p: &Pentagon, w: f64) -> f64 {
    let a = p.a_max.min(p.sum_max);
    let b = p.b_max.min(p.sum_max);
    let s = p.sum_max.min(a + b);
    if w >= 0.5 {
        w * a + (1.0 - w) * (s - a)
    } else {
        w * (s - b) + (1.0 - w) * b
    }
}

struct Best {
    params: Vec<f64>,
    objective: f64,
}

/// Maximizes `objective(x, w)` for every weight of the grid.
fn sweep<F>(
    cfg: &OptimizerConfig,
    n_params: usize,
    warm: Option<&[Vec<f64>]>,
    objective: F,
) -> Vec<Best>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    let nm = cfg.nelder_mead();
    let mut results: Vec<Best> = Vec::with_capacity(cfg.weights);
    for (j, w) in cfg.weight_grid().into_iter().enumerate() {
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(warm) = warm {
            starts.push(warm[j].clone());
        }
        if let Some(prev) = results.last() {
            starts.push(prev.params.clone());
        }
        for i in 0..cfg.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((j as u64) << 32) | i as u64);
            starts.push((0..n_params).map(|_| rng.sample(StandardNormal)).collect());
        }
        let runs: Vec<Best> = starts
            .into_par_iter()
            .map(|x0| {
                let m = nm.minimize(|x| -objective(x, w), &x0);
                Best {
                    params: m.point,
                    objective: -m.value,
                }
            })
            .collect();
        let mut best_idx = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.objective > runs[best_idx].objective {
                best_idx = i;
            }
        }
        let best = runs.into_iter().nth(best_idx).expect("at least one start");
        results.push(best);
    }
    results
}

fn channel_name(ch: &QuantumChannel) -> String {
    format!(
        "channel {:?} -> {:?}",
        ch.input_layout().labels(),
        ch.output_layout().labels()
    )
}

struct CqRun {
    inputs: Vec<CqInput>,
    region: RateRegion,
}

fn cq_run(
    ch: &QuantumChannel,
    cfg: &OptimizerConfig,
    k: usize,
    warm: Option<&[CqInput]>,
    m: usize,
) -> Result<CqRun> {
    cfg.validate()?;
    if ch.din() > cfg.dim_cap {
        return Err(Error::CapExceeded {
            dim: ch.din(),
            cap: cfg.dim_cap,
        });
    }
    let geo = MacGeometry::new(ch)?;
    let codec = CqCodec {
        m,
        da: geo.alice_dim,
        db: geo.bob_dim,
        dref: geo.bob_dim,
    };
    let warm_params: Option<Vec<Vec<f64>>> =
        warm.map(|w| w.iter().map(|i| codec.encode(i)).collect());
    let best = sweep(
        cfg,
        codec.len(),
        warm_params.as_deref(),
        |x, w| match cq_rectangle_fast(&geo, &codec.decode(x)) {
            Ok((r, s)) => w * r + (1.0 - w) * s,
            Err(_) => f64::NEG_INFINITY,
        },
    );
    let scale = 1.0 / k as f64;
    let mut inputs = Vec::with_capacity(best.len());
    let mut sweep_meta = Vec::with_capacity(best.len());
    let mut generators = Vec::with_capacity(best.len());
    for (w, b) in cfg.weight_grid().into_iter().zip(best) {
        let input = codec.decode(&b.params);
        let v = cq_values_geo(&geo, &input)?.scaled(scale);
        let rect = clamp(v.rectangle());
        let pent = clamp(v.pentagon());
        let extends = pent
            .corners()
            .iter()
            .any(|&p| !rect.contains(p, super::GEOMETRY_TOL));
        generators.push(rect);
        sweep_meta.push(SweepEntry {
            weight: w,
            objective: b.objective * scale,
            generator: rect,
            raw: serde_json::to_value(v).expect("plain numbers"),
            pentagon: Some(pent),
            pentagon_extends_rectangle: Some(extends),
        });
        inputs.push(input);
    }
    let metadata = RegionMetadata {
        channel: channel_name(ch),
        kind: RegionKind::Cq.as_str().into(),
        optimizer: Some(cfg.clone()),
        ensemble_size: Some(m),
        parameters: Some(codec.len()),
        sweep: sweep_meta,
        notes: Vec::new(),
    };
    Ok(CqRun {
        inputs,
        region: RateRegion::from_generators(generators, k, true, metadata),
    })
}

struct QqRun {
    inputs: Vec<QqInput>,
    region: RateRegion,
}

fn qq_run(
    ch: &QuantumChannel,
    cfg: &OptimizerConfig,
    k: usize,
    warm: Option<&[QqInput]>,
) -> Result<QqRun> {
    cfg.validate()?;
    if ch.din() > cfg.dim_cap {
        return Err(Error::CapExceeded {
            dim: ch.din(),
            cap: cfg.dim_cap,
        });
    }
    let geo = MacGeometry::new(ch)?;
    let codec = QqCodec {
        da: geo.alice_dim,
        db: geo.bob_dim,
    };
    let warm_params: Option<Vec<Vec<f64>>> =
        warm.map(|w| w.iter().map(|i| codec.encode(i)).collect());
    let best = sweep(
        cfg,
        codec.len(),
        warm_params.as_deref(),
        |x, w| match qq_values_geo(&geo, &codec.decode(x)) {
            Ok(v) => pentagon_objective(&v.pentagon(), w),
            Err(_) => f64::NEG_INFINITY,
        },
    );
    let scale = 1.0 / k as f64;
    let mut inputs = Vec::with_capacity(best.len());
    let mut sweep_meta = Vec::with_capacity(best.len());
    let mut generators = Vec::with_capacity(best.len());
    for (w, b) in cfg.weight_grid().into_iter().zip(best) {
        let input = codec.decode(&b.params);
        let v = qq_values_geo(&geo, &input)?.scaled(scale);
        let pent = clamp(v.pentagon());
        generators.push(pent);
        sweep_meta.push(SweepEntry {
            weight: w,
            objective: b.objective * scale,
            generator: pent,
            raw: serde_json::to_value(v).expect("plain numbers"),
            pentagon: None,
            pentagon_extends_rectangle: None,
        });
        inputs.push(input);
    }
    let metadata = RegionMetadata {
        channel: channel_name(ch),
        kind: RegionKind::Qq.as_str().into(),
        optimizer: Some(cfg.clone()),
        ensemble_size: None,
        parameters: Some(codec.len()),
        sweep: sweep_meta,
        notes: Vec::new(),
    };
    Ok(QqRun {
        inputs,
        region: RateRegion::from_generators(generators, k, true, metadata),
    })
}

fn clamp(p: Pentagon) -> Pentagon {
    Pentagon::new(p.a_max.max(0.0), p.b_max.max(0.0), p.sum_max.max(0.0))
}

fn default_ensemble_size(ch: &QuantumChannel) -> Result<usize> {
    let geo = MacGeometry::new(ch)?;
    Ok(cardinality_bound(geo.alice_dim, ch.dout()))
}

/// Union of CQ rectangles `(I(X;C), I_c(B⟩CX))` over the weight sweep, with
/// time sharing between them. The full pentagons (with the `I(X;BC)`
/// and `I_c(B⟩C)` sum bound) are recorded per weight in the metadata.
pub fn optimize_cq_region(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<RateRegion> {
    let m = match cfg.ensemble_size {
        Some(m) => m,
        None => default_ensemble_size(ch)?,
    };
    cq_run(ch, cfg, 1, None, m).map(|r| r.region)
}

/// Union of QQ pentagons `(I_c(A⟩BC), I_c(B⟩AC), I_c(AB⟩C))` over the sweep,
/// with reference dimensions equal to the input dimensions.
pub fn optimize_qq_region(ch: &QuantumChannel, cfg: &OptimizerConfig) -> Result<RateRegion> {
    qq_run(ch, cfg, 1, None).map(|r| r.region)
}

pub fn optimize_region(
    ch: &QuantumChannel,
    kind: RegionKind,
    cfg: &OptimizerConfig,
) -> Result<RateRegion> {
    match kind {
        RegionKind::Cq => optimize_cq_region(ch, cfg),
        RegionKind::Qq => optimize_qq_region(ch, cfg),
    }
}

fn tensor_k<T>(x: &T, k: usize, f: impl Fn(&T, &T) -> T) -> T
where
    T: Clone,
{
    let mut acc = x.clone();
    for _ in 1..k {
        acc = f(&acc, x);
    }
    acc
}

/// `(1/k)` times the region of `ch^{⊗k}`. Each weight is warm-started from
/// the k-fold product of the single-letter optimum, so the result contains
/// the single-letter sweep up to optimizer noise.
pub fn regularized_region(
    ch: &QuantumChannel,
    kind: RegionKind,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<RateRegion> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let chk = ch.tensor_power_capped(k, cfg.dim_cap)?;
    if k == 1 {
        return optimize_region(ch, kind, cfg);
    }
    let mut region = match kind {
        RegionKind::Cq => {
            let m1 = match cfg.ensemble_size {
                Some(m) => m,
                None => default_ensemble_size(ch)?,
            };
            let base = cq_run(ch, cfg, 1, None, m1)?;
            let warm: Vec<CqInput> = base
                .inputs
                .iter()
                .map(|i| tensor_k(i, k, CqInput::tensor))
                .collect();
            let mk = m1.pow(k as u32).max(match cfg.ensemble_size {
                Some(m) => m,
                None => default_ensemble_size(&chk)?,
            });
            cq_run(&chk, cfg, k, Some(&warm), mk)?.region
        }
        RegionKind::Qq => {
            let base = qq_run(ch, cfg, 1, None)?;
            let warm: Vec<QqInput> = base
                .inputs
                .iter()
                .map(|i| tensor_k(i, k, QqInput::tensor))
                .collect();
            qq_run(&chk, cfg, k, Some(&warm))?.region
        }
    };
    region.metadata.notes.push(format!(
        "rates divided by k = {k}; warm-started from the k-fold product of the k = 1 optimum"
    ));
    Ok(region)
}
