//! Rate regions: geometry, evaluation of the single-letter bounds,
//! optimization over input ensembles and the analytic reference regions.

mod analytic;
mod evaluate;
mod optimize;
mod pareto;

use serde::{Deserialize, Serialize};

pub use analytic::{analytic_erasure_region, analytic_phase_flip_region};
pub use evaluate::{
    cq_input_values, cq_point, cq_state, cq_values, mac_split, qq_corners, qq_input_values,
    qq_state, qq_values, simultaneous_bounds, BipartiteEnsemble, CqInput, CqPoint, CqValues,
    MacGeometry, QqInput, QqValues, SimultaneousBounds,
};
pub use optimize::{
    optimize_cq_region, optimize_qq_region, optimize_region, regularized_region, OptimizerConfig,
    RegionKind,
};
pub use pareto::{concave_frontier, pareto_frontier, region_contains, time_share, FrontierPoint};

/// Tolerance used when checking emitted geometry.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Rate pair `(r or R, s or S)` in bits per channel use; serializes as `[r, s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint(pub f64, pub f64);

impl RatePoint {
    pub fn first(&self) -> f64 {
        self.0
    }

    pub fn second(&self) -> f64 {
        self.1
    }
}

/// `{(x, y) >= 0 : x <= a_max, y <= b_max, x + y <= sum_max}`; a rectangle
/// has `sum_max = a_max + b_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pentagon {
    pub a_max: f64,
    pub b_max: f64,
    pub sum_max: f64,
}

impl Pentagon {
    pub fn new(a_max: f64, b_max: f64, sum_max: f64) -> Self {
        Self {
            a_max,
            b_max,
            sum_max,
        }
    }

    pub fn rectangle(a_max: f64, b_max: f64) -> Self {
        Self::new(a_max, b_max, a_max + b_max)
    }

    /// Tightest description of the same set of nonnegative rate pairs:
    /// bounds clamped at zero and no bound looser than the others imply.
    pub fn normalized(&self) -> Self {
        let s = self.sum_max.max(0.0);
        let a = self.a_max.max(0.0).min(s);
        let b = self.b_max.max(0.0).min(s);
        Self::new(a, b, s.min(a + b))
    }

    pub fn is_rectangle(&self) -> bool {
        let n = self.normalized();
        n.sum_max >= n.a_max + n.b_max - GEOMETRY_TOL
    }

    pub fn is_empty(&self) -> bool {
        let n = self.normalized();
        n.a_max <= 0.0 && n.b_max <= 0.0
    }

    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        let n = self.normalized();
        p.0 >= -tol
            && p.1 >= -tol
            && p.0 <= n.a_max + tol
            && p.1 <= n.b_max + tol
            && p.0 + p.1 <= n.sum_max + tol
    }

    /// Corners `(0, b), (s-b, b), (a, s-a), (a, 0)` of the normalized set.
    pub fn corners(&self) -> [RatePoint; 4] {
        let n = self.normalized();
        [
            RatePoint(0.0, n.b_max),
            RatePoint(n.sum_max - n.b_max, n.b_max),
            RatePoint(n.a_max, n.sum_max - n.a_max),
            RatePoint(n.a_max, 0.0),
        ]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.a_max * factor,
            self.b_max * factor,
            self.sum_max * factor,
        )
    }

    /// `max w x + (1 - w) y` over the set.
    pub fn support(&self, w: f64) -> f64 {
        self.corners()
            .iter()
            .map(|p| w * p.0 + (1.0 - w) * p.1)
            .fold(0.0, f64::max)
    }
}

/// Best point found for one scalarization weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub weight: f64,
    /// Scalarized objective per channel use at the best input found.
    pub objective: f64,
    /// Emitted generator.
    pub generator: Pentagon,
    /// Unclamped information quantities, per channel use.
    pub raw: serde_json::Value,
    /// CQ only: the pentagon `(I(X;BC), I_c(B⟩CX), I(X;C) + I_c(B⟩CX))`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pentagon: Option<Pentagon>,
    /// CQ only: whether that pentagon reaches outside the rectangle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pentagon_extends_rectangle: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionMetadata {
    pub channel: String,
    /// `"cq"`, `"qq"`, or an analytic source.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parameters: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<SweepEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// A union of pentagons together with its upper-right boundary.
///
/// With `time_sharing` the region is the convex hull of the union (any
/// two achievable points can be time-shared) and the frontier is its
/// concave majorant; otherwise the frontier is the staircase boundary of
/// the union itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub generators: Vec<Pentagon>,
    /// Sorted by first coordinate, second coordinate nonincreasing.
    pub frontier: Vec<RatePoint>,
    /// Index into `generators` for each frontier point.
    pub frontier_generators: Vec<usize>,
    pub k: usize,
    pub time_sharing: bool,
    pub metadata: RegionMetadata,
}

impl RateRegion {
    pub fn from_generators(
        generators: Vec<Pentagon>,
        k: usize,
        time_sharing: bool,
        metadata: RegionMetadata,
    ) -> Self {
        let generators: Vec<Pentagon> = generators.iter().map(Pentagon::normalized).collect();
        let frontier = if time_sharing {
            concave_frontier(&generators)
        } else {
            pareto_frontier(&generators)
        };
        Self {
            frontier: frontier.iter().map(|f| f.point).collect(),
            frontier_generators: frontier.iter().map(|f| f.generator).collect(),
            generators,
            k,
            time_sharing,
            metadata,
        }
    }

    pub fn empty(metadata: RegionMetadata) -> Self {
        Self::from_generators(Vec::new(), 1, false, metadata)
    }

    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        region_contains(self, p, tol)
    }

    /// Every frontier point of `other` lies in `self` within `tol`.
    pub fn contains_region(&self, other: &RateRegion, tol: f64) -> bool {
        other.frontier.iter().all(|&p| self.contains(p, tol))
    }

    /// Largest `x + y` over the region.
    pub fn max_sum_rate(&self) -> f64 {
        self.frontier.iter().map(|p| p.0 + p.1).fold(0.0, f64::max)
    }

    /// `max w x + (1 - w) y` over the region.
    pub fn support(&self, w: f64) -> f64 {
        self.frontier
            .iter()
            .map(|p| w * p.0 + (1.0 - w) * p.1)
            .fold(0.0, f64::max)
    }

    /// Checks the ordering, sign and dominance invariants; returns a
    /// description of the first failure.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        if self.frontier.len() != self.frontier_generators.len() {
            return Err("frontier and generator ids differ in length".into());
        }
        for w in self.frontier.windows(2) {
            if w[1].0 < w[0].0 - tol || w[1].1 > w[0].1 + tol {
                return Err(format!("frontier not monotone at {:?} -> {:?}", w[0], w[1]));
            }
        }
        if let Some(p) = self.frontier.iter().find(|p| p.0 < -tol || p.1 < -tol) {
            return Err(format!("negative frontier point {p:?}"));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if let Some(c) = g.corners().iter().find(|&&c| !self.contains(c, tol)) {
                return Err(format!(
                    "corner {c:?} of generator {i} outside the frontier"
                ));
            }
        }
        if !self.time_sharing {
            for p in &self.frontier {
                if !self.generators.iter().any(|g| g.contains(*p, tol)) {
                    return Err(format!("frontier point {p:?} not covered by a generator"));
                }
            }
        }
        Ok(())
    }
}
