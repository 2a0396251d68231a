//! Boundary of unions of pentagons, with and without time sharing.

use serde::{Deserialize, Serialize};

use super::{Pentagon, RatePoint, RateRegion};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub point: RatePoint,
    pub generator: usize,
}

/// Height of pentagon `p` above `x`, or `None` outside its extent.
fn height(p: &Pentagon, x: f64) -> Option<f64> {
    if x < -EPS || x > p.a_max + EPS {
        None
    } else if x <= p.sum_max - p.b_max {
        Some(p.b_max)
    } else {
        Some(p.sum_max - x)
    }
}

fn push_point(out: &mut Vec<FrontierPoint>, point: RatePoint, generator: usize) {
    if let Some(last) = out.last() {
        if (last.point.0 - point.0).abs() <= EPS && (last.point.1 - point.1).abs() <= EPS {
            return;
        }
    }
    out.push(FrontierPoint { point, generator });
}

/// Drops points lying on the segment between their neighbours.
fn simplify(points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    let mut out: Vec<FrontierPoint> = Vec::with_capacity(points.len());
    for p in points {
        while out.len() >= 2 {
            let a = out[out.len() - 2].point;
            let b = out[out.len() - 1].point;
            let c = p.point;
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            let between = (b.0 - a.0) * (c.0 - b.0) >= -EPS && (b.1 - a.1) * (c.1 - b.1) >= -EPS;
            if cross.abs() <= EPS && between {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Upper-right boundary of the union of `pentagons` (normalized first):
/// a staircase polyline from the vertical axis down to the horizontal
/// axis, with vertical drops where one pentagon ends. Points are sorted by
/// first coordinate, ties by decreasing second coordinate.
pub fn pareto_frontier(pentagons: &[Pentagon]) -> Vec<FrontierPoint> {
    let gens: Vec<Pentagon> = pentagons.iter().map(Pentagon::normalized).collect();
    let live: Vec<usize> = (0..gens.len()).filter(|&i| !gens[i].is_empty()).collect();
    if live.is_empty() {
        return Vec::new();
    }
    let x_max = live.iter().map(|&i| gens[i].a_max).fold(0.0, f64::max);
    let mut xs = vec![0.0, x_max];
    for &i in &live {
        let p = &gens[i];
        xs.push(p.sum_max - p.b_max);
        xs.push(p.a_max);
        for &j in &live {
            xs.push(p.sum_max - gens[j].b_max);
        }
    }
    xs.retain(|x| (0.0..=x_max).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= EPS);

    let winner = |x: f64| -> (usize, f64) {
        let mut best = (live[0], f64::NEG_INFINITY);
        for &i in &live {
            if let Some(h) = height(&gens[i], x) {
                if h > best.1 + EPS {
                    best = (i, h);
                }
            }
        }
        best
    };

    let mut out = Vec::new();
    if xs.len() == 1 {
        let (w, h) = winner(0.0);
        push_point(&mut out, RatePoint(0.0, h), w);
    }
    for pair in xs.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        let (w, _) = winner(0.5 * (l + r));
        let p = &gens[w];
        let hl = height(p, l).unwrap_or(0.0);
        let hr = height(p, r).unwrap_or(0.0);
        push_point(&mut out, RatePoint(l, hl), w);
        push_point(&mut out, RatePoint(r, hr), w);
    }
    let last = *out.last().expect("non-empty");
    if last.point.1 > EPS {
        push_point(&mut out, RatePoint(last.point.0, 0.0), last.generator);
    }
    simplify(out)
}

/// Upper-right boundary of the convex hull of the union of `pentagons`,
/// i.e. the region reachable by time sharing between generators.
pub fn concave_frontier(pentagons: &[Pentagon]) -> Vec<FrontierPoint> {
    let mut pts: Vec<FrontierPoint> = Vec::new();
    for (i, p) in pentagons.iter().enumerate() {
        if p.is_empty() {
            continue;
        }
        for c in p.corners() {
            pts.push(FrontierPoint {
                point: c,
                generator: i,
            });
        }
    }
    if pts.is_empty() {
        return pts;
    }
    pts.sort_by(|a, b| {
        a.point
            .0
            .total_cmp(&b.point.0)
            .then(b.point.1.total_cmp(&a.point.1))
            .then(a.generator.cmp(&b.generator))
    });
    let mut hull: Vec<FrontierPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2].point;
            let b = hull[hull.len() - 1].point;
            let c = p.point;
            // pop b unless it sits above chord a-c by more than EPS (a
            // distance, so short chords are judged like long ones)
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross >= -EPS * (c.0 - a.0).hypot(c.1 - a.1) {
                hull.pop();
            } else {
                break;
            }
        }
        if let Some(last) = hull.last() {
            if (last.point.0 - p.point.0).abs() <= EPS && (last.point.1 - p.point.1).abs() <= EPS {
                continue;
            }
        }
        hull.push(p);
    }
    hull
}

/// Highest frontier value over `x`, or `None` beyond the frontier.
fn frontier_height(frontier: &[RatePoint], x: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |h: f64| best = Some(best.map_or(h, |b: f64| b.max(h)));
    if frontier.len() == 1 {
        let p = frontier[0];
        if x <= p.0 + EPS {
            consider(p.1);
        }
    }
    for w in frontier.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x < a.0 - EPS || x > b.0 + EPS {
            continue;
        }
        if (b.0 - a.0).abs() <= EPS {
            consider(a.1.max(b.1));
        } else {
            let t = ((x - a.0) / (b.0 - a.0)).clamp(0.0, 1.0);
            consider(a.1 + t * (b.1 - a.1));
        }
    }
    best
}

/// Whether `point - (tol, tol)` lies in the region (the region is closed
/// downwards within the nonnegative quadrant).
pub fn region_contains(region: &RateRegion, point: RatePoint, tol: f64) -> bool {
    let x = (point.0 - tol).max(0.0);
    let y = point.1 - tol;
    if y <= 0.0 && x <= 0.0 {
        return true;
    }
    match frontier_height(&region.frontier, x) {
        Some(h) => y <= h.max(0.0) + EPS,
        None => false,
    }
}

/// Rate pairs reachable by using the strategies behind `p0` and `p1` on
/// fractions `lambda` and `1 - lambda` of the channel uses.
pub fn time_share(p0: &Pentagon, p1: &Pentagon, lambda: f64) -> Pentagon {
    let (a, b) = (p0.normalized(), p1.normalized());
    let mu = 1.0 - lambda;
    Pentagon::new(
        lambda * a.a_max + mu * b.a_max,
        lambda * a.b_max + mu * b.b_max,
        lambda * a.sum_max + mu * b.sum_max,
    )
}
