//! Derivative-free minimization with the Nelder-Mead simplex method.
//!
//! Uses the dimension-adaptive coefficients of Gao and Han (2012), which
//! behave much better than the textbook `(1, 2, 1/2, 1/2)` choice once the
//! search space has more than a handful of parameters. After the simplex
//! collapses the search is restarted around the incumbent, which recovers
//! from the premature stalls Nelder-Mead is prone to in high dimension.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMead {
    /// Iteration budget shared by all rounds.
    pub max_iters: usize,
    /// Converged once the spread of simplex values drops below this.
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Extra rounds started from the incumbent after convergence.
    pub max_rounds: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tolerance: 1e-9,
            initial_step: 0.5,
            max_rounds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn adaptive(n: usize) -> Self {
        let n = n.max(1) as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if x0.is_empty() {
            let value = eval(x0);
            return Minimum {
                point: Vec::new(),
                value,
                iterations: 0,
                evaluations: 1,
            };
        }

        let mut best = x0.to_vec();
        let mut best_value = eval(&best);
        let mut iterations = 0;
        let mut step = self.initial_step;
        for _ in 0..=self.max_rounds {
            if iterations >= self.max_iters {
                break;
            }
            let budget = self.max_iters - iterations;
            let (point, value, used) = self.run(&mut eval, &best, best_value, step, budget);
            iterations += used;
            let improved = best_value - value;
            if value < best_value {
                best = point;
                best_value = value;
            }
            if improved <= self.tolerance {
                break;
            }
            step *= 0.5;
        }
        Minimum {
            point: best,
            value: best_value,
            iterations,
            evaluations,
        }
    }

    fn run<F>(
        &self,
        eval: &mut F,
        x0: &[f64],
        f0: f64,
        step: f64,
        budget: usize,
    ) -> (Vec<f64>, f64, usize)
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let k = Coefficients::adaptive(n);
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        values.push(f0);
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            values.push(eval(&x));
            simplex.push(x);
        }

        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut iters = 0;
        while iters < budget {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            let best = order[0];
            let worst = order[n];
            let second_worst = order[n - 1];
            if (values[worst] - values[best]).abs() <= self.tolerance {
                break;
            }
            iters += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += x;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= n as f64);

            let along = |coef: f64, out: &mut Vec<f64>, worst_pt: &[f64]| {
                for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst_pt) {
                    *o = c + coef * (c - w);
                }
            };

            along(k.reflect, &mut trial, &simplex[worst]);
            let fr = eval(&trial);
            if fr < values[best] {
                let reflected = trial.clone();
                along(k.reflect * k.expand, &mut trial, &simplex[worst]);
                let fe = eval(&trial);
                if fe < fr {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second_worst] {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
                continue;
            }
            if fr < values[worst] {
                along(k.reflect * k.contract, &mut trial, &simplex[worst]);
                let fc = eval(&trial);
                if fc <= fr {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = fc;
                    continue;
                }
            } else {
                along(-k.contract, &mut trial, &simplex[worst]);
                let fc = eval(&trial);
                if fc < values[worst] {
                    simplex[worst].copy_from_slice(&trial);
                    values[worst] = fc;
                    continue;
                }
            }
            // shrink towards the best vertex
            let anchor = simplex[best].clone();
            for &i in &order[1..] {
                for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                    *x = a + k.shrink * (*x - a);
                }
                values[i] = eval(&simplex[i]);
            }
        }
        let (bi, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .expect("non-empty simplex");
        (simplex[bi].clone(), values[bi], iters)
    }
}
