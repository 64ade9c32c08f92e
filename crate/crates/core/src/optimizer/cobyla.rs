use nalgebra::{DMatrix, DVector};

use super::{check_start, dot, OptOptions, OptResult, TerminationReason};
use crate::error::{Error, Result};

// Simplex acceptability and step constants (Powell's choices).
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;
const POOR_RATIO: f64 = 0.1;

struct Simplex {
    x: Vec<Vec<f64>>,
    f: Vec<f64>,
}

impl Simplex {
    /// Index of the lowest value; ties go to the lowest index.
    fn pole(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.f.iter().enumerate() {
            if v < self.f[best] {
                best = i;
            }
        }
        best
    }
}

struct Evaluator<F> {
    f: F,
    evals: usize,
    max: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.evals >= self.max {
            return Ok(None);
        }
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::NonFinite("objective value"));
        }
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        Ok(Some(v))
    }
}

/// Linear model of the simplex around its pole.
struct Model {
    pole: usize,
    /// Non-pole vertex indices, in the column order of `inv`.
    others: Vec<usize>,
    /// Rows: inverse of the matrix of edge vectors from the pole.
    inv: DMatrix<f64>,
    grad: Vec<f64>,
    /// Edge lengths from the pole.
    veta: Vec<f64>,
    /// Distance of each vertex from the opposite face.
    vsig: Vec<f64>,
}

fn build_model(s: &Simplex) -> Option<Model> {
    let pole = s.pole();
    let n = s.x[0].len();
    let others: Vec<usize> = (0..=n).filter(|&i| i != pole).collect();
    let d = DMatrix::from_fn(n, n, |r, c| s.x[others[c]][r] - s.x[pole][r]);
    let inv = d.clone().try_inverse()?;
    if inv.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let df = DVector::from_iterator(n, others.iter().map(|&i| s.f[i] - s.f[pole]));
    let grad = inv.transpose() * df;
    let veta = (0..n).map(|c| d.column(c).norm()).collect();
    let vsig = (0..n).map(|r| 1.0 / inv.row(r).norm()).collect();
    Some(Model {
        pole,
        others,
        inv,
        grad: grad.iter().copied().collect(),
        veta,
        vsig,
    })
}

fn offset(x: &[f64], d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + b).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Unconstrained COBYLA: linear interpolation on a `P+1`-vertex simplex with
/// a trust radius that shrinks from `initial_trust_radius` to
/// `final_trust_radius`.
///
/// The returned point is the best one evaluated, so it is never worse than
/// `x0`. A non-finite objective value is an error.
pub fn cobyla_minimize<F>(objective: F, x0: &[f64], opts: &OptOptions) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    check_start(x0)?;
    opts.validate()?;
    let n = x0.len();
    let rho_end = opts.final_trust_radius;
    let mut rho = opts.initial_trust_radius;
    let mut ev = Evaluator {
        f: objective,
        evals: 0,
        max: opts.max_evals,
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
    };
    let mut iterations = 0;

    let finish = |ev: Evaluator<F>, iterations, reason| OptResult {
        x_best: ev.best_x,
        f_best: ev.best_f,
        n_evals: ev.evals,
        n_grad_evals: 0,
        n_iterations: iterations,
        converged: reason != TerminationReason::MaxEvals,
        termination_reason: reason,
    };

    let f0 = ev.eval(x0)?.expect("max_evals is at least one");
    let Some(mut simplex) = initial_simplex(&mut ev, x0, f0, rho)? else {
        return Ok(finish(ev, iterations, TerminationReason::MaxEvals));
    };

    loop {
        let Some(model) = build_model(&simplex) else {
            let pole = simplex.pole();
            let (px, pf) = (simplex.x[pole].clone(), simplex.f[pole]);
            match initial_simplex(&mut ev, &px, pf, rho)? {
                Some(s) => {
                    simplex = s;
                    continue;
                }
                None => return Ok(finish(ev, iterations, TerminationReason::MaxEvals)),
            }
        };
        let pole_x = simplex.x[model.pole].clone();
        let pole_f = simplex.f[model.pole];

        let too_long = (0..n)
            .filter(|&j| model.veta[j] > BETA * rho)
            .max_by(|&a, &b| model.veta[a].total_cmp(&model.veta[b]).then(b.cmp(&a)));
        let too_flat = (0..n)
            .filter(|&j| model.vsig[j] < ALPHA * rho)
            .min_by(|&a, &b| model.vsig[a].total_cmp(&model.vsig[b]));
        if let Some(j) = too_long.or(too_flat) {
            // Move vertex j off the opposite face, downhill in the model.
            let row: Vec<f64> = model.inv.row(j).iter().copied().collect();
            let scale = GAMMA * rho * model.vsig[j];
            let mut step: Vec<f64> = row.iter().map(|v| scale * v).collect();
            if dot(&step, &model.grad) > 0.0 {
                step.iter_mut().for_each(|v| *v = -*v);
            }
            let x = offset(&pole_x, &step);
            let Some(fx) = ev.eval(&x)? else {
                return Ok(finish(ev, iterations, TerminationReason::MaxEvals));
            };
            let k = model.others[j];
            simplex.x[k] = x;
            simplex.f[k] = fx;
            continue;
        }

        let gnorm = dot(&model.grad, &model.grad).sqrt();
        let mut poor = true;
        if gnorm > 0.0 {
            iterations += 1;
            let step: Vec<f64> = model.grad.iter().map(|g| -rho * g / gnorm).collect();
            let x = offset(&pole_x, &step);
            let Some(fx) = ev.eval(&x)? else {
                return Ok(finish(ev, iterations, TerminationReason::MaxEvals));
            };
            let improved = fx < pole_f;
            let ratio = (pole_f - fx) / (rho * gnorm);
            poor = ratio < POOR_RATIO;

            let mut drop: Option<(usize, f64)> = None;
            for j in 0..n {
                let k = model.others[j];
                let sigma = dot(&model.inv.row(j).iter().copied().collect::<Vec<_>>(), &step).abs();
                let far = dist(&simplex.x[k], &x) / (DELTA * rho);
                let score = sigma * far.powi(2).max(1.0);
                if drop.is_none_or(|(_, s)| score > s) {
                    drop = Some((j, score));
                }
            }
            if let Some((j, score)) = drop {
                if improved || score > 1.0 {
                    let k = model.others[j];
                    simplex.x[k] = x;
                    simplex.f[k] = fx;
                }
            }
        }
        if poor {
            if rho <= rho_end {
                return Ok(finish(ev, iterations, TerminationReason::TrustRadius));
            }
            rho *= 0.5;
            if rho <= 1.5 * rho_end {
                rho = rho_end;
            }
        }
    }
}

/// Axis-aligned simplex of radius `rho` around `x`; `None` when the budget
/// runs out.
fn initial_simplex<F: FnMut(&[f64]) -> f64>(
    ev: &mut Evaluator<F>,
    x: &[f64],
    fx: f64,
    rho: f64,
) -> Result<Option<Simplex>> {
    let n = x.len();
    let mut s = Simplex {
        x: vec![x.to_vec()],
        f: vec![fx],
    };
    for j in 0..n {
        let mut v = x.to_vec();
        v[j] += rho;
        let Some(fv) = ev.eval(&v)? else {
            return Ok(None);
        };
        s.x.push(v);
        s.f.push(fv);
    }
    Ok(Some(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts(rho_end: f64) -> OptOptions {
        OptOptions {
            final_trust_radius: rho_end,
            ..OptOptions::default()
        }
    }

    #[test]
    fn quadratic_reaches_minimum() {
        let a = [0.5, -0.5];
        let f = |x: &[f64]| (x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2);
        let r = cobyla_minimize(f, &[0.0, 0.0], &opts(1e-8)).unwrap();
        assert!(r.converged);
        assert_eq!(r.termination_reason, TerminationReason::TrustRadius);
        assert!(dist(&r.x_best, &a) < 1e-6, "{:?}", r.x_best);
        assert_eq!(r.n_grad_evals, 0);
    }

    #[test]
    fn abs_sum_nonsmooth() {
        let f = |x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>();
        let r = cobyla_minimize(f, &[1.0, 1.0], &OptOptions::default()).unwrap();
        assert!(r.f_best < 1e-4, "{}", r.f_best);
    }

    #[test]
    fn rosenbrock_makes_progress() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = cobyla_minimize(f, &[-1.2, 1.0], &opts(1e-8)).unwrap();
        assert!(r.f_best < 1e-3, "{} after {}", r.f_best, r.n_evals);
    }

    #[test]
    fn f_best_matches_x_best() {
        let mut f = |x: &[f64]| (x[0] - 0.3).cos() + x[1].powi(2) * 0.5 + x[2].sin();
        let r = cobyla_minimize(&mut f, &[0.1, 0.2, 0.3], &OptOptions::default()).unwrap();
        assert_eq!(r.f_best.to_bits(), f(&r.x_best).to_bits());
    }

    #[test]
    fn budget_exhaustion_returns_best_so_far() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 2.0).powi(2)).sum::<f64>();
        let x0 = [0.0; 4];
        let o = OptOptions {
            max_evals: 12,
            ..OptOptions::default()
        };
        let r = cobyla_minimize(f, &x0, &o).unwrap();
        assert!(!r.converged);
        assert_eq!(r.termination_reason, TerminationReason::MaxEvals);
        assert_eq!(r.n_evals, 12);
        assert!(r.f_best < f(&x0));
    }

    #[test]
    fn budget_of_one() {
        let o = OptOptions {
            max_evals: 1,
            ..OptOptions::default()
        };
        let r = cobyla_minimize(|x| x[0] * x[0], &[3.0], &o).unwrap();
        assert_eq!(r.n_evals, 1);
        assert_eq!(r.x_best, vec![3.0]);
        assert_eq!(r.f_best, 9.0);
    }

    #[test]
    fn one_dimensional() {
        let r = cobyla_minimize(|x| (x[0] + 1.25).powi(2), &[0.0], &opts(1e-9)).unwrap();
        assert!((r.x_best[0] + 1.25).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        let f = |x: &[f64]| x[0];
        assert!(cobyla_minimize(f, &[], &OptOptions::default()).is_err());
        assert!(cobyla_minimize(f, &[f64::NAN], &OptOptions::default()).is_err());
        assert!(cobyla_minimize(|_| f64::NAN, &[0.0], &OptOptions::default()).is_err());
        let bad = OptOptions {
            final_trust_radius: 1.0,
            initial_trust_radius: 0.1,
            ..OptOptions::default()
        };
        assert!(cobyla_minimize(f, &[0.0], &bad).is_err());
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] * 1.7).sin() + (x[1] - x[0]).powi(2) + 0.1 * x[2].abs();
        let x0 = [0.4, -0.2, 0.9];
        let a = cobyla_minimize(f, &x0, &OptOptions::default()).unwrap();
        let b = cobyla_minimize(f, &x0, &OptOptions::default()).unwrap();
        assert_eq!(a, b);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.x_best), bits(&b.x_best));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn never_worse_than_start(
            x0 in proptest::collection::vec(-3.0f64..3.0, 1..6),
            freq in 0.5f64..4.0,
            budget in 1usize..200,
        ) {
            let f = |x: &[f64]| x.iter().enumerate()
                .map(|(i, v)| (freq * v + i as f64).sin() + 0.05 * v * v)
                .sum::<f64>();
            let o = OptOptions { max_evals: budget, ..OptOptions::default() };
            let r = cobyla_minimize(f, &x0, &o).unwrap();
            prop_assert!(r.f_best <= f(&x0));
            prop_assert!(r.n_evals <= budget);
            prop_assert_eq!(r.f_best.to_bits(), f(&r.x_best).to_bits());
        }
    }
}
