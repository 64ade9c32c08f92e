use std::collections::VecDeque;

use super::{
    check_start, dot, norm_inf, OptOptions, OptResult, TerminationReason, WOLFE_C1, WOLFE_C2,
};
use crate::error::Result;

const MAX_BRACKET_STEPS: usize = 25;
const MAX_ZOOM_STEPS: usize = 40;

/// L-BFGS with separate objective and gradient callbacks. Every trial point
/// of the line search evaluates both.
pub fn lbfgs_minimize<F, G>(
    mut objective: F,
    mut gradient: G,
    x0: &[f64],
    opts: &OptOptions,
) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    lbfgs_minimize_fg(|x| (objective(x), gradient(x)), x0, opts)
}

struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

struct Counter<F> {
    fg: F,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Counter<F> {
    fn eval(&mut self, x: Vec<f64>) -> Option<Point> {
        if self.evals >= self.max {
            return None;
        }
        self.evals += 1;
        let (f, g) = (self.fg)(&x);
        Some(Point { x, f, g })
    }
}

enum Search {
    Accepted(Point, f64),
    Failed,
    Budget,
}

/// L-BFGS where one callback returns value and gradient together.
///
/// Accepted iterates satisfy the strong Wolfe conditions with
/// [`WOLFE_C1`]/[`WOLFE_C2`], so the accepted values never increase.
pub fn lbfgs_minimize_fg<FG>(fg: FG, x0: &[f64], opts: &OptOptions) -> Result<OptResult>
where
    FG: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    lbfgs_core(fg, x0, opts, |_, _| {})
}

/// Accepted step as seen by the observer: the base point, the accepted point
/// and the search direction.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct AcceptedStep<'a> {
    pub base_f: f64,
    pub base_g: &'a [f64],
    pub f: f64,
    pub g: &'a [f64],
    pub dir: &'a [f64],
    pub alpha: f64,
}

pub(crate) fn lbfgs_core<FG, O>(
    fg: FG,
    x0: &[f64],
    opts: &OptOptions,
    mut observe: O,
) -> Result<OptResult>
where
    FG: FnMut(&[f64]) -> (f64, Vec<f64>),
    O: FnMut(usize, &AcceptedStep<'_>),
{
    check_start(x0)?;
    opts.validate()?;
    let mut counter = Counter {
        fg,
        evals: 0,
        max: opts.max_evals,
    };
    let mut cur = counter.eval(x0.to_vec()).expect("max_evals >= 1");
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);

    let mut iterations = 0usize;
    let finish =
        |cur: Point, evals: usize, iterations: usize, reason: TerminationReason| OptResult {
            x_best: cur.x,
            f_best: cur.f,
            n_evals: evals,
            n_grad_evals: evals,
            n_iterations: iterations,
            converged: reason == TerminationReason::Tolerance,
            termination_reason: reason,
        };

    if !cur.f.is_finite() || cur.g.iter().any(|v| !v.is_finite()) {
        let evals = counter.evals;
        return Ok(finish(
            cur,
            evals,
            iterations,
            TerminationReason::LineSearchFailure,
        ));
    }

    loop {
        if norm_inf(&cur.g) < opts.grad_tol {
            let evals = counter.evals;
            return Ok(finish(cur, evals, iterations, TerminationReason::Tolerance));
        }
        if counter.evals >= counter.max {
            let evals = counter.evals;
            return Ok(finish(cur, evals, iterations, TerminationReason::MaxEvals));
        }

        let mut retried = false;
        loop {
            let (dir, first_step) = if history.is_empty() {
                let gn = dot(&cur.g, &cur.g).sqrt();
                (
                    cur.g.iter().map(|v| -v).collect::<Vec<_>>(),
                    (1.0 / gn).min(1.0),
                )
            } else {
                (two_loop(&cur.g, &history), 1.0)
            };
            let slope = dot(&dir, &cur.g);
            let (dir, slope, first_step) = if slope < 0.0 {
                (dir, slope, first_step)
            } else {
                history.clear();
                let gn2 = dot(&cur.g, &cur.g);
                (
                    cur.g.iter().map(|v| -v).collect(),
                    -gn2,
                    (1.0 / gn2.sqrt()).min(1.0),
                )
            };
            match strong_wolfe(&mut counter, &cur, &dir, slope, first_step) {
                Search::Accepted(next, alpha) => {
                    iterations += 1;
                    observe(
                        iterations,
                        &AcceptedStep {
                            base_f: cur.f,
                            base_g: &cur.g,
                            f: next.f,
                            g: &next.g,
                            dir: &dir,
                            alpha,
                        },
                    );
                    let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > f64::EPSILON * dot(&y, &y).max(f64::MIN_POSITIVE) {
                        if history.len() == opts.memory {
                            history.pop_front();
                        }
                        history.push_back((s, y, 1.0 / sy));
                    }
                    cur = next;
                    break;
                }
                Search::Budget => {
                    let evals = counter.evals;
                    return Ok(finish(cur, evals, iterations, TerminationReason::MaxEvals));
                }
                Search::Failed => {
                    if !retried && !history.is_empty() {
                        history.clear();
                        retried = true;
                        continue;
                    }
                    let evals = counter.evals;
                    return Ok(finish(
                        cur,
                        evals,
                        iterations,
                        TerminationReason::LineSearchFailure,
                    ));
                }
            }
        }
    }
}

/// `-H g` from the stored pairs, with the initial inverse Hessian scaled by
/// `s·y / y·y` of the newest pair.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let (s, y, _) = history.back().expect("non-empty history");
    let gamma = dot(s, y) / dot(y, y);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

struct Sample {
    alpha: f64,
    f: f64,
    slope: f64,
    point: Point,
}

fn sample<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    counter: &mut Counter<F>,
    base: &Point,
    dir: &[f64],
    alpha: f64,
) -> Option<Sample> {
    let x: Vec<f64> = base.x.iter().zip(dir).map(|(x, d)| x + alpha * d).collect();
    let point = counter.eval(x)?;
    let slope = dot(&point.g, dir);
    Some(Sample {
        alpha,
        f: point.f,
        slope,
        point,
    })
}

/// Minimizer of the cubic matching values and slopes at both ends,
/// safeguarded to the interior of the interval; bisection otherwise.
fn interpolate(lo: &Sample, hi: &Sample) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let mid = 0.5 * (a + b);
    if !(disc >= 0.0) {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 || !denom.is_finite() {
        return mid;
    }
    let t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (left, right) = (a.min(b), a.max(b));
    let margin = 0.1 * (right - left);
    if t.is_finite() && t > left + margin && t < right - margin {
        t
    } else {
        mid
    }
}

/// Values closer than this to `f0` are treated as equal to it: below that
/// level the Armijo test only sees rounding noise, so acceptance and
/// bracketing fall back to the slope (an approximate-Wolfe rule that still
/// never accepts a value above `f0`).
fn noise_level(f0: f64) -> f64 {
    16.0 * f64::EPSILON * f0.abs().max(f64::MIN_POSITIVE)
}

fn strong_wolfe<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    counter: &mut Counter<F>,
    base: &Point,
    dir: &[f64],
    slope0: f64,
    first_step: f64,
) -> Search {
    let f0 = base.f;
    let noise = noise_level(f0);
    let armijo = |s: &Sample| s.f <= f0 + WOLFE_C1 * s.alpha * slope0;
    let curvature = |s: &Sample| s.slope.abs() <= -WOLFE_C2 * slope0;

    let mut prev: Option<Sample> = None;
    let mut alpha = first_step;
    for _ in 0..MAX_BRACKET_STEPS {
        let Some(cur) = sample(counter, base, dir, alpha) else {
            return Search::Budget;
        };
        if !cur.f.is_finite() {
            alpha *= 0.1;
            continue;
        }
        let flat = (cur.f - f0).abs() <= noise;
        if flat && cur.f <= f0 && curvature(&cur) {
            return Search::Accepted(cur.point, cur.alpha);
        }
        let worse_than_prev = prev.as_ref().is_some_and(|p| cur.f >= p.f);
        if !flat && (!armijo(&cur) || worse_than_prev) {
            let lo = prev.unwrap_or_else(|| origin_sample(base, slope0));
            return zoom(counter, base, dir, slope0, lo, cur);
        }
        if !flat && curvature(&cur) {
            return Search::Accepted(cur.point, cur.alpha);
        }
        if cur.slope >= 0.0 {
            let hi = prev.unwrap_or_else(|| origin_sample(base, slope0));
            return zoom(counter, base, dir, slope0, cur, hi);
        }
        alpha = cur.alpha * 2.0;
        prev = Some(cur);
    }
    Search::Failed
}

fn origin_sample(base: &Point, slope0: f64) -> Sample {
    Sample {
        alpha: 0.0,
        f: base.f,
        slope: slope0,
        point: Point {
            x: base.x.clone(),
            f: base.f,
            g: base.g.clone(),
        },
    }
}

fn zoom<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    counter: &mut Counter<F>,
    base: &Point,
    dir: &[f64],
    slope0: f64,
    mut lo: Sample,
    mut hi: Sample,
) -> Search {
    let f0 = base.f;
    let noise = noise_level(f0);
    for _ in 0..MAX_ZOOM_STEPS {
        if (hi.alpha - lo.alpha).abs() <= f64::EPSILON * lo.alpha.abs().max(1e-3) {
            break;
        }
        let alpha = interpolate(&lo, &hi);
        let Some(cur) = sample(counter, base, dir, alpha) else {
            return Search::Budget;
        };
        let curvature = cur.slope.abs() <= -WOLFE_C2 * slope0;
        if (cur.f - f0).abs() <= noise {
            if cur.f <= f0 && curvature {
                return Search::Accepted(cur.point, cur.alpha);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = cur;
            } else {
                lo = cur;
            }
            continue;
        }
        if !(cur.f <= f0 + WOLFE_C1 * alpha * slope0) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature {
                return Search::Accepted(cur.point, cur.alpha);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    Search::Failed
}
