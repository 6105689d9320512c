//! Limited-memory BFGS with a backtracking (Armijo) line search.
//!
//! Every accepted step strictly decreases the objective, so the recorded
//! history is monotone.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LbfgsConfig {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when the relative decrease over the last `window` iterations
    /// falls below this.
    pub tolerance: f64,
    pub window: usize,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            memory: 10,
            max_iterations: 200,
            tolerance: 1e-4,
            window: 5,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The line search could not find a decrease (at numerical precision).
    LineSearchStalled,
    ZeroGradient,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Objective after each accepted iteration, starting with the initial point.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(value: f64, grad: &[f64], at: usize) -> Result<()> {
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        let bad = grad.iter().filter(|g| !g.is_finite()).count();
        return Err(Error::Numeric(format!(
            "objective {value} with {bad} non-finite gradient entries at iteration {at}"
        )));
    }
    Ok(())
}

pub fn minimize<F>(x0: Vec<f64>, mut objective: F, config: &LbfgsConfig, mut on_iteration: impl FnMut(usize, f64)) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = objective(&x)?;
    check(fx, &g, 0)?;
    let mut history = vec![fx];
    on_iteration(0, fx);

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut dir = vec![0.0; n];
    let mut alpha = vec![0.0; config.memory];

    for iter in 1..=config.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-10 {
            return Ok(Minimum { x, value: fx, history, stop: StopReason::ZeroGradient });
        }

        // Two-loop recursion: dir = -H g.
        dir.copy_from_slice(&g);
        let m = s_hist.len();
        for i in (0..m).rev() {
            alpha[i] = rho_hist[i] * dot(&s_hist[i], &dir);
            for (d, y) in dir.iter_mut().zip(&y_hist[i]) {
                *d -= alpha[i] * y;
            }
        }
        if m > 0 {
            let gamma = dot(&s_hist[m - 1], &y_hist[m - 1]) / dot(&y_hist[m - 1], &y_hist[m - 1]);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for i in 0..m {
            let beta = rho_hist[i] * dot(&y_hist[i], &dir);
            for (d, s) in dir.iter_mut().zip(&s_hist[i]) {
                *d += s * (alpha[i] - beta);
            }
        }
        dir.iter_mut().for_each(|d| *d = -*d);

        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Not a descent direction: restart from steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = -gnorm * gnorm;
        }

        let mut step = if s_hist.is_empty() { 1.0 / gnorm } else { 1.0 };
        let mut accepted = None;
        for _ in 0..config.max_backtracks {
            let x_new: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (f_new, g_new) = objective(&x_new)?;
            if f_new.is_finite() && f_new <= fx + config.armijo * step * slope && f_new < fx {
                check(f_new, &g_new, iter)?;
                accepted = Some((x_new, f_new, g_new));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return Ok(Minimum { x, value: fx, history, stop: StopReason::LineSearchStalled });
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if s_hist.len() == config.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
        on_iteration(iter, fx);

        if history.len() > config.window {
            let past = history[history.len() - 1 - config.window];
            if (past - fx) / fx.abs().max(1e-12) < config.tolerance {
                return Ok(Minimum { x, value: fx, history, stop: StopReason::Converged });
            }
        }
    }
    Ok(Minimum { x, value: fx, history, stop: StopReason::MaxIterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_convex_quadratic() {
        // f(x) = Σ c_i (x_i - i)^2
        let c = [1.0, 10.0, 100.0, 0.5];
        let f = |x: &[f64]| {
            let v = x.iter().enumerate().map(|(i, xi)| c[i] * (xi - i as f64).powi(2)).sum();
            let g = x.iter().enumerate().map(|(i, xi)| 2.0 * c[i] * (xi - i as f64)).collect();
            Ok((v, g))
        };
        let cfg = LbfgsConfig {
            tolerance: 1e-14,
            ..LbfgsConfig::default()
        };
        let m = minimize(vec![5.0; 4], f, &cfg, |_, _| {}).unwrap();
        for (i, xi) in m.x.iter().enumerate() {
            assert!((xi - i as f64).abs() < 1e-5, "{:?}", m.x);
        }
        assert!(m.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rosenbrock_converges() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Ok((v, g))
        };
        let cfg = LbfgsConfig {
            tolerance: 1e-16,
            max_iterations: 500,
            ..LbfgsConfig::default()
        };
        let m = minimize(vec![-1.2, 1.0], f, &cfg, |_, _| {}).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn nan_objective_is_numeric_error() {
        let f = |_: &[f64]| Ok((f64::NAN, vec![0.0]));
        assert!(matches!(minimize(vec![0.0], f, &LbfgsConfig::default(), |_, _| {}), Err(Error::Numeric(_))));
    }
}
