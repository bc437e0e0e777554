//! Levenberg–Marquardt least squares for small, smooth models.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::linalg::RealMatrix;

/// A scalar model y = f(x; p) with an analytic gradient in p.
pub trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    fn gradient(&self, x: f64, p: &[f64], grad: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once every parameter step is below this fraction of the
    /// parameter magnitude.
    pub rel_step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, rel_step_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// 1σ from diag((JᵀJ)⁻¹) scaled by the residual variance.
    pub uncertainties: Vec<f64>,
    /// √(Σ rᵢ²), weighted if weights were given.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Normal {
    jtj: RealMatrix,
    jtr: Vec<f64>,
    cost: f64,
}

fn normal_equations<M: Model>(model: &M, xs: &[f64], ys: &[f64], w: Option<&[f64]>, p: &[f64]) -> Normal {
    let np = model.n_params();
    let mut jtj = RealMatrix::zeros(np, np);
    let mut jtr = vec![0.0; np];
    let mut grad = vec![0.0; np];
    let mut cost = 0.0;
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let wi = w.map_or(1.0, |w| w[i]);
        let r = y - model.eval(x, p);
        cost += wi * r * r;
        model.gradient(x, p, &mut grad);
        for a in 0..np {
            jtr[a] += wi * grad[a] * r;
            for b in 0..=a {
                jtj[(a, b)] += wi * grad[a] * grad[b];
            }
        }
    }
    for a in 0..np {
        for b in 0..a {
            jtj[(b, a)] = jtj[(a, b)];
        }
    }
    Normal { jtj, jtr, cost }
}

/// Solve with Jacobi (diagonal) equilibration so badly scaled parameters do
/// not look singular.
fn scaled_inverse(a: &RealMatrix) -> Option<RealMatrix> {
    let n = a.rows();
    let d: Vec<f64> = (0..n).map(|k| a[(k, k)].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut s = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = a[(i, j)] / (d[i] * d[j]);
        }
    }
    let mut inv = s.inverse()?;
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] /= d[i] * d[j];
        }
    }
    Some(inv)
}

fn cost<M: Model>(model: &M, xs: &[f64], ys: &[f64], w: Option<&[f64]>, p: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (&x, &y))| {
            let r = y - model.eval(x, p);
            w.map_or(1.0, |w| w[i]) * r * r
        })
        .sum()
}

/// Minimise Σ wᵢ (yᵢ − f(xᵢ; p))² from `initial`.
///
/// `converged` is false when the iteration budget runs out, the normal
/// matrix is singular, or the residual becomes non-finite.
pub fn levenberg_marquardt<M: Model>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
    initial: &[f64],
    options: LmOptions,
) -> LmOutcome {
    let np = model.n_params();
    let mut p = initial.to_vec();
    let mut lambda = 1e-3;
    let mut normal = normal_equations(model, xs, ys, weights, &p);
    let mut converged = false;
    let mut iterations = 0;
    let mut singular = false;

    while iterations < options.max_iterations && normal.cost.is_finite() {
        iterations += 1;
        if normal.cost == 0.0 {
            converged = true;
            break;
        }
        let mut a = normal.jtj.clone();
        for k in 0..np {
            let d = normal.jtj[(k, k)];
            a[(k, k)] = d + lambda * d;
        }
        let Some(inv) = scaled_inverse(&a) else {
            singular = true;
            break;
        };
        let step: Vec<f64> = (0..np).map(|i| (0..np).map(|j| inv[(i, j)] * normal.jtr[j]).sum()).collect();
        let trial: Vec<f64> = p.iter().zip(&step).map(|(x, s)| x + s).collect();
        let trial_cost = cost(model, xs, ys, weights, &trial);
        let small = p
            .iter()
            .zip(&step)
            .all(|(x, s)| s.abs() <= options.rel_step_tol * (x.abs() + options.rel_step_tol));
        if trial_cost.is_finite() && trial_cost <= normal.cost {
            p = trial;
            normal = normal_equations(model, xs, ys, weights, &p);
            lambda = (lambda / 10.0).max(1e-12);
            if small {
                converged = true;
                break;
            }
        } else {
            if small || lambda > 1e16 {
                // No downhill step left at machine precision.
                converged = lambda > 1e16 || small;
                break;
            }
            lambda *= 10.0;
        }
    }

    let dof = xs.len().saturating_sub(np).max(1) as f64;
    let variance = normal.cost / dof;
    let uncertainties = match (singular, scaled_inverse(&normal.jtj)) {
        (false, Some(cov)) => (0..np).map(|k| (cov[(k, k)].max(0.0) * variance).sqrt()).collect(),
        _ => {
            converged = false;
            vec![f64::NAN; np]
        }
    };
    LmOutcome {
        params: p,
        uncertainties,
        residual_norm: normal.cost.sqrt(),
        converged: converged && normal.cost.is_finite(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;

    impl Model for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] * x + p[1]
        }
        fn gradient(&self, x: f64, _p: &[f64], g: &mut [f64]) {
            g[0] = x;
            g[1] = 1.0;
        }
    }

    struct Decay;

    impl Model for Decay {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] * (-p[1] * x).exp()
        }
        fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
            let e = (-p[1] * x).exp();
            g[0] = e;
            g[1] = -p[0] * x * e;
        }
    }

    #[test]
    fn recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let out = levenberg_marquardt(&Line, &xs, &ys, None, &[0.0, 0.0], LmOptions::default());
        assert!(out.converged);
        assert!((out.params[0] - 3.0).abs() < 1e-12 && (out.params[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_decay_from_poor_start() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-1.3 * x).exp()).collect();
        let out = levenberg_marquardt(&Decay, &xs, &ys, None, &[1.0, 0.2], LmOptions::default());
        assert!(out.converged);
        assert!((out.params[1] / 1.3 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_model_is_flagged() {
        // Amplitude zero leaves the rate unidentifiable.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys = vec![0.0; 10];
        let out = levenberg_marquardt(&Decay, &xs, &ys, None, &[0.0, 1.0], LmOptions::default());
        assert!(!out.converged);
    }
}
