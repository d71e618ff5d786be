use nalgebra::{DMatrix, DVector};

use super::{CostMatrix, OtError};

/// Entropic transport plan `P = diag(u) K diag(v)` with `K = exp(−C/ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub plan: DMatrix<f64>,
    pub kernel: DMatrix<f64>,
    pub log_u: DVector<f64>,
    pub log_v: DVector<f64>,
    pub epsilon: f64,
    pub iterations_used: usize,
    /// `max(‖P·1 − a‖∞, ‖Pᵀ·1 − b‖∞)` after the last iteration.
    pub marginal_error: f64,
    pub converged: bool,
    /// Iterations ran on log-potentials because the kernel underflowed.
    pub log_domain: bool,
}

impl TransportPlan {
    pub fn u(&self) -> DVector<f64> {
        self.log_u.map(f64::exp)
    }

    pub fn v(&self) -> DVector<f64> {
        self.log_v.map(f64::exp)
    }
}

pub fn uniform_marginal(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / n as f64)
}

fn check_marginal(m: &DVector<f64>, n: usize, name: &str) -> Result<(), OtError> {
    if m.len() != n {
        return Err(OtError::Shape(format!("marginal {name} has length {}, cost is {n}x{n}", m.len())));
    }
    if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(OtError::InvalidParameter(format!("marginal {name} must be finite and nonnegative")));
    }
    let mass: f64 = m.iter().sum();
    if mass <= 0.0 {
        return Err(OtError::ZeroMass(name.to_string()));
    }
    if (mass - 1.0).abs() > 1e-9 {
        return Err(OtError::InvalidParameter(format!("marginal {name} sums to {mass}, expected 1")));
    }
    Ok(())
}

/// Sinkhorn scaling from `v = 1`, alternating `u = a / (K v)` and
/// `v = b / (Kᵀ u)` until the marginal error is at most `tol`.
///
/// Switches to log-domain updates when any kernel entry is below the
/// smallest normal f64. Hitting `max_iter` is reported through
/// `converged = false`, not as an error.
pub fn sinkhorn(
    cost: &CostMatrix,
    a: &DVector<f64>,
    b: &DVector<f64>,
    epsilon: f64,
    max_iter: usize,
    tol: f64,
) -> Result<TransportPlan, OtError> {
    let c = cost.entries();
    let n = c.nrows();
    check_marginal(a, n, "a")?;
    check_marginal(b, n, "b")?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(OtError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_iter == 0 {
        return Err(OtError::InvalidParameter("max_iter must be >= 1".into()));
    }
    let kernel = c.map(|x| (-x / epsilon).exp());
    let log_domain = kernel.iter().any(|&k| k < f64::MIN_POSITIVE);
    let (plan, log_u, log_v, iterations_used) = if log_domain {
        let (log_u, log_v, it) = log_iterations(c, a, b, epsilon, max_iter, tol);
        let plan = DMatrix::from_fn(n, n, |i, j| (log_u[i] - c[(i, j)] / epsilon + log_v[j]).exp());
        (plan, log_u, log_v, it)
    } else {
        let (u, v, it) = plain_iterations(&kernel, a, b, max_iter, tol);
        let plan = DMatrix::from_fn(n, n, |i, j| u[i] * kernel[(i, j)] * v[j]);
        (plan, u.map(f64::ln), v.map(f64::ln), it)
    };
    let marginal_error = marginal_error(&plan, a, b);
    Ok(TransportPlan {
        plan,
        kernel,
        log_u,
        log_v,
        epsilon,
        iterations_used,
        marginal_error,
        converged: marginal_error <= tol,
        log_domain,
    })
}

pub fn marginal_error(plan: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let rows = (0..plan.nrows()).map(|i| (plan.row(i).sum() - a[i]).abs());
    let cols = (0..plan.ncols()).map(|j| (plan.column(j).sum() - b[j]).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

fn plain_iterations(
    k: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, DVector<f64>, usize) {
    let n = a.len();
    let mut u = DVector::from_element(n, 1.0);
    let mut v = DVector::from_element(n, 1.0);
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let kv = k * &v;
        u = a.component_div(&kv);
        let ktu = k.tr_mul(&u);
        v = b.component_div(&ktu);
        // column sums equal b after the v update; row sums carry the error
        let kv = k * &v;
        let row_err = (0..n).map(|i| (u[i] * kv[i] - a[i]).abs()).fold(0.0, f64::max);
        if row_err <= tol {
            let plan = DMatrix::from_fn(n, n, |i, j| u[i] * k[(i, j)] * v[j]);
            if marginal_error(&plan, a, b) <= tol {
                break;
            }
        }
    }
    (u, v, it)
}

fn log_sum_exp(it: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = it.collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + vals.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn log_iterations(
    c: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    eps: f64,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, DVector<f64>, usize) {
    let n = a.len();
    let log_a = a.map(f64::ln);
    let log_b = b.map(f64::ln);
    let mut log_u = DVector::zeros(n);
    let mut log_v = DVector::zeros(n);
    let mut it = 0;
    while it < max_iter {
        it += 1;
        for i in 0..n {
            log_u[i] = if a[i] == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_a[i] - log_sum_exp((0..n).map(|j| log_v[j] - c[(i, j)] / eps))
            };
        }
        for j in 0..n {
            log_v[j] = if b[j] == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_b[j] - log_sum_exp((0..n).map(|i| log_u[i] - c[(i, j)] / eps))
            };
        }
        let row_err = (0..n)
            .map(|i| {
                let s: f64 = (0..n).map(|j| (log_u[i] - c[(i, j)] / eps + log_v[j]).exp()).sum();
                (s - a[i]).abs()
            })
            .fold(0.0, f64::max);
        if row_err <= tol {
            break;
        }
    }
    (log_u, log_v, it)
}
