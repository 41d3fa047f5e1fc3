//! Dense BFGS with backtracking line search, used by the unitary-fitting and
//! game-ansatz optimizers. Gradients default to central finite differences.

use nalgebra::{DMatrix, DVector};

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iters: 2000,
            grad_tol: 1e-9,
            fd_step: 1e-6,
        }
    }
}

/// Result of a local minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xt = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        xt[i] = xi + h;
        let fp = f(&xt);
        xt[i] = xi - h;
        let fm = f(&xt);
        xt[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// BFGS minimization of `f` from `x0`, with an optional custom gradient.
pub fn minimize<F, G>(f: F, grad: Option<G>, x0: &[f64], opts: &BfgsOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let gradient = |x: &[f64]| -> DVector<f64> {
        let g = match &grad {
            Some(g) => g(x),
            None => fd_gradient(&f, x, opts.fd_step),
        };
        DVector::from_vec(g)
    };

    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    let mut g = gradient(x.as_slice());
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;

    for iter in 0..opts.max_iters {
        iterations = iter + 1;
        let gnorm = g.norm();
        if gnorm < opts.grad_tol {
            break;
        }
        let mut dir = -(&h_inv * &g);
        let mut slope = dir.dot(&g);
        if slope >= 0.0 {
            // curvature information went bad; restart from steepest descent
            h_inv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = dir.dot(&g);
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = false;
        let mut x_new = x.clone();
        let mut f_new = fx;
        for _ in 0..50 {
            x_new = &x + &dir * step;
            f_new = f(x_new.as_slice());
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no further progress along any tested step
        }

        let g_new = gradient(x_new.as_slice());
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            // BFGS inverse-Hessian update
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H <- H + (sy + yHy) rho^2 s s^T - rho (H y s^T + s y^T H)
            h_inv += &s * s.transpose() * (rho * rho * (sy + yhy));
            h_inv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }

        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if df.abs() < 1e-18 && step >= 1.0 {
            break; // flat to machine precision
        }
    }

    Minimum {
        grad_norm: g.norm(),
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
    }
}
