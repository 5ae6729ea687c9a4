//! Quasi-Newton minimisation with finite-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Central-difference gradient.
pub fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// BFGS with an Armijo backtracking line search.
pub fn bfgs(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    let mut g = DVector::from_vec(fd_gradient(&f, x.as_slice(), opts.fd_step));
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;

    while iterations < opts.max_iterations && g.norm() > opts.gradient_tolerance {
        iterations += 1;
        let mut p = -(&h_inv * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            h_inv = DMatrix::identity(n, n);
            p = -g.clone();
            slope = -g.norm_squared();
        }
        let mut step = 1.0;
        let (x_new, f_new) = loop {
            let candidate = &x + &p * step;
            let fc = f(candidate.as_slice());
            if fc <= fx + 1e-4 * step * slope {
                break (candidate, fc);
            }
            step *= 0.5;
            if step < 1e-12 {
                return Minimum {
                    x: x.as_slice().to_vec(),
                    value: fx,
                    iterations,
                };
            }
        };
        let g_new = DVector::from_vec(fd_gradient(&f, x_new.as_slice(), opts.fd_step));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - (&s * y.transpose()) * rho;
            let right = &eye - (&y * s.transpose()) * rho;
            h_inv = &left * &h_inv * &right + (&s * s.transpose()) * rho;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    Minimum {
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
    }
}
