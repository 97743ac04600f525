use crate::linalg::{backward_error, CsrMatrix};
use crate::scalar::Field;
use num_traits::{Float, Zero};

/// Result of a Krylov solve.
#[derive(Debug, Clone)]
pub struct KrylovOutcome<S: Field> {
    pub x: Vec<S>,
    pub iterations: usize,
    pub backward_error: S::Real,
}

fn dot<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x.conj() * y).sum()
}

/// Jacobi-preconditioned BiCGSTAB; stops once the backward error reaches `tol`.
pub fn bicgstab<S: Field>(
    a: &CsrMatrix<S>,
    b: &[S],
    inv_diag: &[S],
    tol: S::Real,
    max_iterations: usize,
) -> KrylovOutcome<S> {
    let n = b.len();
    let mut x = vec![S::zero(); n];
    if b.iter().all(|v| v.modulus() == S::Real::zero()) {
        return KrylovOutcome {
            x,
            iterations: 0,
            backward_error: S::Real::zero(),
        };
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = S::one();
    let mut alpha = S::one();
    let mut omega = S::one();
    let mut v = vec![S::zero(); n];
    let mut p = vec![S::zero(); n];
    let mut y = vec![S::zero(); n];
    let mut z = vec![S::zero(); n];
    let mut t = vec![S::zero(); n];
    let mut eta = backward_error(a, &x, b);
    let mut it = 0;
    while it < max_iterations {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.modulus() == S::Real::zero() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = inv_diag[i] * p[i];
        }
        a.mul_vec(&y, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.modulus() == S::Real::zero() {
            break;
        }
        alpha = rho / denom;
        for i in 0..n {
            r[i] -= alpha * v[i];
            x[i] += alpha * y[i];
            z[i] = inv_diag[i] * r[i];
        }
        a.mul_vec(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt.modulus() == S::Real::zero() {
            S::zero()
        } else {
            dot(&t, &r) / tt
        };
        for i in 0..n {
            x[i] += omega * z[i];
            r[i] -= omega * t[i];
        }
        if it % 10 == 0 || omega.modulus() == S::Real::zero() {
            eta = backward_error(a, &x, b);
            if eta <= tol {
                break;
            }
            // Recompute the true residual to limit drift.
            a.mul_vec(&x, &mut t);
            for i in 0..n {
                r[i] = b[i] - t[i];
            }
        }
        if omega.modulus() == S::Real::zero() {
            break;
        }
    }
    eta = eta.min(backward_error(a, &x, b));
    KrylovOutcome {
        x,
        iterations: it,
        backward_error: eta,
    }
}
