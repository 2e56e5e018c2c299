//! One-dimensional minimization and small dense Newton systems.

use nalgebra::{DMatrix, DVector};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[a, b]`; returns `(x, f(x))` at the best point seen.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizes a function on a circle: a uniform scan of `samples` points
/// followed by golden section inside the best bracket. Returns `(θ ∈ [0, 2π), f(θ))`.
pub fn minimize_periodic(mut f: impl FnMut(f64) -> f64, samples: usize, tol: f64) -> (f64, f64) {
    let tau = std::f64::consts::TAU;
    let h = tau / samples as f64;
    let (best, _) = (0..samples)
        .map(|k| (k, f(k as f64 * h)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let centre = best as f64 * h;
    let (theta, value) = golden_section(&mut f, centre - h, centre + h, tol);
    (theta.rem_euclid(tau), value)
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual max-norm after each iteration, starting with the seed.
    pub trace: Vec<f64>,
}

/// Damped Newton for square systems with an analytic Jacobian.
pub fn newton(
    residual: impl Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    seed: DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> NewtonOutcome {
    let mut x = seed;
    let mut r = residual(&x);
    let mut norm = r.amax();
    let mut trace = vec![norm];
    let mut iterations = 0;
    while norm > tol && iterations < max_iter && norm.is_finite() {
        iterations += 1;
        let Some(step) = jacobian(&x).lu().solve(&r) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &x - &step * lambda;
            let rt = residual(&trial);
            let nt = rt.amax();
            if nt.is_finite() && nt < norm {
                x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        trace.push(norm);
        if !accepted {
            break;
        }
    }
    NewtonOutcome { converged: norm <= tol, x, residual: norm, iterations, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quadratic() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_v_shape_is_precise() {
        let (x, _) = golden_section(|x| (x - 0.123_456_789).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.123_456_789).abs() < 1e-11);
    }

    #[test]
    fn periodic_minimum_near_wrap() {
        let (t, v) = minimize_periodic(|t| 1.0 - (t - 6.2).cos(), 16, 1e-11);
        assert!((t - 6.2).abs() < 1e-5, "{t}");
        assert!(v < 1e-10);
    }

    #[test]
    fn newton_circle_line() {
        // x² + y² = 2, x = y  →  (1, 1)
        let out = newton(
            |v| DVector::from_vec(vec![v[0] * v[0] + v[1] * v[1] - 2.0, v[0] - v[1]]),
            |v| DMatrix::from_row_slice(2, 2, &[2.0 * v[0], 2.0 * v[1], 1.0, -1.0]),
            DVector::from_vec(vec![3.0, 0.5]),
            1e-14,
            50,
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-13 && (out.x[1] - 1.0).abs() < 1e-13);
        assert!(out.trace.len() == out.iterations + 1);
    }
}
