//! Real polynomial roots via companion-matrix eigenvalues with Newton polish.

use nalgebra::DMatrix;

/// `Σ a_k s^k` by Horner.
pub fn eval(a: &[f64], s: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

fn eval_with_derivative(a: &[f64], s: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in a.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// Scale for residuals: `Σ |a_k| |s|^k`.
pub fn magnitude(a: &[f64], s: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * s.abs() + c.abs())
}

/// All strictly positive real roots of `Σ a_k s^k`, ascending and deduplicated.
///
/// Returns an empty list for the zero polynomial.
pub fn positive_real_roots(a: &[f64]) -> Vec<f64> {
    let Some(top) = a.iter().rposition(|&c| c != 0.0) else {
        return Vec::new();
    };
    // s = 0 roots are not positive; divide them out.
    let low = a.iter().position(|&c| c != 0.0).unwrap_or(0);
    let reduced = &a[low..=top];
    let degree = reduced.len() - 1;
    if degree == 0 {
        return Vec::new();
    }

    let lead = reduced[degree];
    let candidates: Vec<f64> = if degree == 1 {
        vec![-reduced[0] / lead]
    } else {
        let mut companion = DMatrix::<f64>::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -reduced[i] / lead;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.norm()))
            .map(|z| z.re)
            .collect()
    };

    let mut roots: Vec<f64> = candidates
        .into_iter()
        .filter(|&s| s > 0.0)
        .map(|s| polish(reduced, s))
        .filter(|&s| s > 0.0 && s.is_finite())
        .filter(|&s| eval(reduced, s).abs() <= 1e-9 * magnitude(reduced, s).max(f64::MIN_POSITIVE))
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
    roots
}

/// Newton iterations until the correction stalls.
pub fn polish(a: &[f64], mut s: f64) -> f64 {
    for _ in 0..50 {
        let (p, dp) = eval_with_derivative(a, s);
        if dp == 0.0 || !p.is_finite() {
            break;
        }
        let step = p / dp;
        let next = s - step;
        if !next.is_finite() {
            break;
        }
        let done = step.abs() <= 4.0 * f64::EPSILON * s.abs();
        s = next;
        if done {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        // (s-1)(s-2)(s+3) = s³ - 7s + 6
        let r = positive_real_roots(&[6.0, -7.0, 0.0, 1.0]);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_roots_are_excluded() {
        // s²(s - 0.5)
        let r = positive_real_roots(&[0.0, 0.0, -0.5, 1.0]);
        assert_eq!(r, vec![0.5]);
        assert!(positive_real_roots(&[0.0, 0.0, 1.0]).is_empty());
        assert!(positive_real_roots(&[0.0]).is_empty());
        assert!(positive_real_roots(&[2.0]).is_empty());
    }

    #[test]
    fn complex_pair_is_not_real() {
        // s² + 1
        assert!(positive_real_roots(&[1.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn double_root_found_once() {
        // (s - 3)² = s² - 6s + 9
        let r = positive_real_roots(&[9.0, -6.0, 1.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 3.0).abs() < 1e-7);
    }
}
