//! Discrete form of the Titchmarsh support identity:
//! the last nonzero index of `u ∗ v` is the sum of the last nonzero indices.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SupportCheck {
    pub lhs: usize,
    pub rhs: usize,
    pub equal: bool,
}

fn last_nonzero(v: &[Complex64], threshold: f64) -> Option<usize> {
    v.iter().rposition(|z| z.norm() > threshold)
}

pub fn convolve(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    if u.is_empty() || v.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); u.len() + v.len() - 1];
    for (i, a) in u.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn titchmarsh_support(u: &[Complex64], v: &[Complex64]) -> Result<SupportCheck> {
    let scale = |s: &[Complex64]| s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (su, sv) = (scale(u), scale(v));
    let lu = last_nonzero(u, 1e-14 * su).filter(|_| su > 0.0).ok_or(Error::ZeroSequence)?;
    let lv = last_nonzero(v, 1e-14 * sv).filter(|_| sv > 0.0).ok_or(Error::ZeroSequence)?;
    let w = convolve(u, v);
    let lhs = last_nonzero(&w, 1e-14 * su * sv).ok_or(Error::ZeroSequence)?;
    let rhs = lu + lv;
    Ok(SupportCheck { lhs, rhs, equal: lhs == rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn units() {
        let r = titchmarsh_support(&re(&[1.0]), &re(&[1.0])).unwrap();
        assert_eq!((r.lhs, r.rhs, r.equal), (0, 0, true));
    }

    #[test]
    fn positive_endpoints() {
        let r = titchmarsh_support(&re(&[1.0, 2.0, 3.0]), &re(&[4.0, -1.0, 0.5, 2.0])).unwrap();
        assert_eq!((r.lhs, r.rhs, r.equal), (5, 5, true));
    }

    #[test]
    fn trailing_zeros_are_ignored() {
        let r = titchmarsh_support(&re(&[1.0, 1.0, 0.0, 0.0]), &re(&[0.0, 2.0])).unwrap();
        assert_eq!((r.lhs, r.rhs), (2, 2));
    }

    #[test]
    fn interior_cancellation_does_not_matter() {
        // (1 + z)(1 - z) = 1 - z²: the middle coefficient cancels exactly.
        let r = titchmarsh_support(&re(&[1.0, 1.0]), &re(&[1.0, -1.0])).unwrap();
        assert_eq!(convolve(&re(&[1.0, 1.0]), &re(&[1.0, -1.0]))[1], Complex64::new(0.0, 0.0));
        assert!(r.equal && r.lhs == 2);
    }

    #[test]
    fn zero_sequence_is_an_error() {
        assert_eq!(titchmarsh_support(&re(&[0.0, 0.0]), &re(&[1.0])), Err(Error::ZeroSequence));
        assert_eq!(titchmarsh_support(&re(&[1.0]), &[]), Err(Error::ZeroSequence));
    }
}
