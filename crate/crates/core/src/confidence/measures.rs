//! Weight-of-evidence measures.

use num_traits::Float;

use super::ConfidenceError;
use crate::scalar::Scalar;

/// Base of the logarithm used by [`keynes`].
pub const KEYNES_LOG_BASE: u32 = 10;

/// Keynes measure: log10 of posterior over prior. Zero when the evidence
/// leaves belief unchanged, positive when it confirms.
pub fn keynes<F: Float>(prior: F, posterior: F) -> Result<F, ConfidenceError> {
    if !(prior > F::zero() && prior <= F::one()) {
        return Err(ConfidenceError::UndefinedMeasure("keynes requires a prior in (0, 1]"));
    }
    if !(posterior > F::zero() && posterior <= F::one()) {
        return Err(ConfidenceError::UndefinedMeasure("keynes requires a posterior in (0, 1]"));
    }
    Ok((posterior / prior).log10())
}

/// Eells measure: posterior minus prior, in [-1, 1].
pub fn eells<T: Scalar>(prior: T, posterior: T) -> T {
    posterior - prior
}

/// How much a second item of evidence multiplies confidence already given
/// by the first: P(E2 | C and E1) / P(E2 | E1). Values above one mean the
/// second item is diverse from the first.
pub fn diversity_ratio<T: Scalar>(p_e2_given_c_and_e1: T, p_e2_given_e1: T) -> Result<T, ConfidenceError> {
    if p_e2_given_e1 <= T::zero() {
        return Err(ConfidenceError::UndefinedMeasure("diversity ratio denominator must be positive"));
    }
    Ok(p_e2_given_c_and_e1 / p_e2_given_e1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keynes_values() {
        assert_eq!(keynes(0.5, 0.5).unwrap(), 0.0);
        assert!((keynes(0.1f64, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((keynes(0.3f64, 0.6).unwrap() - std::f64::consts::LOG10_2).abs() < 1e-15);
        assert!(keynes(0.0f64, 0.5).is_err());
        assert!(keynes(0.5f32, 0.25).unwrap() < 0.0);
    }

    #[test]
    fn eells_values() {
        assert_eq!(eells(0.5, 0.5), 0.0);
        assert!((eells(0.2, 0.9) - 0.7f64).abs() < 1e-12);
        assert!((eells(0.9, 0.2) + 0.7f64).abs() < 1e-12);
    }

    /// Builds a joint distribution over (C, E1, E2) and checks that the
    /// ratio of likelihoods equals the ratio of posteriors it stands for.
    #[test]
    fn diversity_ratio_matches_joint_distribution() {
        // p[c][e1][e2]
        let p = [[[0.20, 0.05], [0.10, 0.05]], [[0.05, 0.05], [0.05, 0.45]]];
        let marg = |f: &dyn Fn(usize, usize, usize) -> bool| -> f64 {
            let mut s = 0.0;
            for (c, pc) in p.iter().enumerate() {
                for (e1, pe) in pc.iter().enumerate() {
                    for (e2, &v) in pe.iter().enumerate() {
                        if f(c, e1, e2) {
                            s += v;
                        }
                    }
                }
            }
            s
        };
        let p_e2_given_c_e1 = marg(&|c, e1, e2| c == 1 && e1 == 1 && e2 == 1) / marg(&|c, e1, _| c == 1 && e1 == 1);
        let p_e2_given_e1 = marg(&|_, e1, e2| e1 == 1 && e2 == 1) / marg(&|_, e1, _| e1 == 1);
        let p_c_given_both = marg(&|c, e1, e2| c == 1 && e1 == 1 && e2 == 1) / marg(&|_, e1, e2| e1 == 1 && e2 == 1);
        let p_c_given_e1 = marg(&|c, e1, _| c == 1 && e1 == 1) / marg(&|_, e1, _| e1 == 1);
        let ratio = diversity_ratio(p_e2_given_c_e1, p_e2_given_e1).unwrap();
        assert!((ratio - p_c_given_both / p_c_given_e1).abs() < 1e-12);
    }

    #[test]
    fn diversity_ratio_examples() {
        assert_eq!(diversity_ratio(0.5, 0.5).unwrap(), 1.0);
        assert!((diversity_ratio(0.9, 0.3).unwrap() - 3.0f64).abs() < 1e-12);
        assert_eq!(diversity_ratio(0.0, 0.5).unwrap(), 0.0);
        assert!(diversity_ratio(0.5, 0.0).is_err());
    }
}
