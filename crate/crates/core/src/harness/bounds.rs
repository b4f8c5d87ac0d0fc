use crate::adversaries::default_gap_epsilon;
use crate::algorithms::Algorithm;
use crate::cube::Feedback;
use crate::error::{Error, Result};
use crate::oracle::expected_max_linear_gain;

fn check_sizes(n: usize, horizon: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon T must be >= 1".into()));
    }
    Ok(())
}

/// Expected-regret upper bound for the tuned learner.
pub fn theoretical_bound(
    n: usize,
    horizon: usize,
    algorithm: Algorithm,
    feedback: Feedback,
) -> Result<f64> {
    check_sizes(n, horizon)?;
    let n = n as f64;
    let root = (horizon as f64 * std::f64::consts::LN_2).sqrt();
    Ok(match (algorithm, feedback) {
        (Algorithm::PolyExp, Feedback::FullInformation) => 2.0 * n * root,
        (Algorithm::PolyExp, Feedback::Bandit) => 4.0 * n.powf(1.5) * 6f64.sqrt() * root,
        (Algorithm::Exp2Reference, Feedback::FullInformation) => 2.0 * n.powf(1.5) * root,
        (Algorithm::Exp2Reference, Feedback::Bandit) => 6.0 * n * n * root,
    })
}

/// `epsilon n T (1/2 - epsilon sqrt(T/n))`.
pub fn bandit_lower_bound(n: usize, horizon: usize, epsilon: f64) -> Result<f64> {
    check_sizes(n, horizon)?;
    let (nf, t) = (n as f64, horizon as f64);
    Ok(epsilon * nf * t * (0.5 - epsilon * (t / nf).sqrt()))
}

/// Full information: the exact expected best-vertex gain against i.i.d.
/// signs (`T` even, or odd up to 24). Bandit: [`bandit_lower_bound`] at the
/// default gap.
pub fn lower_bound_reference(n: usize, horizon: usize, feedback: Feedback) -> Result<f64> {
    check_sizes(n, horizon)?;
    match feedback {
        Feedback::FullInformation => expected_max_linear_gain(n, horizon as u64),
        Feedback::Bandit => bandit_lower_bound(n, horizon, default_gap_epsilon(n, horizon)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn bound_values() {
        let b = theoretical_bound(4, 1000, Algorithm::PolyExp, Feedback::FullInformation).unwrap();
        assert!((b - 8.0 * (1000.0 * LN2).sqrt()).abs() < 1e-12);
        assert!((b - 210.62).abs() < 5e-3);

        let b = theoretical_bound(8, 4096, Algorithm::PolyExp, Feedback::FullInformation).unwrap();
        assert!((b - 852.536).abs() < 1e-3);
        let b = theoretical_bound(6, 4096, Algorithm::PolyExp, Feedback::Bandit).unwrap();
        assert!((b - 7672.823).abs() < 1e-3);
        assert!(theoretical_bound(0, 10, Algorithm::PolyExp, Feedback::Bandit).is_err());
    }

    #[test]
    fn ratios_scale_with_sqrt_n() {
        for n in 1..=64usize {
            let full = |a| theoretical_bound(n, 777, a, Feedback::FullInformation).unwrap();
            let ratio = full(Algorithm::Exp2Reference) / full(Algorithm::PolyExp);
            assert!((ratio - (n as f64).sqrt()).abs() <= 1e-12 * ratio);

            let bandit = |m: usize| {
                theoretical_bound(m, 777, Algorithm::Exp2Reference, Feedback::Bandit).unwrap()
                    / theoretical_bound(m, 777, Algorithm::PolyExp, Feedback::Bandit).unwrap()
            };
            assert!((bandit(4 * n) / bandit(n) - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn lower_reference_values() {
        assert_eq!(
            lower_bound_reference(1, 2, Feedback::FullInformation).unwrap(),
            0.5
        );
        let b = lower_bound_reference(4, 6400, Feedback::Bandit).unwrap();
        assert!((b - 40.0).abs() < 1e-9);
        assert!((bandit_lower_bound(4, 6400, 0.00625).unwrap() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn full_lower_reference_below_upper_bound() {
        for n in 1..=32 {
            for k in 1..=14 {
                let t = 1usize << k;
                let lower = lower_bound_reference(n, t, Feedback::FullInformation).unwrap();
                let upper =
                    theoretical_bound(n, t, Algorithm::PolyExp, Feedback::FullInformation).unwrap();
                assert!(lower <= upper, "n={n} T={t}");
            }
        }
    }
}
