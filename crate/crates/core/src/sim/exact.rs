//! Exact rejection probabilities by enumerating every outcome table.
//!
//! Serves as an oracle for the Monte Carlo engine on small trials: it shares
//! no code with trial generation.

use statrs::distribution::{Binomial, Discrete};

use crate::analysis::TrialData;
use crate::design::SampleSize;
use crate::error::{Error, Result};
use crate::frontier::Risk;

/// Largest number of `(e0, e1)` tables enumerated.
pub const ENUMERATION_LIMIT: u64 = 4_000_000;

fn pmf_table(n: u64, p: f64) -> Result<Vec<f64>> {
    let b = Binomial::new(p, n)
        .map_err(|e| Error::InvalidDesign(format!("binomial({n}, {p}): {e}")))?;
    Ok((0..=n).map(|k| b.pmf(k)).collect())
}

/// `Σ P(e0) P(e1) · 1[rejects(e0, e1)]` over all outcome tables.
pub fn exact_rejection_probability<F>(
    pi0: Risk,
    pi1: Risk,
    n: SampleSize,
    rejects: F,
) -> Result<f64>
where
    F: Fn(&TrialData) -> bool,
{
    let tables = (n.n0 + 1).saturating_mul(n.n1 + 1);
    if tables > ENUMERATION_LIMIT {
        return Err(Error::TooLargeToEnumerate(tables, ENUMERATION_LIMIT));
    }
    let w0 = pmf_table(n.n0, pi0.get())?;
    let w1 = pmf_table(n.n1, pi1.get())?;
    let mut total = 0.0;
    for (e0, &a) in w0.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (e1, &b) in w1.iter().enumerate() {
            let t = TrialData {
                n0: n.n0,
                n1: n.n1,
                e0: e0 as u64,
                e1: e1 as u64,
            };
            if rejects(&t) {
                row += b;
            }
        }
        total += a * row;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Risk {
        Risk::new(x).unwrap()
    }

    #[test]
    fn always_and_never() {
        let n = SampleSize::new(20, 25).unwrap();
        let one = exact_rejection_probability(r(0.3), r(0.4), n, |_| true).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        assert_eq!(
            exact_rejection_probability(r(0.3), r(0.4), n, |_| false).unwrap(),
            0.0
        );
    }

    #[test]
    fn point_mass() {
        let n = SampleSize::new(10, 10).unwrap();
        let p = exact_rejection_probability(r(0.0), r(0.0), n, |t| t.e0 == 0 && t.e1 == 0).unwrap();
        assert_eq!(p, 1.0);
        let p = exact_rejection_probability(r(0.0), r(0.0), n, |t| t.e1 > 0).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn marginal_tail() {
        // P(e1 ≤ 1) for Binomial(5, 0.5) = 6/32
        let n = SampleSize::new(3, 5).unwrap();
        let p = exact_rejection_probability(r(0.2), r(0.5), n, |t| t.e1 <= 1).unwrap();
        assert!((p - 6.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn size_guard() {
        let n = SampleSize::new(5000, 5000).unwrap();
        assert!(matches!(
            exact_rejection_probability(r(0.1), r(0.1), n, |_| true),
            Err(Error::TooLargeToEnumerate(_, _))
        ));
    }
}
