//! Summary statistics of observed or simulated data.

use alloc::vec::Vec;

use crate::orderstats::{moment_summaries, octile_indices, Octiles};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SummaryKind {
    /// The full sorted sample (`q = n`).
    FullOrderStats,
    /// `E_1..E_7` at order indices `r(i n / 8)` (`q = 7`).
    Octiles,
    /// `(S_A, S_B, S_g, S_k)` computed from the octiles (`q = 4`).
    MomentEstimates,
}

impl SummaryKind {
    /// Number of summary coordinates for a dataset of size `n`.
    pub fn dim(self, n: usize) -> usize {
        match self {
            SummaryKind::FullOrderStats => n,
            SummaryKind::Octiles => 7,
            SummaryKind::MomentEstimates => 4,
        }
    }

    /// Smallest dataset the summary is defined for.
    pub fn min_len(self) -> usize {
        match self {
            SummaryKind::FullOrderStats => 1,
            _ => 8,
        }
    }
}

impl core::str::FromStr for SummaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "order" | "order-stats" | "full" => Ok(SummaryKind::FullOrderStats),
            "octile" | "octiles" => Ok(SummaryKind::Octiles),
            "moment" | "moments" | "moment-estimates" => Ok(SummaryKind::MomentEstimates),
            _ => Err(Error::Config("summary kind must be order, octile or moment")),
        }
    }
}

/// Octiles of a dataset taken as order statistics of the sorted sample.
pub fn sample_octiles(sorted: &[f64]) -> Result<Octiles> {
    let n = sorted.len();
    if n < 8 {
        return Err(Error::NotEnoughData { needed: 8, got: n });
    }
    let idx = octile_indices(n);
    Octiles::new(idx.map(|i| sorted[i - 1]))
}

/// Computes the summary vector of `data`.
pub fn summarize(data: &[f64], kind: SummaryKind) -> Result<Vec<f64>> {
    if data.len() < kind.min_len() {
        return Err(Error::NotEnoughData {
            needed: kind.min_len(),
            got: data.len(),
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "data" });
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    match kind {
        SummaryKind::FullOrderStats => Ok(sorted),
        SummaryKind::Octiles => Ok(sample_octiles(&sorted)?.values().to_vec()),
        SummaryKind::MomentEstimates => Ok(moment_summaries(&sample_octiles(&sorted)?)?.to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn summaries_of_small_data() {
        assert_eq!(
            summarize(&[3.0, 1.0, 2.0], SummaryKind::FullOrderStats).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let d: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(
            summarize(&d, SummaryKind::Octiles).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
        );
        assert_eq!(
            summarize(&d, SummaryKind::MomentEstimates).unwrap(),
            vec![4.0, 4.0, 0.0, 1.0]
        );
    }

    #[test]
    fn summary_errors() {
        assert!(summarize(&[], SummaryKind::FullOrderStats).is_err());
        assert_eq!(
            summarize(&[1.0; 5], SummaryKind::Octiles),
            Err(Error::NotEnoughData { needed: 8, got: 5 })
        );
        assert_eq!(
            summarize(&[1.0; 10], SummaryKind::MomentEstimates),
            Err(Error::DegenerateSummary)
        );
        assert!(summarize(&[1.0, f64::NAN], SummaryKind::FullOrderStats).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("moment".parse::<SummaryKind>().unwrap(), SummaryKind::MomentEstimates);
        assert_eq!("octile".parse::<SummaryKind>().unwrap(), SummaryKind::Octiles);
        assert_eq!("order".parse::<SummaryKind>().unwrap(), SummaryKind::FullOrderStats);
        assert!("mean".parse::<SummaryKind>().is_err());
    }
}
