use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What happened to a single photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Detector `D_{k+1}` fired, identifying state `k`.
    Conclusive(usize),
    /// A monitor port fired.
    Inconclusive,
    /// No herald, detector miss, or the photon left through an unmonitored mode.
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub prepared: usize,
    pub outcome: Outcome,
}

/// Order-independent outcome counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub per_index_counts: Vec<u64>,
    pub inconclusive: u64,
    pub discarded: u64,
    pub confusion: Vec<Vec<u64>>,
}

impl Tally {
    pub fn new(dim: usize) -> Self {
        Self {
            per_index_counts: vec![0; dim],
            inconclusive: 0,
            discarded: 0,
            confusion: vec![vec![0; dim]; dim],
        }
    }

    pub fn record(&mut self, prepared: usize, outcome: Outcome) {
        self.per_index_counts[prepared] += 1;
        match outcome {
            Outcome::Conclusive(k) => self.confusion[prepared][k] += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
            Outcome::Discarded => self.discarded += 1,
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.per_index_counts.iter_mut().zip(other.per_index_counts) {
            *a += b;
        }
        for (ra, rb) in self.confusion.iter_mut().zip(other.confusion) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        self.inconclusive += other.inconclusive;
        self.discarded += other.discarded;
        self
    }

    pub fn trials(&self) -> u64 {
        self.per_index_counts.iter().sum()
    }

    pub fn into_report(self, analytic_p_d: f64) -> SimReport {
        let conclusive: u64 = self.confusion.iter().flatten().sum();
        let correct: u64 = (0..self.confusion.len()).map(|k| self.confusion[k][k]).sum();
        let registered = conclusive + self.inconclusive;
        SimReport {
            dim: self.per_index_counts.len(),
            trials: self.trials(),
            conclusive_count: conclusive,
            inconclusive_count: self.inconclusive,
            discarded_count: self.discarded,
            correct_count: correct,
            misidentified_count: conclusive - correct,
            conclusive_rate: RateEstimate::wilson(conclusive, registered),
            success_rate: RateEstimate::wilson(correct, registered),
            analytic_p_d,
            per_index_counts: self.per_index_counts,
            confusion_matrix: self.confusion,
        }
    }
}

/// Binomial proportion with a Wilson-score 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub total: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

impl RateEstimate {
    pub fn wilson(successes: u64, total: u64) -> Self {
        if total == 0 {
            return Self {
                successes,
                total,
                estimate: 0.0,
                lower: 0.0,
                upper: 1.0,
            };
        }
        let n = total as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            total,
            estimate: p,
            lower: (center - half).clamp(0.0, 1.0),
            upper: (center + half).clamp(0.0, 1.0),
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Binomial standard deviation of the estimate at true rate `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.total as f64).sqrt()
    }
}

/// Aggregated Monte-Carlo result.
///
/// Rates are taken over registered events (conclusive plus inconclusive
/// clicks); discarded trials carry no information about the measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub dim: usize,
    pub trials: u64,
    /// Trials per prepared index.
    pub per_index_counts: Vec<u64>,
    pub conclusive_count: u64,
    pub inconclusive_count: u64,
    pub discarded_count: u64,
    pub correct_count: u64,
    pub misidentified_count: u64,
    /// Rows: prepared index; columns: detector index.
    pub confusion_matrix: Vec<Vec<u64>>,
    pub conclusive_rate: RateEstimate,
    /// Conclusive clicks on the right detector.
    pub success_rate: RateEstimate,
    pub analytic_p_d: f64,
}

impl SimReport {
    pub fn off_diagonal_total(&self) -> u64 {
        self.misidentified_count
    }

    /// Confusion matrix as CSV, one row per prepared index.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("prepared");
        for k in 0..self.dim {
            out.push_str(&format!(",D{}", k + 1));
        }
        out.push('\n');
        for (l, row) in self.confusion_matrix.iter().enumerate() {
            out.push_str(&l.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Aggregates individual trial records; the result does not depend on record order.
pub fn summarize(records: &[TrialRecord], dim: usize, analytic_p_d: f64) -> Result<SimReport> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut tally = Tally::new(dim);
    for r in records {
        tally.record(r.prepared, r.outcome);
    }
    Ok(tally.into_report(analytic_p_d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64, prepared: usize, outcome: Outcome) -> TrialRecord {
        TrialRecord { trial, prepared, outcome }
    }

    #[test]
    fn empty_records_rejected() {
        assert_eq!(summarize(&[], 2, 0.5), Err(Error::EmptyRecords));
    }

    #[test]
    fn all_conclusive() {
        let records: Vec<_> = (0..50).map(|t| rec(t, (t % 2) as usize, Outcome::Conclusive((t % 2) as usize))).collect();
        let r = summarize(&records, 2, 1.0).unwrap();
        assert_eq!(r.conclusive_rate.estimate, 1.0);
        assert_eq!(r.conclusive_rate.upper, 1.0);
        assert_eq!(r.confusion_matrix, vec![vec![25, 0], vec![0, 25]]);
    }

    #[test]
    fn half_split_interval_shrinks() {
        let width = |n: u64| {
            let records: Vec<_> = (0..n)
                .map(|t| rec(t, 0, if t % 2 == 0 { Outcome::Conclusive(0) } else { Outcome::Inconclusive }))
                .collect();
            let r = summarize(&records, 2, 0.5).unwrap();
            assert_eq!(r.conclusive_rate.estimate, 0.5);
            r.conclusive_rate.upper - r.conclusive_rate.lower
        };
        let (w1, w4) = (width(1000), width(4000));
        assert!((w1 / w4 - 2.0).abs() < 0.01, "{w1} {w4}");
    }

    #[test]
    fn counts_are_consistent() {
        let records = vec![
            rec(0, 0, Outcome::Conclusive(1)),
            rec(1, 1, Outcome::Discarded),
            rec(2, 1, Outcome::Inconclusive),
            rec(3, 0, Outcome::Conclusive(0)),
        ];
        let r = summarize(&records, 2, 0.5).unwrap();
        assert_eq!(r.conclusive_count + r.inconclusive_count + r.discarded_count, r.trials);
        assert_eq!(r.misidentified_count, 1);
        assert_eq!(r.confusion_csv(), "prepared,D1,D2\n0,1,1\n1,0,0\n");
    }
}
