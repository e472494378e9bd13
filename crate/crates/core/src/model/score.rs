//! Log-space scores and the geometric-mean heuristic.

use std::ops::Add;

use super::ModelError;

/// Sum of natural-log probabilities over some number of constituents.
/// Probability zero is `f64::NEG_INFINITY`.
///
/// The linear product is carried alongside so that a one-constituent score
/// reports its probability without a log/exp round trip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub log_prob_sum: f64,
    pub constituent_count: u32,
    product: f64,
}

impl Score {
    pub const EMPTY: Score = Score {
        log_prob_sum: 0.0,
        constituent_count: 0,
        product: 1.0,
    };

    /// A single constituent with probability `p`.
    pub fn single(p: f64) -> Result<Score, ModelError> {
        let mut s = Score::from_log(p.ln(), 1)?;
        s.product = p;
        Ok(s)
    }

    pub fn from_log(log_prob: f64, count: u32) -> Result<Score, ModelError> {
        if log_prob.is_nan() || log_prob == f64::INFINITY {
            return Err(ModelError::NonFinite(log_prob));
        }
        Ok(Score {
            log_prob_sum: log_prob,
            constituent_count: count,
            product: log_prob.exp(),
        })
    }

    /// Geometric mean of the constituent probabilities; 1 for an empty score.
    #[inline]
    pub fn value(&self) -> f64 {
        match self.constituent_count {
            0 => 1.0,
            1 => self.product,
            n => (self.log_prob_sum / n as f64).exp(),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.log_prob_sum == f64::NEG_INFINITY
    }

    /// Adds one constituent with probability `p`.
    #[inline]
    pub fn with(self, p: f64) -> Score {
        Score {
            log_prob_sum: self.log_prob_sum + p.ln(),
            constituent_count: self.constituent_count + 1,
            product: self.product * p,
        }
    }
}

impl Default for Score {
    fn default() -> Self {
        Score::EMPTY
    }
}

impl Add for Score {
    type Output = Score;

    #[inline]
    fn add(self, rhs: Score) -> Score {
        Score {
            log_prob_sum: self.log_prob_sum + rhs.log_prob_sum,
            constituent_count: self.constituent_count + rhs.constituent_count,
            product: self.product * rhs.product,
        }
    }
}

/// Sums `(log_prob, count)` parts into one score.
pub fn combine_scores(parts: &[(f64, u32)]) -> Result<Score, ModelError> {
    parts.iter().try_fold(Score::EMPTY, |acc, &(lp, n)| Ok(acc + Score::from_log(lp, n)?))
}
