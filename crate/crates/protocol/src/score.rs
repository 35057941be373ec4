//! Scoreboard and verdict report.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ProtocolError, Result};
use crate::message::Protocol;

/// Confidence level of the reported intervals.
pub const CONFIDENCE: f64 = 0.95;
pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Classical bound on the Bell success rate.
pub const CLASSICAL_BELL_BOUND: f64 = 0.75;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scoreboard {
    pub pre_trials: u64,
    pub pre_ok: u64,
    pub eq_trials: u64,
    pub eq_ok: u64,
    pub all_zero_d: u64,
    /// `N_t`.
    pub bell_trials: u64,
    /// `N_s`.
    pub bell_ok: u64,
    pub degenerate: u64,
    pub commits: u64,
}

impl Scoreboard {
    pub fn record_pre(&mut self, ok: bool) {
        self.pre_trials += 1;
        self.pre_ok += ok as u64;
    }

    pub fn record_eq(&mut self, ok: bool, all_zero: bool) {
        self.eq_trials += 1;
        self.eq_ok += ok as u64;
        self.all_zero_d += all_zero as u64;
    }

    pub fn record_bell(&mut self, ok: bool) {
        self.bell_trials += 1;
        self.bell_ok += ok as u64;
    }

    fn second(&self, protocol: Protocol) -> (u64, u64) {
        match protocol {
            Protocol::Bcmvv => (self.eq_ok, self.eq_trials),
            Protocol::Kmcvy => (self.bell_ok, self.bell_trials),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub protocol: Protocol,
    pub rounds: usize,
    pub p_pre: f64,
    pub p_eq_or_bell: f64,
    pub gap: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub degenerate_rate: f64,
    pub depth: usize,
    pub interleavings: usize,
    pub verdict: Verdict,
    pub all_zero_d_rate: f64,
    pub n_s: u64,
    pub n_t: u64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + confidence / 2.0);
    let (n, p) = (n as f64, k as f64 / n as f64);
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn weight(protocol: Protocol) -> f64 {
    match protocol {
        Protocol::Bcmvv => 2.0,
        Protocol::Kmcvy => 4.0,
    }
}

/// Gap statistic `p_pre + w p_2 - 2` (`w = 2` for BCMVV, 4 for KMCVY).
pub fn gap(protocol: Protocol, p_pre: f64, p_2: f64) -> f64 {
    p_pre + weight(protocol) * p_2 - 2.0
}

fn rate(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Scores a finished session.
///
/// BCMVV accepts when the lower confidence bound of the gap is positive.
/// KMCVY accepts when `N_s / N_t - 0.75 >= threshold`.
pub fn score_report(
    board: &Scoreboard,
    protocol: Protocol,
    rounds: usize,
    threshold: f64,
    meter: (usize, usize),
) -> Result<Report> {
    let (ok2, n2) = board.second(protocol);
    if board.pre_trials == 0 || n2 == 0 {
        return Err(ProtocolError::EmptyScoreboard);
    }
    let mut r = partial_report(board, protocol, rounds, threshold, meter);
    r.verdict = match protocol {
        Protocol::Bcmvv if r.ci_low > 0.0 => Verdict::Accept,
        Protocol::Kmcvy if rate(ok2, n2) - CLASSICAL_BELL_BOUND >= threshold => Verdict::Accept,
        _ => Verdict::Reject,
    };
    Ok(r)
}

/// A rejecting report from whatever has been scored so far.
pub fn reject_report(
    board: &Scoreboard,
    protocol: Protocol,
    rounds: usize,
    threshold: f64,
    meter: (usize, usize),
    reason: &str,
) -> Report {
    let mut r = partial_report(board, protocol, rounds, threshold, meter);
    r.reason = Some(reason.to_string());
    r
}

fn partial_report(board: &Scoreboard, protocol: Protocol, rounds: usize, threshold: f64, meter: (usize, usize)) -> Report {
    let (ok2, n2) = board.second(protocol);
    let p_pre = rate(board.pre_ok, board.pre_trials);
    let p_2 = rate(ok2, n2);
    let (lo_pre, hi_pre) = wilson(board.pre_ok, board.pre_trials, CONFIDENCE);
    let (lo_2, hi_2) = wilson(ok2, n2, CONFIDENCE);
    Report {
        protocol,
        rounds,
        p_pre,
        p_eq_or_bell: p_2,
        gap: gap(protocol, p_pre, p_2),
        ci_low: gap(protocol, lo_pre, lo_2),
        ci_high: gap(protocol, hi_pre, hi_2),
        degenerate_rate: rate(board.degenerate, board.commits),
        depth: meter.0,
        interleavings: meter.1,
        verdict: Verdict::Reject,
        all_zero_d_rate: rate(board.all_zero_d, board.eq_trials),
        n_s: board.bell_ok,
        n_t: board.bell_trials,
        threshold,
        reason: None,
    }
}
