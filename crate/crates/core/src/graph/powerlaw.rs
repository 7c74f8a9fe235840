//! Discrete power-law fitting by maximum likelihood.
//!
//! The exponent uses the standard continuous-approximation MLE
//! α̂ = 1 + n / Σ ln(dᵢ/(xmin − ½)) over the tail dᵢ ≥ xmin. When no
//! xmin is given it is selected by minimum Kolmogorov–Smirnov distance
//! between the empirical tail CDF and the fitted law, the matching
//! (x + ½)/(xmin − ½) discretization on the theoretical side.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// Fitted exponent, > 1.
    pub alpha: f64,
    /// Smallest degree the law is fitted from.
    pub xmin: u64,
    /// Tail observations (degrees ≥ xmin).
    pub n_tail: usize,
}

fn alpha_hat(tail: &[u64], xmin: u64) -> f64 {
    let shift = xmin as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&d| (d as f64 / shift).ln()).sum();
    1.0 + tail.len() as f64 / log_sum
}

fn ks_distance(tail_sorted: &[u64], xmin: u64, alpha: f64) -> f64 {
    let n = tail_sorted.len() as f64;
    let shift = xmin as f64 - 0.5;
    let mut max_gap = 0.0f64;
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < tail_sorted.len() {
        let x = tail_sorted[i];
        let mut j = i;
        while j < tail_sorted.len() && tail_sorted[j] == x {
            j += 1;
        }
        seen += j - i;
        let empirical = seen as f64 / n;
        let theoretical = 1.0 - ((x as f64 + 0.5) / shift).powf(1.0 - alpha);
        max_gap = max_gap.max((empirical - theoretical).abs());
        i = j;
    }
    max_gap
}

/// Fit the tail of a degree sequence. Zero degrees are ignored; with
/// `xmin = None` the cutoff is chosen by minimum KS distance.
pub fn fit_power_law(degrees: &[u64], xmin: Option<u64>) -> Result<PowerLawFit> {
    let mut positive: Vec<u64> = degrees.iter().copied().filter(|&d| d > 0).collect();
    positive.sort_unstable();
    if positive.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 positive observations".into(),
        ));
    }
    match xmin {
        Some(xmin) => {
            if xmin < 1 {
                return Err(Error::InvalidArgument("xmin must be >= 1".into()));
            }
            let tail: Vec<u64> = positive.into_iter().filter(|&d| d >= xmin).collect();
            fit_tail(tail, xmin)
        }
        None => {
            let mut candidates: Vec<u64> = positive.clone();
            candidates.dedup();
            // The largest value cannot anchor a two-valued tail.
            candidates.pop();
            let mut best: Option<(f64, PowerLawFit)> = None;
            for xmin in candidates {
                let tail: Vec<u64> = positive.iter().copied().filter(|&d| d >= xmin).collect();
                let Ok(fit) = fit_tail(tail.clone(), xmin) else {
                    continue;
                };
                let ks = ks_distance(&tail, xmin, fit.alpha);
                if best.as_ref().is_none_or(|(b, _)| ks < *b) {
                    best = Some((ks, fit));
                }
            }
            best.map(|(_, fit)| fit).ok_or_else(|| {
                Error::DegenerateTail("no candidate xmin leaves a fittable tail".into())
            })
        }
    }
}

fn fit_tail(tail: Vec<u64>, xmin: u64) -> Result<PowerLawFit> {
    if tail.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "tail above xmin = {xmin} has fewer than 2 observations"
        )));
    }
    let first = tail[0];
    if tail.iter().all(|&d| d == first) {
        return Err(Error::DegenerateTail(format!(
            "all {} tail observations equal {first}",
            tail.len()
        )));
    }
    let alpha = alpha_hat(&tail, xmin);
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::DegenerateTail(format!(
            "estimated exponent {alpha} is not a valid power-law exponent"
        )));
    }
    Ok(PowerLawFit {
        alpha,
        xmin,
        n_tail: tail.len(),
    })
}
