//! Held-out perplexity, train/test splitting, and model-selection
//! sweeps over K and C.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::models::cipm::{assign_communities, AssignmentMode};
use crate::models::{train, ModelEstimate, ModelKind};
use crate::parallel;
use crate::rng::{derive_seed, sample_categorical, seeded};
use crate::sampler::Hyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitUnit {
    /// Partition authors; documents follow their author.
    ByUser,
    /// Partition documents directly.
    ByDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub unit: SplitUnit,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Disjoint train/test partition. The vocabulary and user table are
/// frozen from the full corpus so indices agree on both sides; each side
/// gets at least one unit.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    let mut units: Vec<u32> = match spec.unit {
        SplitUnit::ByUser => {
            let mut authors: Vec<u32> = corpus.docs().iter().map(|d| d.author).collect();
            authors.sort_unstable();
            authors.dedup();
            authors
        }
        SplitUnit::ByDoc => (0..corpus.doc_count() as u32).collect(),
    };
    if units.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 split units, corpus has {}",
            units.len()
        )));
    }
    use rand::seq::SliceRandom;
    let mut rng = seeded(spec.seed);
    units.shuffle(&mut rng);
    let n_train = ((spec.train_fraction * units.len() as f64).floor() as usize)
        .clamp(1, units.len() - 1);
    let train_units: std::collections::HashSet<u32> = units[..n_train].iter().copied().collect();

    let mut train_docs = Vec::new();
    let mut test_docs = Vec::new();
    for (m, doc) in corpus.docs().iter().enumerate() {
        let unit = match spec.unit {
            SplitUnit::ByUser => doc.author,
            SplitUnit::ByDoc => m as u32,
        };
        if train_units.contains(&unit) {
            train_docs.push(doc.clone());
        } else {
            test_docs.push(doc.clone());
        }
    }
    let train = Corpus::from_parts(
        corpus.vocabulary().clone(),
        corpus.users().clone(),
        train_docs,
    )?;
    let test = Corpus::from_parts(
        corpus.vocabulary().clone(),
        corpus.users().clone(),
        test_docs,
    )?;
    if train.doc_count() == 0 || test.doc_count() == 0 {
        return Err(Error::InvalidArgument(
            "split produced an empty side".into(),
        ));
    }
    Ok((train, test))
}

/// Held-out perplexity plus the token bookkeeping behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perplexity {
    pub value: f64,
    pub evaluated_tokens: u64,
    /// Test tokens outside the model's frozen vocabulary.
    pub skipped_tokens: u64,
}

const FOLD_IN_SALT: u64 = 0x464f_4c44;

/// exp(−Σ_m log p(w_m)/Σ N_m) with per-token mixture probabilities
/// Σ_k θ_k φ_k^w. Each test document's θ comes from fold-in: Gibbs
/// sweeps over its tokens with φ frozen, averaging the θ readout over
/// the last ten sweeps; zero sweeps means uniform θ.
pub fn perplexity(
    estimate: &ModelEstimate,
    test: &Corpus,
    fold_in_sweeps: usize,
) -> Result<Perplexity> {
    let k_count = estimate.topic_count();
    let w_count = estimate.word_count();
    if k_count == 0 || w_count == 0 {
        return Err(Error::InvalidArgument("estimate has an empty phi".into()));
    }
    let alpha = estimate.meta.hyper.alpha;
    let fold_seed = derive_seed(estimate.meta.seed, FOLD_IN_SALT);

    let per_doc: Vec<Result<(f64, u64, u64)>> = parallel::map_range(test.doc_count(), |m| {
        let doc = &test.docs()[m];
        let tokens: Vec<usize> = doc
            .tokens
            .iter()
            .map(|&w| w as usize)
            .filter(|&w| w < w_count)
            .collect();
        let skipped = doc.tokens.len() as u64 - tokens.len() as u64;
        if tokens.is_empty() {
            return Ok((0.0, 0, skipped));
        }
        let theta = fold_in_theta(
            &estimate.phi,
            &tokens,
            alpha,
            fold_in_sweeps,
            derive_seed(fold_seed, m as u64),
        )?;
        let mut log_p = 0.0f64;
        for &w in &tokens {
            let p: f64 = (0..k_count).map(|k| theta[k] * estimate.phi[k][w]).sum();
            log_p += p.ln();
        }
        Ok((log_p, tokens.len() as u64, skipped))
    });

    let mut log_sum = 0.0f64;
    let mut evaluated = 0u64;
    let mut skipped = 0u64;
    for r in per_doc {
        let (lp, ev, sk) = r?;
        log_sum += lp;
        evaluated += ev;
        skipped += sk;
    }
    if evaluated == 0 {
        return Err(Error::EmptyInput(
            "no test tokens inside the model vocabulary".into(),
        ));
    }
    Ok(Perplexity {
        value: (-log_sum / evaluated as f64).exp(),
        evaluated_tokens: evaluated,
        skipped_tokens: skipped,
    })
}

fn fold_in_theta(
    phi: &[Vec<f64>],
    tokens: &[usize],
    alpha: f64,
    sweeps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let k_count = phi.len();
    if sweeps == 0 {
        return Ok(vec![1.0 / k_count as f64; k_count]);
    }
    let mut rng = seeded(seed);
    let len = tokens.len();
    let k_alpha = k_count as f64 * alpha;
    let mut z: Vec<usize> = Vec::with_capacity(len);
    let mut n_k = vec![0u32; k_count];
    for _ in 0..len {
        let k = rng.random_range(0..k_count);
        n_k[k] += 1;
        z.push(k);
    }
    let tail = sweeps.min(10);
    let mut readout = vec![0.0f64; k_count];
    let mut weights = vec![0.0f64; k_count];
    for sweep in 0..sweeps {
        for (i, &w) in tokens.iter().enumerate() {
            n_k[z[i]] -= 1;
            for k in 0..k_count {
                weights[k] = phi[k][w] * (n_k[k] as f64 + alpha) / ((len - 1) as f64 + k_alpha);
            }
            let new = sample_categorical(&weights, &mut rng)?;
            n_k[new] += 1;
            z[i] = new;
        }
        if sweep >= sweeps - tail {
            for k in 0..k_count {
                readout[k] += (n_k[k] as f64 + alpha) / (len as f64 + k_alpha);
            }
        }
    }
    for r in &mut readout {
        *r /= tail as f64;
    }
    Ok(readout)
}

/// Everything a sweep job needs besides the value being swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Priors and the fixed dimension; `topics` is overridden by a K
    /// sweep and `communities` by a community sweep.
    pub hyper: Hyperparams,
    pub train_sweeps: usize,
    pub fold_in_sweeps: usize,
    pub split: SplitSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: usize,
    pub perplexity: f64,
    pub sweeps: usize,
    pub seconds: f64,
}

/// One train/evaluate cycle per K over a shared split, per-job seed
/// `split.seed ^ K`. Rows come back in input order.
pub fn k_sweep(
    corpus: &Arc<Corpus>,
    kind: ModelKind,
    values: &[usize],
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty K sweep".into()));
    }
    let (train_corpus, test) = split_corpus(corpus, &cfg.split)?;
    let train_corpus = Arc::new(train_corpus);
    let rows: Vec<Result<SweepRow>> = parallel::map_range(values.len(), |i| {
        let k = values[i];
        let hyper = Hyperparams {
            topics: k,
            ..cfg.hyper.clone()
        };
        let seed = cfg.split.seed ^ k as u64;
        let started = Instant::now();
        let model = train(&train_corpus, kind, &hyper, seed, cfg.train_sweeps, 0, None)?;
        let ppl = perplexity(&model.estimate(), &test, cfg.fold_in_sweeps)?;
        Ok(SweepRow {
            value: k,
            perplexity: ppl.value,
            sweeps: cfg.train_sweeps,
            seconds: started.elapsed().as_secs_f64(),
        })
    });
    rows.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunitySweepRow {
    pub value: usize,
    /// Users with at least one threshold-mode membership (μ̂ ≥ 1/C).
    pub assigned_users: usize,
    pub sweeps: usize,
    pub seconds: f64,
}

/// One full-corpus CIPM run per community count, per-job seed
/// `split.seed ^ C`, counting users the 1/C threshold rule assigns.
pub fn community_sweep(
    corpus: &Arc<Corpus>,
    values: &[usize],
    cfg: &SweepConfig,
) -> Result<Vec<CommunitySweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty community sweep".into()));
    }
    let rows: Vec<Result<CommunitySweepRow>> = parallel::map_range(values.len(), |i| {
        let c = values[i];
        let hyper = Hyperparams {
            communities: c,
            ..cfg.hyper.clone()
        };
        let seed = cfg.split.seed ^ c as u64;
        let started = Instant::now();
        let model = train(
            corpus,
            ModelKind::Cipm,
            &hyper,
            seed,
            cfg.train_sweeps,
            0,
            None,
        )?;
        let memberships = assign_communities(&model.estimate(), AssignmentMode::Threshold)?;
        let mut users: Vec<u32> = memberships.iter().map(|m| m.user).collect();
        users.sort_unstable();
        users.dedup();
        Ok(CommunitySweepRow {
            value: c,
            assigned_users: users.len(),
            sweeps: cfg.train_sweeps,
            seconds: started.elapsed().as_secs_f64(),
        })
    });
    rows.into_iter().collect()
}
