//! Community Interest Pattern Model: joint inference of per-user topic
//! mixtures and user communities from words plus mention events.
//!
//! Sampling is blocked: each sweep first resamples every document's
//! community (with that document's own contributions excluded), then
//! resamples every token's topic with the same conditional UIPM uses.
//! The community conditional for doc m by author u is
//!
//!   (n₋ₘ,ᵤ^c + γ)/(n₋ₘ,ᵤ + Cγ) · Π over mentions x of m:
//!   (n₋ₘ,c^x + δ)/(n₋ₘ,c + Uδ)
//!
//! where n_u^c counts docs of u in community c and n_c^x counts mention
//! events of x attributed to c. Mentioned users influence communities
//! only through those mention counts; no per-mention topic counts are
//! kept because no estimator consumes them.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::models::{uipm, GibbsCore, ModelEstimate, ModelKind};
use crate::rng::sample_categorical;
use crate::sampler::{CommunityCounts, CountMatrices, Hyperparams};

#[derive(Debug, Clone)]
pub struct CipmState {
    pub(crate) corpus: Arc<Corpus>,
    pub(crate) core: GibbsCore,
    /// Per-doc community assignment, length M.
    pub(crate) c: Vec<u32>,
}

impl CipmState {
    pub fn corpus(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.core.hyper
    }

    pub fn seed(&self) -> u64 {
        self.core.seed
    }

    pub fn sweeps_done(&self) -> usize {
        self.core.sweeps_done
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.core.z
    }

    pub fn doc_community(&self) -> &[u32] {
        &self.c
    }

    pub fn counts(&self) -> &CountMatrices {
        &self.core.counts
    }
}

pub fn init_cipm(corpus: &Arc<Corpus>, hyper: &Hyperparams, seed: u64) -> Result<CipmState> {
    let actor_of_doc = uipm::author_map(corpus);
    let actors = corpus.user_count();
    let mut core = GibbsCore::init(corpus, actor_of_doc, actors, hyper, seed, true)?;
    let c_count = hyper.communities;
    // C = 1 consumes no randomness, keeping the chain stream identical to
    // UIPM's for the same seed.
    let mut c = Vec::with_capacity(corpus.doc_count());
    for _ in 0..corpus.doc_count() {
        if c_count == 1 {
            c.push(0u32);
        } else {
            c.push(core.rng.random_range(0..c_count) as u32);
        }
    }
    for (m, doc) in corpus.docs().iter().enumerate() {
        core.counts
            .add_doc_community(doc.author as usize, &doc.mentions, c[m] as usize);
    }
    Ok(CipmState {
        corpus: Arc::clone(corpus),
        core,
        c,
    })
}

/// Unnormalized community conditional for one document whose own
/// contributions are already excluded from `counts`.
pub(crate) fn community_conditional(
    counts: &CommunityCounts,
    hyper: &Hyperparams,
    author: usize,
    mentions: &[u32],
    user_count: usize,
    out: &mut [f64],
) {
    let c_gamma = counts.communities() as f64 * hyper.gamma;
    let u_delta = user_count as f64 * hyper.delta;
    let author_docs = counts.user_docs(author) as f64;
    for (c, slot) in out.iter_mut().enumerate() {
        let mut weight =
            (counts.user_community(author, c) as f64 + hyper.gamma) / (author_docs + c_gamma);
        let denom = counts.community_total(c) as f64 + u_delta;
        for &x in mentions {
            weight *= (counts.community_mention(c, x as usize) as f64 + hyper.delta) / denom;
        }
        *slot = weight;
    }
}

pub fn gibbs_sweep_cipm(state: &mut CipmState) -> Result<()> {
    let c_count = state.core.hyper.communities;
    if c_count > 1 {
        let mut weights = vec![0.0f64; c_count];
        let user_count = state.corpus.user_count();
        for (m, doc) in state.corpus.docs().iter().enumerate() {
            let author = doc.author as usize;
            let old = state.c[m] as usize;
            state
                .core
                .counts
                .remove_doc_community(author, &doc.mentions, old)?;
            community_conditional(
                state.core.counts.community().expect("cipm has communities"),
                &state.core.hyper,
                author,
                &doc.mentions,
                user_count,
                &mut weights,
            );
            let new = sample_categorical(&weights, &mut state.core.rng)?;
            state
                .core
                .counts
                .add_doc_community(author, &doc.mentions, new);
            state.c[m] = new as u32;
        }
    }
    state.core.sweep_tokens(&state.corpus)?;
    state.core.sweeps_done += 1;
    state.core.validate(&state.corpus)
}

pub fn estimate_cipm(state: &CipmState) -> ModelEstimate {
    let hyper = &state.core.hyper;
    let cc = state.core.counts.community().expect("cipm has communities");
    let c_gamma = hyper.communities as f64 * hyper.gamma;
    let mu = (0..state.corpus.user_count())
        .map(|u| {
            let denom = cc.user_docs(u) as f64 + c_gamma;
            cc.user_community_row(u)
                .iter()
                .map(|&n| (n as f64 + hyper.gamma) / denom)
                .collect()
        })
        .collect();
    ModelEstimate {
        meta: state.core.meta(ModelKind::Cipm),
        phi: state.core.phi(),
        theta: state.core.theta(),
        mu: Some(mu),
        words: state.corpus.vocabulary().words().to_vec(),
        user_ids: state.corpus.users().ids().to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentMode {
    /// Every community with μ̂_u^c ≥ 1/C.
    Threshold,
    /// The single most probable community, ties to the lowest index.
    Argmax,
}

impl AssignmentMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssignmentMode::Threshold => "threshold",
            AssignmentMode::Argmax => "argmax",
        }
    }
}

impl std::str::FromStr for AssignmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(AssignmentMode::Threshold),
            "argmax" => Ok(AssignmentMode::Argmax),
            other => Err(Error::InvalidArgument(format!(
                "unknown assignment mode {other:?} (expected threshold or argmax)"
            ))),
        }
    }
}

/// The membership threshold used in threshold mode: 1/C.
pub fn community_threshold(communities: usize) -> f64 {
    1.0 / communities as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityMembership {
    pub user: u32,
    pub community: u32,
    pub probability: f64,
}

/// Assign users to communities from μ̂. Threshold mode emits one row per
/// qualifying community; argmax mode exactly one row per user.
pub fn assign_communities(
    estimate: &ModelEstimate,
    mode: AssignmentMode,
) -> Result<Vec<CommunityMembership>> {
    let mu = estimate
        .mu
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("estimate carries no community matrix".into()))?;
    let mut rows = Vec::new();
    match mode {
        AssignmentMode::Threshold => {
            for (u, row) in mu.iter().enumerate() {
                let min_p = community_threshold(row.len());
                for (c, &p) in row.iter().enumerate() {
                    if p >= min_p {
                        rows.push(CommunityMembership {
                            user: u as u32,
                            community: c as u32,
                            probability: p,
                        });
                    }
                }
            }
        }
        AssignmentMode::Argmax => {
            for (u, row) in mu.iter().enumerate() {
                let mut best = 0usize;
                for (c, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = c;
                    }
                }
                rows.push(CommunityMembership {
                    user: u as u32,
                    community: best as u32,
                    probability: row[best],
                });
            }
        }
    }
    Ok(rows)
}

/// One row of the per-community interest report: a user argmax-assigned
/// to the community, their strongest topic, and its θ̂ value.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicInterest {
    pub user_id: String,
    pub topic: usize,
    pub theta: f64,
}

/// For every user argmax-assigned to `community`, report the topic of
/// maximum interest. Ties go to the lowest topic index; an empty
/// community yields an empty table.
pub fn mention_similarity_report(
    estimate: &ModelEstimate,
    community: usize,
) -> Result<Vec<TopicInterest>> {
    let assignments = assign_communities(estimate, AssignmentMode::Argmax)?;
    let mut rows = Vec::new();
    for m in assignments {
        if m.community as usize != community {
            continue;
        }
        let theta = &estimate.theta[m.user as usize];
        let mut best = 0usize;
        for (k, &p) in theta.iter().enumerate() {
            if p > theta[best] {
                best = k;
            }
        }
        rows.push(TopicInterest {
            user_id: estimate.user_ids[m.user as usize].clone(),
            topic: best,
            theta: theta[best],
        });
    }
    Ok(rows)
}
