//! User Interest Pattern Model: topics keyed by author instead of
//! document, pooling all of a user's posts into one topic mixture.

use std::sync::Arc;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::models::{GibbsCore, ModelEstimate, ModelKind};
use crate::sampler::{CountMatrices, Hyperparams};

#[derive(Debug, Clone)]
pub struct UipmState {
    pub(crate) corpus: Arc<Corpus>,
    pub(crate) core: GibbsCore,
}

impl UipmState {
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

    pub fn counts(&self) -> &CountMatrices {
        &self.core.counts
    }
}

pub(crate) fn author_map(corpus: &Corpus) -> Vec<u32> {
    corpus.docs().iter().map(|d| d.author).collect()
}

pub fn init_uipm(corpus: &Arc<Corpus>, hyper: &Hyperparams, seed: u64) -> Result<UipmState> {
    let actor_of_doc = author_map(corpus);
    let actors = corpus.user_count();
    let core = GibbsCore::init(corpus, actor_of_doc, actors, hyper, seed, false)?;
    Ok(UipmState {
        corpus: Arc::clone(corpus),
        core,
    })
}

pub fn gibbs_sweep_uipm(state: &mut UipmState) -> Result<()> {
    state.core.sweep_tokens(&state.corpus)?;
    state.core.sweeps_done += 1;
    state.core.validate(&state.corpus)
}

pub fn estimate_uipm(state: &UipmState) -> ModelEstimate {
    ModelEstimate {
        meta: state.core.meta(ModelKind::Uipm),
        phi: state.core.phi(),
        theta: state.core.theta(),
        mu: None,
        words: state.corpus.vocabulary().words().to_vec(),
        user_ids: state.corpus.users().ids().to_vec(),
    }
}

/// Top contributors of one topic: P(u|k) = n_u^k / n_k, the share of the
/// topic's tokens each user authored. Unsmoothed; an empty topic yields
/// an empty ranking. Ties break by user index.
pub fn top_users(state: &UipmState, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    user_share_ranking(
        &state.core.counts,
        state.corpus.users().ids(),
        topic,
        n,
    )
}

pub(crate) fn user_share_ranking(
    counts: &CountMatrices,
    user_ids: &[String],
    topic: usize,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    if topic >= counts.topics() {
        return Err(Error::InvalidArgument(format!(
            "topic {topic} out of range (K = {})",
            counts.topics()
        )));
    }
    let total = counts.topic_total(topic);
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..counts.actors())
        .filter(|&u| counts.actor_topic(u, topic) > 0)
        .collect();
    order.sort_by(|&a, &b| {
        counts
            .actor_topic(b, topic)
            .cmp(&counts.actor_topic(a, topic))
            .then(a.cmp(&b))
    });
    Ok(order
        .into_iter()
        .take(n)
        .map(|u| {
            (
                user_ids[u].clone(),
                counts.actor_topic(u, topic) as f64 / total as f64,
            )
        })
        .collect())
}

/// Cosine similarity between two users' topic mixtures. Rows are
/// strictly positive, so the value lands in (0, 1] with self-similarity
/// exactly 1.
pub fn user_similarity(estimate: &ModelEstimate, a: usize, b: usize) -> Result<f64> {
    let theta = &estimate.theta;
    if a >= theta.len() || b >= theta.len() {
        return Err(Error::InvalidArgument(format!(
            "user index out of range (have {} theta rows)",
            theta.len()
        )));
    }
    if a == b {
        return Ok(1.0);
    }
    let dot: f64 = theta[a].iter().zip(&theta[b]).map(|(x, y)| x * y).sum();
    let na: f64 = theta[a].iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = theta[b].iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(dot / (na * nb))
}
