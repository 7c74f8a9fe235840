//! The three collapsed Gibbs samplers and their shared machinery.
//!
//! IPM keys topic proportions by document, UIPM and CIPM by author; the
//! token conditional is the same two-ratio form in all three, so one
//! core drives every chain. CIPM adds a blocked per-document community
//! resample before each token sweep.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng::{sample_categorical, seeded, ChainRng, RNG_ALGORITHM};
use crate::sampler::{CountMatrices, Hyperparams};

pub mod cipm;
pub mod ipm;
pub mod uipm;

pub use cipm::CipmState;
pub use ipm::IpmState;
pub use uipm::UipmState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ipm,
    Uipm,
    Cipm,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Ipm => "ipm",
            ModelKind::Uipm => "uipm",
            ModelKind::Cipm => "cipm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipm" => Ok(ModelKind::Ipm),
            "uipm" => Ok(ModelKind::Uipm),
            "cipm" => Ok(ModelKind::Cipm),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind {other:?} (expected ipm, uipm, or cipm)"
            ))),
        }
    }
}

/// Estimate metadata carried by every snapshot and export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub kind: ModelKind,
    pub hyper: Hyperparams,
    pub seed: u64,
    pub sweeps: usize,
    pub rng_algorithm: String,
}

/// Normalized model parameters: topic→word (phi), actor→topic (theta),
/// and for CIPM user→community (mu). Every row is stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEstimate {
    pub meta: EstimateMeta,
    /// K×W.
    pub phi: Vec<Vec<f64>>,
    /// D×K; D = docs for IPM, users for UIPM/CIPM.
    pub theta: Vec<Vec<f64>>,
    /// U×C, CIPM only.
    pub mu: Option<Vec<Vec<f64>>>,
    /// Vocabulary words, aligned with phi columns.
    pub words: Vec<String>,
    /// User ids, aligned with theta rows (UIPM/CIPM) and mu rows.
    pub user_ids: Vec<String>,
}

impl ModelEstimate {
    pub fn topic_count(&self) -> usize {
        self.phi.len()
    }

    pub fn word_count(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }
}

/// Top-`n` words of one topic by phi, ties broken lexicographically.
pub fn top_words(estimate: &ModelEstimate, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    if topic >= estimate.topic_count() {
        return Err(Error::InvalidArgument(format!(
            "topic {topic} out of range (K = {})",
            estimate.topic_count()
        )));
    }
    let row = &estimate.phi[topic];
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .expect("phi entries are finite")
            .then_with(|| estimate.words[a].cmp(&estimate.words[b]))
    });
    Ok(order
        .into_iter()
        .take(n)
        .map(|w| (estimate.words[w].clone(), row[w]))
        .collect())
}

/// Shared chain state: token assignments, counts, and the seeded RNG.
#[derive(Debug, Clone)]
pub(crate) struct GibbsCore {
    pub hyper: Hyperparams,
    pub seed: u64,
    pub sweeps_done: usize,
    pub rng: ChainRng,
    /// Per-doc, per-token topic assignments.
    pub z: Vec<Vec<u32>>,
    /// Doc index → actor index (identity for IPM, author for UIPM/CIPM).
    pub actor_of_doc: Vec<u32>,
    pub counts: CountMatrices,
}

impl GibbsCore {
    /// Assign every token a uniformly random topic and build the counts.
    pub fn init(
        corpus: &Corpus,
        actor_of_doc: Vec<u32>,
        actors: usize,
        hyper: &Hyperparams,
        seed: u64,
        communities: bool,
    ) -> Result<Self> {
        hyper.validate()?;
        if corpus.docs().is_empty() {
            return Err(Error::EmptyCorpus("cannot sample an empty corpus".into()));
        }
        let k = hyper.topics;
        let mut rng = seeded(seed);
        let mut counts = CountMatrices::new(k, corpus.word_count(), actors);
        if communities {
            counts = counts.with_communities(hyper.communities, corpus.user_count());
        }
        let mut z = Vec::with_capacity(corpus.doc_count());
        for (m, doc) in corpus.docs().iter().enumerate() {
            let actor = actor_of_doc[m] as usize;
            let mut doc_z = Vec::with_capacity(doc.tokens.len());
            for &w in &doc.tokens {
                let topic = rng.random_range(0..k) as u32;
                counts.add_token(actor, w as usize, topic as usize);
                doc_z.push(topic);
            }
            z.push(doc_z);
        }
        Ok(GibbsCore {
            hyper: hyper.clone(),
            seed,
            sweeps_done: 0,
            rng,
            z,
            actor_of_doc,
            counts,
        })
    }

    /// Resample every token once, document order then token order.
    pub fn sweep_tokens(&mut self, corpus: &Corpus) -> Result<()> {
        let k = self.hyper.topics;
        let mut weights = vec![0.0f64; k];
        for (m, doc) in corpus.docs().iter().enumerate() {
            let actor = self.actor_of_doc[m] as usize;
            for (i, &w) in doc.tokens.iter().enumerate() {
                let old = self.z[m][i] as usize;
                self.counts.remove_token(actor, w as usize, old)?;
                token_conditional(&self.counts, &self.hyper, w as usize, actor, &mut weights);
                let new = sample_categorical(&weights, &mut self.rng)?;
                self.counts.add_token(actor, w as usize, new);
                self.z[m][i] = new as u32;
            }
        }
        Ok(())
    }

    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        self.counts.validate(corpus.total_tokens())
    }

    pub fn meta(&self, kind: ModelKind) -> EstimateMeta {
        EstimateMeta {
            kind,
            hyper: self.hyper.clone(),
            seed: self.seed,
            sweeps: self.sweeps_done,
            rng_algorithm: RNG_ALGORITHM.to_string(),
        }
    }

    /// phi rows from the current counts.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let k = self.hyper.topics;
        let w_count = self.counts.words();
        let beta = self.hyper.beta;
        let denom_add = w_count as f64 * beta;
        (0..k)
            .map(|topic| {
                let denom = self.counts.topic_total(topic) as f64 + denom_add;
                (0..w_count)
                    .map(|w| (self.counts.topic_word(topic, w) as f64 + beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// theta rows (one per actor) from the current counts.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let k = self.hyper.topics;
        let alpha = self.hyper.alpha;
        let denom_add = k as f64 * alpha;
        (0..self.counts.actors())
            .map(|a| {
                let denom = self.counts.actor_total(a) as f64 + denom_add;
                self.counts
                    .actor_topic_row(a)
                    .iter()
                    .map(|&n| (n as f64 + alpha) / denom)
                    .collect()
            })
            .collect()
    }
}

/// Unnormalized token conditional with the current token already
/// excluded from `counts`: (n_k^w + β)/(n_k + Wβ) · (n_a^k + α)/(n_a + Kα).
pub(crate) fn token_conditional(
    counts: &CountMatrices,
    hyper: &Hyperparams,
    word: usize,
    actor: usize,
    out: &mut [f64],
) {
    let w_beta = counts.words() as f64 * hyper.beta;
    let k_alpha = counts.topics() as f64 * hyper.alpha;
    let word_row = counts.word_topic_row(word);
    let actor_row = counts.actor_topic_row(actor);
    let topic_totals = counts.topic_totals();
    let actor_total = counts.actor_total(actor) as f64;
    for k in 0..out.len() {
        let word_factor = (word_row[k] as f64 + hyper.beta) / (topic_totals[k] as f64 + w_beta);
        let actor_factor = (actor_row[k] as f64 + hyper.alpha) / (actor_total + k_alpha);
        out[k] = word_factor * actor_factor;
    }
}

/// A trained chain of any kind.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Ipm(IpmState),
    Uipm(UipmState),
    Cipm(CipmState),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Ipm(_) => ModelKind::Ipm,
            TrainedModel::Uipm(_) => ModelKind::Uipm,
            TrainedModel::Cipm(_) => ModelKind::Cipm,
        }
    }

    pub fn estimate(&self) -> ModelEstimate {
        match self {
            TrainedModel::Ipm(s) => ipm::estimate_ipm(s),
            TrainedModel::Uipm(s) => uipm::estimate_uipm(s),
            TrainedModel::Cipm(s) => cipm::estimate_cipm(s),
        }
    }

    pub fn sweep(&mut self) -> Result<()> {
        match self {
            TrainedModel::Ipm(s) => ipm::gibbs_sweep_ipm(s),
            TrainedModel::Uipm(s) => uipm::gibbs_sweep_uipm(s),
            TrainedModel::Cipm(s) => cipm::gibbs_sweep_cipm(s),
        }
    }

    pub fn corpus(&self) -> &Arc<Corpus> {
        match self {
            TrainedModel::Ipm(s) => &s.corpus,
            TrainedModel::Uipm(s) => &s.corpus,
            TrainedModel::Cipm(s) => &s.corpus,
        }
    }

    fn core(&self) -> &GibbsCore {
        match self {
            TrainedModel::Ipm(s) => &s.core,
            TrainedModel::Uipm(s) => &s.core,
            TrainedModel::Cipm(s) => &s.core,
        }
    }

    /// Perplexity of the training corpus under the current estimates,
    /// used for the sweep-by-sweep trace.
    pub fn training_perplexity(&self) -> f64 {
        let core = self.core();
        let corpus = self.corpus();
        let phi = core.phi();
        let theta = core.theta();
        let mut log_sum = 0.0f64;
        for (m, doc) in corpus.docs().iter().enumerate() {
            let actor = core.actor_of_doc[m] as usize;
            for &w in &doc.tokens {
                let p: f64 = (0..core.hyper.topics)
                    .map(|k| theta[actor][k] * phi[k][w as usize])
                    .sum();
                log_sum += p.ln();
            }
        }
        (-log_sum / corpus.total_tokens() as f64).exp()
    }
}

/// Initialize and run `sweeps` full Gibbs sweeps. `trace` receives
/// (sweep number, training perplexity) every `trace_every` sweeps.
pub fn train(
    corpus: &Arc<Corpus>,
    kind: ModelKind,
    hyper: &Hyperparams,
    seed: u64,
    sweeps: usize,
    trace_every: usize,
    mut trace: Option<&mut dyn FnMut(usize, f64)>,
) -> Result<TrainedModel> {
    let mut model = match kind {
        ModelKind::Ipm => TrainedModel::Ipm(ipm::init_ipm(corpus, hyper, seed)?),
        ModelKind::Uipm => TrainedModel::Uipm(uipm::init_uipm(corpus, hyper, seed)?),
        ModelKind::Cipm => TrainedModel::Cipm(cipm::init_cipm(corpus, hyper, seed)?),
    };
    for s in 1..=sweeps {
        model.sweep()?;
        if let Some(cb) = trace.as_deref_mut() {
            if trace_every > 0 && (s % trace_every == 0 || s == sweeps) {
                cb(s, model.training_perplexity());
            }
        }
    }
    Ok(model)
}

pub const MODEL_SCHEMA: &str = "mtopics/model/v1";

/// Serialized chain: metadata plus the count matrices (and for CIPM the
/// community state). Token assignments are included only on request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub schema: String,
    pub meta: EstimateMeta,
    /// Resolved run configuration, echoed verbatim into the artifact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub words: Vec<String>,
    pub user_ids: Vec<String>,
    /// K×W.
    pub topic_word: Vec<Vec<u32>>,
    /// D×K.
    pub actor_topic: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub community: Option<CommunitySnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignments: Option<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySnapshot {
    /// Per-doc community assignment.
    pub doc_community: Vec<u32>,
    /// U×C.
    pub user_community: Vec<Vec<u32>>,
    /// C×U.
    pub community_mention: Vec<Vec<u32>>,
}

impl TrainedModel {
    pub fn to_snapshot(
        &self,
        include_assignments: bool,
        config: Option<serde_json::Value>,
    ) -> ModelSnapshot {
        let core = self.core();
        let corpus = self.corpus();
        let community = match self {
            TrainedModel::Cipm(s) => Some(CommunitySnapshot {
                doc_community: s.doc_community().to_vec(),
                user_community: core.counts.user_community_rows().unwrap(),
                community_mention: core.counts.community_mention_rows().unwrap(),
            }),
            _ => None,
        };
        ModelSnapshot {
            schema: MODEL_SCHEMA.to_string(),
            meta: core.meta(self.kind()),
            config,
            words: corpus.vocabulary().words().to_vec(),
            user_ids: corpus.users().ids().to_vec(),
            topic_word: core.counts.topic_word_rows(),
            actor_topic: core.counts.actor_topic_rows(),
            community,
            assignments: include_assignments.then(|| core.z.clone()),
        }
    }
}

impl ModelSnapshot {
    pub fn read_json(reader: impl std::io::Read) -> Result<ModelSnapshot> {
        let snap: ModelSnapshot = serde_json::from_reader(reader)
            .map_err(|e| Error::Snapshot(format!("model deserialization failed: {e}")))?;
        if snap.schema != MODEL_SCHEMA {
            return Err(Error::Snapshot(format!(
                "unsupported model schema {:?}",
                snap.schema
            )));
        }
        Ok(snap)
    }

    pub fn write_json(&self, writer: impl std::io::Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)
            .map_err(|e| Error::Snapshot(format!("model serialization failed: {e}")))
    }

    fn counts(&self) -> Result<CountMatrices> {
        CountMatrices::from_parts(
            &self.topic_word,
            &self.actor_topic,
            self.community
                .as_ref()
                .map(|c| (c.user_community.as_slice(), c.community_mention.as_slice())),
        )
    }

    /// Rebuild the normalized estimate from the stored counts.
    pub fn to_estimate(&self) -> Result<ModelEstimate> {
        let counts = self.counts()?;
        let hyper = &self.meta.hyper;
        hyper.validate()?;
        if counts.topics() != hyper.topics {
            return Err(Error::Snapshot(format!(
                "snapshot has {} topic rows, metadata claims {}",
                counts.topics(),
                hyper.topics
            )));
        }
        let core = GibbsCore {
            hyper: hyper.clone(),
            seed: self.meta.seed,
            sweeps_done: self.meta.sweeps,
            rng: seeded(self.meta.seed),
            z: Vec::new(),
            actor_of_doc: Vec::new(),
            counts,
        };
        let mu = core.counts.community().map(|cc| {
            let gamma = hyper.gamma;
            let c_gamma = cc.communities() as f64 * gamma;
            (0..self.user_ids.len())
                .map(|u| {
                    let denom = cc.user_docs(u) as f64 + c_gamma;
                    cc.user_community_row(u)
                        .iter()
                        .map(|&n| (n as f64 + gamma) / denom)
                        .collect()
                })
                .collect()
        });
        Ok(ModelEstimate {
            meta: core.meta(self.meta.kind),
            phi: core.phi(),
            theta: core.theta(),
            mu,
            words: self.words.clone(),
            user_ids: self.user_ids.clone(),
        })
    }

    /// Per-topic user rankings (token share), UIPM/CIPM snapshots only.
    pub fn user_rankings(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if self.meta.kind == ModelKind::Ipm {
            return Err(Error::InvalidArgument(
                "user rankings require a user-keyed model (uipm or cipm)".into(),
            ));
        }
        let counts = self.counts()?;
        uipm::user_share_ranking(&counts, &self.user_ids, topic, n)
    }
}
