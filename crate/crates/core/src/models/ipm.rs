//! Interest Pattern Model: document-level topic inference.
//!
//! The conditional for token i of document m is
//! (n₋ᵢ,ₖ^wᵢ + β)/(n₋ᵢ,ₖ + Wβ) · (n₋ᵢ,ₘ^k + α)/(n₋ᵢ,ₘ + Kα),
//! i.e. the shared core with the document itself as the actor.

use std::sync::Arc;

use crate::corpus::Corpus;
use crate::error::Result;
use crate::models::{GibbsCore, ModelEstimate, ModelKind};
use crate::sampler::Hyperparams;

#[derive(Debug, Clone)]
pub struct IpmState {
    pub(crate) corpus: Arc<Corpus>,
    pub(crate) core: GibbsCore,
}

impl IpmState {
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

    /// Per-doc, per-token topic assignments.
    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.core.z
    }

    pub fn counts(&self) -> &crate::sampler::CountMatrices {
        &self.core.counts
    }
}

pub fn init_ipm(corpus: &Arc<Corpus>, hyper: &Hyperparams, seed: u64) -> Result<IpmState> {
    let actor_of_doc: Vec<u32> = (0..corpus.doc_count() as u32).collect();
    let actors = corpus.doc_count();
    let core = GibbsCore::init(corpus, actor_of_doc, actors, hyper, seed, false)?;
    Ok(IpmState {
        corpus: Arc::clone(corpus),
        core,
    })
}

pub fn gibbs_sweep_ipm(state: &mut IpmState) -> Result<()> {
    state.core.sweep_tokens(&state.corpus)?;
    state.core.sweeps_done += 1;
    state.core.validate(&state.corpus)
}

pub fn estimate_ipm(state: &IpmState) -> ModelEstimate {
    ModelEstimate {
        meta: state.core.meta(ModelKind::Ipm),
        phi: state.core.phi(),
        theta: state.core.theta(),
        mu: None,
        words: state.corpus.vocabulary().words().to_vec(),
        user_ids: state.corpus.users().ids().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, InteractionRecord};
    use crate::models::token_conditional;
    use crate::sampler::CountMatrices;
    use std::collections::HashSet;

    fn corpus_of(texts: &[&str]) -> Arc<Corpus> {
        let records: Vec<InteractionRecord> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| InteractionRecord {
                record_id: format!("r{i}"),
                author_id: format!("u{i}"),
                text: t.to_string(),
                mentions: vec![],
                timestamp: None,
            })
            .collect();
        let (corpus, _) = build_corpus(&records, &HashSet::new(), 1).unwrap();
        Arc::new(corpus)
    }

    fn hyper(k: usize) -> Hyperparams {
        Hyperparams {
            alpha: 0.5,
            beta: 0.1,
            ..Hyperparams::with_defaults(k, 1)
        }
    }

    #[test]
    fn single_topic_forces_assignment() {
        let corpus = corpus_of(&["a b c", "d e"]);
        let state = init_ipm(&corpus, &hyper(1), 7).unwrap();
        assert!(state.assignments().iter().flatten().all(|&z| z == 0));
        assert_eq!(state.counts().topic_total(0) as u64, corpus.total_tokens());
    }

    #[test]
    fn init_is_deterministic_under_seed() {
        let corpus = corpus_of(&["a b c d e", "f g h"]);
        let a = init_ipm(&corpus, &hyper(5), 99).unwrap();
        let b = init_ipm(&corpus, &hyper(5), 99).unwrap();
        assert_eq!(a.assignments(), b.assignments());
        let c = init_ipm(&corpus, &hyper(5), 100).unwrap();
        assert!(a.assignments() != c.assignments() || a.assignments().len() <= 1);
    }

    /// Rebuild oracle: counts recomputed from scratch from z must equal the
    /// incrementally maintained matrices.
    pub(crate) fn rebuild_counts(
        corpus: &Corpus,
        z: &[Vec<u32>],
        actor_of_doc: &[u32],
        topics: usize,
        actors: usize,
    ) -> CountMatrices {
        let mut counts = CountMatrices::new(topics, corpus.word_count(), actors);
        for (m, doc) in corpus.docs().iter().enumerate() {
            for (i, &w) in doc.tokens.iter().enumerate() {
                counts.add_token(actor_of_doc[m] as usize, w as usize, z[m][i] as usize);
            }
        }
        counts
    }

    #[test]
    fn rebuild_oracle_after_init_and_sweeps() {
        let corpus = corpus_of(&["a b c a", "b c d", "d d e"]);
        let mut state = init_ipm(&corpus, &hyper(3), 5).unwrap();
        for _ in 0..10 {
            gibbs_sweep_ipm(&mut state).unwrap();
            let rebuilt = rebuild_counts(
                &corpus,
                state.assignments(),
                &state.core.actor_of_doc,
                3,
                corpus.doc_count(),
            );
            assert_eq!(&rebuilt, state.counts());
        }
    }

    #[test]
    fn sweep_preserves_token_count() {
        let corpus = corpus_of(&["a b c a b", "c d"]);
        let mut state = init_ipm(&corpus, &hyper(4), 3).unwrap();
        for _ in 0..5 {
            gibbs_sweep_ipm(&mut state).unwrap();
            let total: u64 = (0..4).map(|k| state.counts().topic_total(k) as u64).sum();
            assert_eq!(total, corpus.total_tokens());
        }
    }

    #[test]
    fn single_token_conditional_is_uniform() {
        // One doc, one token: after exclusion both ratios reduce to priors,
        // so every topic gets weight β/(Wβ)·α/(Kα).
        let corpus = corpus_of(&["only"]);
        let h = hyper(4);
        let mut state = init_ipm(&corpus, &h, 1).unwrap();
        let old = state.assignments()[0][0] as usize;
        state.core.counts.remove_token(0, 0, old).unwrap();
        let mut weights = vec![0.0; 4];
        token_conditional(&state.core.counts, &h, 0, 0, &mut weights);
        let expected = (h.beta / (1.0 * h.beta)) * (h.alpha / (4.0 * h.alpha));
        for &w in &weights {
            assert!((w - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_matches_hand_evaluation() {
        // Corpus: one doc "a b a" (W=2: a=0,b=1), K=2, counts set by the
        // fixed assignment z = [0, 1, 0], then token 0 excluded.
        let corpus = corpus_of(&["a b a"]);
        let h = Hyperparams {
            alpha: 0.5,
            beta: 0.1,
            ..Hyperparams::with_defaults(2, 1)
        };
        let mut counts = CountMatrices::new(2, 2, 1);
        counts.add_token(0, 0, 0);
        counts.add_token(0, 1, 1);
        counts.add_token(0, 0, 0);
        counts.remove_token(0, 0, 0).unwrap();
        let mut weights = vec![0.0; 2];
        token_conditional(&counts, &h, 0, 0, &mut weights);
        // k=0: word (1+0.1)/(1+0.2), doc (1+0.5)/(2+1.0)
        let w0 = (1.0 + 0.1) / (1.0 + 0.2) * ((1.0 + 0.5) / (2.0 + 1.0));
        // k=1: word (0+0.1)/(1+0.2), doc (1+0.5)/(2+1.0)
        let w1 = (0.0 + 0.1) / (1.0 + 0.2) * ((1.0 + 0.5) / (2.0 + 1.0));
        assert!((weights[0] - w0).abs() < 1e-12, "{} vs {w0}", weights[0]);
        assert!((weights[1] - w1).abs() < 1e-12, "{} vs {w1}", weights[1]);
        drop(corpus);
    }

    #[test]
    fn estimate_rows_are_stochastic() {
        let corpus = corpus_of(&["a b c a", "c d e", "f a"]);
        let mut state = init_ipm(&corpus, &hyper(3), 17).unwrap();
        for _ in 0..20 {
            gibbs_sweep_ipm(&mut state).unwrap();
        }
        let est = estimate_ipm(&state);
        for row in est.phi.iter().chain(est.theta.iter()) {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn estimate_direct_substitution() {
        // W=2, beta=1, n_1 = [3, 1] → phi_1 = [4/6, 2/6].
        let corpus = corpus_of(&["a a a b"]);
        let h = Hyperparams {
            alpha: 0.5,
            beta: 1.0,
            ..Hyperparams::with_defaults(1, 1)
        };
        let state = init_ipm(&corpus, &h, 0).unwrap();
        let est = estimate_ipm(&state);
        assert!((est.phi[0][0] - 4.0 / 6.0).abs() < 1e-12);
        assert!((est.phi[0][1] - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_rejected() {
        let corpus = corpus_of(&["a"]);
        // Build an empty corpus by stripping docs through the snapshot path.
        let snap = corpus.to_snapshot(None);
        let mut snap = snap;
        snap.docs.clear();
        snap.total_tokens = 0;
        let empty = Arc::new(snap.into_corpus().unwrap());
        assert!(init_ipm(&empty, &hyper(2), 0).is_err());
    }
}
