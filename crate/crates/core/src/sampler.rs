//! Shared sampler machinery: Dirichlet hyperparameters, the count
//! matrices every collapsed conditional reads, and the smoothed-ratio
//! building block they are all assembled from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric Dirichlet priors plus the latent dimensions.
///
/// `gamma` is the user→community prior and `delta` the
/// community→mentioned-user prior; they are distinct parameters with
/// `delta` defaulting to `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Number of topics K.
    pub topics: usize,
    /// Number of communities C (ignored by IPM/UIPM).
    pub communities: usize,
}

impl Hyperparams {
    pub const DEFAULT_BETA: f64 = 0.01;
    pub const DEFAULT_GAMMA: f64 = 1.0;

    /// Convention defaults: alpha = 50/K, beta = 0.01, gamma = 1.0,
    /// delta = gamma.
    pub fn with_defaults(topics: usize, communities: usize) -> Self {
        Hyperparams {
            alpha: 50.0 / topics.max(1) as f64,
            beta: Self::DEFAULT_BETA,
            gamma: Self::DEFAULT_GAMMA,
            delta: Self::DEFAULT_GAMMA,
            topics,
            communities,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "prior {name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.topics < 1 {
            return Err(Error::InvalidArgument("topics (K) must be >= 1".into()));
        }
        if self.communities < 1 {
            return Err(Error::InvalidArgument(
                "communities (C) must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// (count + prior) / (total + dim · prior) — the smoothed ratio every
/// conditional factor and every estimator reduces to.
pub fn smoothed_ratio(count: u64, total: u64, prior: f64, dim: usize) -> Result<f64> {
    if !(prior.is_finite() && prior > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "prior must be positive, got {prior}"
        )));
    }
    if count > total {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds total {total}"
        )));
    }
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    Ok((count as f64 + prior) / (total as f64 + dim as f64 * prior))
}

fn underflow(what: &str) -> Error {
    Error::Consistency(format!("decrement of a zero {what} count"))
}

/// CIPM-only matrices: per-author tweet-community counts and
/// per-community mention-event counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityCounts {
    communities: usize,
    users: usize,
    /// U×C, row-major: docs authored by u assigned to community c.
    user_community: Vec<u32>,
    /// Row sums of `user_community` = docs authored by u.
    user_docs: Vec<u32>,
    /// C×U, row-major: mention events of user x attributed to community c.
    community_mention: Vec<u32>,
    /// Row sums of `community_mention` = mention events in c.
    community_total: Vec<u32>,
}

impl CommunityCounts {
    fn new(communities: usize, users: usize) -> Self {
        CommunityCounts {
            communities,
            users,
            user_community: vec![0; users * communities],
            user_docs: vec![0; users],
            community_mention: vec![0; communities * users],
            community_total: vec![0; communities],
        }
    }

    pub fn communities(&self) -> usize {
        self.communities
    }

    pub fn user_community(&self, user: usize, community: usize) -> u32 {
        self.user_community[user * self.communities + community]
    }

    pub fn user_docs(&self, user: usize) -> u32 {
        self.user_docs[user]
    }

    pub fn community_mention(&self, community: usize, user: usize) -> u32 {
        self.community_mention[community * self.users + user]
    }

    pub fn community_total(&self, community: usize) -> u32 {
        self.community_total[community]
    }

    pub(crate) fn user_community_row(&self, user: usize) -> &[u32] {
        let c = self.communities;
        &self.user_community[user * c..(user + 1) * c]
    }

    fn add_doc(&mut self, author: usize, mentions: &[u32], community: usize) {
        self.user_community[author * self.communities + community] += 1;
        self.user_docs[author] += 1;
        for &x in mentions {
            self.community_mention[community * self.users + x as usize] += 1;
            self.community_total[community] += 1;
        }
    }

    fn remove_doc(&mut self, author: usize, mentions: &[u32], community: usize) -> Result<()> {
        let uc = &mut self.user_community[author * self.communities + community];
        *uc = uc.checked_sub(1).ok_or_else(|| underflow("user-community"))?;
        let ud = &mut self.user_docs[author];
        *ud = ud.checked_sub(1).ok_or_else(|| underflow("user-doc"))?;
        for &x in mentions {
            let cm = &mut self.community_mention[community * self.users + x as usize];
            *cm = cm
                .checked_sub(1)
                .ok_or_else(|| underflow("community-mention"))?;
            let ct = &mut self.community_total[community];
            *ct = ct
                .checked_sub(1)
                .ok_or_else(|| underflow("community-total"))?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for u in 0..self.users {
            let sum: u64 = self.user_community_row(u).iter().map(|&v| v as u64).sum();
            if sum != self.user_docs[u] as u64 {
                return Err(Error::Consistency(format!(
                    "user {u} community row sums to {sum}, recorded {}",
                    self.user_docs[u]
                )));
            }
        }
        for c in 0..self.communities {
            let row = &self.community_mention[c * self.users..(c + 1) * self.users];
            let sum: u64 = row.iter().map(|&v| v as u64).sum();
            if sum != self.community_total[c] as u64 {
                return Err(Error::Consistency(format!(
                    "community {c} mention row sums to {sum}, recorded {}",
                    self.community_total[c]
                )));
            }
        }
        Ok(())
    }
}

/// Dense count matrices backing the collapsed conditionals.
///
/// The topic-word matrix is stored word-major (W×K) so that the hot
/// loop's scan over topics for a fixed word stays contiguous; accessors
/// and snapshots present it in the conventional K×W orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrices {
    topics: usize,
    words: usize,
    actors: usize,
    /// W×K, row-major.
    word_topic: Vec<u32>,
    /// Tokens assigned to each topic (length K).
    topic_total: Vec<u32>,
    /// A×K, row-major: tokens of actor (doc or user) assigned to topic.
    actor_topic: Vec<u32>,
    /// Row sums of `actor_topic` (length A).
    actor_total: Vec<u32>,
    community: Option<CommunityCounts>,
}

impl CountMatrices {
    pub fn new(topics: usize, words: usize, actors: usize) -> Self {
        CountMatrices {
            topics,
            words,
            actors,
            word_topic: vec![0; words * topics],
            topic_total: vec![0; topics],
            actor_topic: vec![0; actors * topics],
            actor_total: vec![0; actors],
            community: None,
        }
    }

    pub fn with_communities(mut self, communities: usize, users: usize) -> Self {
        self.community = Some(CommunityCounts::new(communities, users));
        self
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn actors(&self) -> usize {
        self.actors
    }

    /// n_k^w: times word w is assigned to topic k.
    pub fn topic_word(&self, topic: usize, word: usize) -> u32 {
        self.word_topic[word * self.topics + topic]
    }

    /// n_k^(·): tokens assigned to topic k.
    pub fn topic_total(&self, topic: usize) -> u32 {
        self.topic_total[topic]
    }

    /// n_a^k: tokens of actor a (doc for IPM, user otherwise) in topic k.
    pub fn actor_topic(&self, actor: usize, topic: usize) -> u32 {
        self.actor_topic[actor * self.topics + topic]
    }

    /// n_a^(·): tokens of actor a.
    pub fn actor_total(&self, actor: usize) -> u32 {
        self.actor_total[actor]
    }

    pub fn community(&self) -> Option<&CommunityCounts> {
        self.community.as_ref()
    }

    pub(crate) fn word_topic_row(&self, word: usize) -> &[u32] {
        let k = self.topics;
        &self.word_topic[word * k..(word + 1) * k]
    }

    pub(crate) fn topic_totals(&self) -> &[u32] {
        &self.topic_total
    }

    pub(crate) fn actor_topic_row(&self, actor: usize) -> &[u32] {
        let k = self.topics;
        &self.actor_topic[actor * k..(actor + 1) * k]
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_total.iter().map(|&v| v as u64).sum()
    }

    pub fn add_token(&mut self, actor: usize, word: usize, topic: usize) {
        debug_assert!(topic < self.topics && word < self.words && actor < self.actors);
        self.word_topic[word * self.topics + topic] += 1;
        self.topic_total[topic] += 1;
        self.actor_topic[actor * self.topics + topic] += 1;
        self.actor_total[actor] += 1;
    }

    pub fn remove_token(&mut self, actor: usize, word: usize, topic: usize) -> Result<()> {
        let wt = &mut self.word_topic[word * self.topics + topic];
        *wt = wt.checked_sub(1).ok_or_else(|| underflow("word-topic"))?;
        let tt = &mut self.topic_total[topic];
        *tt = tt.checked_sub(1).ok_or_else(|| underflow("topic-total"))?;
        let at = &mut self.actor_topic[actor * self.topics + topic];
        *at = at.checked_sub(1).ok_or_else(|| underflow("actor-topic"))?;
        let atot = &mut self.actor_total[actor];
        *atot = atot.checked_sub(1).ok_or_else(|| underflow("actor-total"))?;
        Ok(())
    }

    /// The n₋ᵢ exclusion step fused with the re-assignment: decrement the
    /// old topic's cells, increment the new one's.
    pub fn reassign_token(
        &mut self,
        actor: usize,
        word: usize,
        old_topic: usize,
        new_topic: usize,
    ) -> Result<()> {
        if old_topic == new_topic {
            return Ok(());
        }
        self.remove_token(actor, word, old_topic)?;
        self.add_token(actor, word, new_topic);
        Ok(())
    }

    pub fn add_doc_community(&mut self, author: usize, mentions: &[u32], community: usize) {
        self.community
            .as_mut()
            .expect("community counts not enabled")
            .add_doc(author, mentions, community);
    }

    pub fn remove_doc_community(
        &mut self,
        author: usize,
        mentions: &[u32],
        community: usize,
    ) -> Result<()> {
        self.community
            .as_mut()
            .expect("community counts not enabled")
            .remove_doc(author, mentions, community)
    }

    /// Row-sum and conservation check, run once per sweep. Per-update
    /// violations surface immediately through the checked decrements.
    pub fn validate(&self, expected_tokens: u64) -> Result<()> {
        let mut by_topic = vec![0u64; self.topics];
        for w in 0..self.words {
            for (k, &v) in self.word_topic_row(w).iter().enumerate() {
                by_topic[k] += v as u64;
            }
        }
        for k in 0..self.topics {
            if by_topic[k] != self.topic_total[k] as u64 {
                return Err(Error::Consistency(format!(
                    "topic {k} column sums to {}, recorded {}",
                    by_topic[k], self.topic_total[k]
                )));
            }
        }
        let token_sum: u64 = self.topic_total.iter().map(|&v| v as u64).sum();
        if token_sum != expected_tokens {
            return Err(Error::Consistency(format!(
                "topic totals sum to {token_sum}, corpus has {expected_tokens} tokens"
            )));
        }
        let mut actor_sum = 0u64;
        for a in 0..self.actors {
            let sum: u64 = self.actor_topic_row(a).iter().map(|&v| v as u64).sum();
            if sum != self.actor_total[a] as u64 {
                return Err(Error::Consistency(format!(
                    "actor {a} topic row sums to {sum}, recorded {}",
                    self.actor_total[a]
                )));
            }
            actor_sum += sum;
        }
        if actor_sum != expected_tokens {
            return Err(Error::Consistency(format!(
                "actor totals sum to {actor_sum}, corpus has {expected_tokens} tokens"
            )));
        }
        if let Some(cc) = &self.community {
            cc.validate()?;
        }
        Ok(())
    }

    /// K×W nested rows for snapshots.
    pub fn topic_word_rows(&self) -> Vec<Vec<u32>> {
        (0..self.topics)
            .map(|k| (0..self.words).map(|w| self.topic_word(k, w)).collect())
            .collect()
    }

    /// A×K nested rows for snapshots.
    pub fn actor_topic_rows(&self) -> Vec<Vec<u32>> {
        (0..self.actors)
            .map(|a| self.actor_topic_row(a).to_vec())
            .collect()
    }

    pub(crate) fn from_parts(
        topic_word_rows: &[Vec<u32>],
        actor_topic_rows: &[Vec<u32>],
        community: Option<(&[Vec<u32>], &[Vec<u32>])>,
    ) -> Result<Self> {
        let topics = topic_word_rows.len();
        if topics == 0 {
            return Err(Error::Snapshot("empty topic-word matrix".into()));
        }
        let words = topic_word_rows[0].len();
        let actors = actor_topic_rows.len();
        let mut counts = CountMatrices::new(topics, words, actors);
        for (k, row) in topic_word_rows.iter().enumerate() {
            if row.len() != words {
                return Err(Error::Snapshot("ragged topic-word matrix".into()));
            }
            for (w, &v) in row.iter().enumerate() {
                counts.word_topic[w * topics + k] = v;
                counts.topic_total[k] += v;
            }
        }
        for (a, row) in actor_topic_rows.iter().enumerate() {
            if row.len() != topics {
                return Err(Error::Snapshot("ragged actor-topic matrix".into()));
            }
            for (k, &v) in row.iter().enumerate() {
                counts.actor_topic[a * topics + k] = v;
                counts.actor_total[a] += v;
            }
        }
        if let Some((user_comm, comm_mention)) = community {
            let users = user_comm.len();
            let communities = comm_mention.len();
            if communities == 0 {
                return Err(Error::Snapshot("empty community-mention matrix".into()));
            }
            let mut cc = CommunityCounts::new(communities, users);
            for (u, row) in user_comm.iter().enumerate() {
                if row.len() != communities {
                    return Err(Error::Snapshot("ragged user-community matrix".into()));
                }
                for (c, &v) in row.iter().enumerate() {
                    cc.user_community[u * communities + c] = v;
                    cc.user_docs[u] += v;
                }
            }
            for (c, row) in comm_mention.iter().enumerate() {
                if row.len() != users {
                    return Err(Error::Snapshot("ragged community-mention matrix".into()));
                }
                for (x, &v) in row.iter().enumerate() {
                    cc.community_mention[c * users + x] = v;
                    cc.community_total[c] += v;
                }
            }
            counts.community = Some(cc);
        }
        Ok(counts)
    }

    pub fn user_community_rows(&self) -> Option<Vec<Vec<u32>>> {
        self.community.as_ref().map(|cc| {
            (0..cc.users)
                .map(|u| cc.user_community_row(u).to_vec())
                .collect()
        })
    }

    pub fn community_mention_rows(&self) -> Option<Vec<Vec<u32>>> {
        self.community.as_ref().map(|cc| {
            (0..cc.communities)
                .map(|c| cc.community_mention[c * cc.users..(c + 1) * cc.users].to_vec())
                .collect()
        })
    }
}
