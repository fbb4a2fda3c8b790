//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Documents are bags of phrases (n-grams). Each token's topic is resampled
//! from
//!
//! ```text
//! p(z = k) ∝ (n_dk + α) · (n_kw + β) / (n_k + V·β)
//! ```
//!
//! with the token's own assignment removed from the counts. One random
//! stream drives initialisation and every sweep, visiting documents in order
//! and tokens in order, so a fixed seed reproduces the chain exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{build_vocabulary, ngrams, remove_stopwords, tokenize, Stoplist, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub min_df: usize,
    pub max_df_ratio: f64,
    /// Drop stop words before forming n-grams.
    pub use_stoplist: bool,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 5,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
            n_min: 2,
            n_max: 3,
            min_df: 5,
            max_df_ratio: 1.0,
            use_stoplist: true,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::InvalidArgument(
                "LDA needs at least one topic".into(),
            ));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidArgument(
                "LDA needs at least one iteration".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite())
            || !(self.beta > 0.0 && self.beta.is_finite())
        {
            return Err(Error::InvalidArgument(
                "LDA priors must be positive and finite".into(),
            ));
        }
        ngrams(&Default::default(), self.n_min, self.n_max)?;
        Ok(())
    }

    /// Turn raw texts into phrase bags: tokenize, optionally drop stop words,
    /// then take every n-gram in the configured range.
    pub fn analyze<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<Vec<String>>> {
        let stop = self.use_stoplist.then(Stoplist::english);
        texts
            .iter()
            .map(|t| {
                let mut tokens = tokenize(t.as_ref());
                if let Some(stop) = &stop {
                    tokens = remove_stopwords(&tokens, stop);
                }
                ngrams(&tokens, self.n_min, self.n_max)
            })
            .collect()
    }
}

/// Sampler state: assignments plus the three count tables.
///
/// `topic_term` is stored term-major (`w * K + k`) so the per-token loop over
/// topics reads contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    config: LdaConfig,
    vocabulary: Vocabulary,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_term: Vec<u32>,
    topic_totals: Vec<u32>,
}

/// The top terms of one topic, most probable first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    #[serde(rename = "id")]
    pub topic: usize,
    pub terms: Vec<(String, f64)>,
}

/// Serializable record of a fitted model's configuration and top terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDump {
    #[serde(rename = "K")]
    pub topics_count: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub topics: Vec<TopicSummary>,
}

impl LdaModel {
    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_topics(&self) -> usize {
        self.config.topics
    }

    pub fn num_documents(&self) -> usize {
        self.docs.len()
    }

    /// Term ids of document `d` after vocabulary filtering.
    pub fn document(&self, d: usize) -> &[usize] {
        &self.docs[d]
    }

    pub fn assignments(&self, d: usize) -> &[usize] {
        &self.assignments[d]
    }

    pub fn doc_topic_count(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.config.topics + k]
    }

    pub fn topic_term_count(&self, k: usize, w: usize) -> u32 {
        self.topic_term[w * self.config.topics + k]
    }

    pub fn topic_total(&self, k: usize) -> u32 {
        self.topic_totals[k]
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// `φ_kw = (n_kw + β) / (n_k + V·β)`.
    pub fn phi(&self, k: usize, w: usize) -> f64 {
        let v = self.vocabulary.len() as f64;
        (self.topic_term_count(k, w) as f64 + self.config.beta)
            / (self.topic_totals[k] as f64 + v * self.config.beta)
    }

    /// Topic ids ordered by token count, largest first; ties by id.
    pub fn topics_by_size(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.config.topics).collect();
        ids.sort_by(|&a, &b| {
            self.topic_totals[b]
                .cmp(&self.topic_totals[a])
                .then(a.cmp(&b))
        });
        ids
    }

    /// The `t` most probable terms of `topic`, ties broken lexicographically.
    pub fn topic_terms(&self, topic: usize, t: usize) -> Result<TopicSummary> {
        if topic >= self.config.topics {
            return Err(Error::TopicOutOfRange {
                topic,
                topics: self.config.topics,
            });
        }
        let mut scored: Vec<(usize, f64)> = (0..self.vocabulary.len())
            .map(|w| (w, self.phi(topic, w)))
            .collect();
        // vocabulary ids are in lexicographic order, so the id breaks ties
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(TopicSummary {
            topic,
            terms: scored
                .into_iter()
                .take(t)
                .map(|(w, p)| (self.vocabulary.terms()[w].clone(), p))
                .collect(),
        })
    }

    /// Top `t` terms of every topic in id order, with the config.
    pub fn dump(&self, t: usize) -> TopicDump {
        TopicDump {
            topics_count: self.config.topics,
            alpha: self.config.alpha,
            beta: self.config.beta,
            iterations: self.config.iterations,
            seed: self.config.seed,
            topics: (0..self.config.topics)
                .map(|k| self.topic_terms(k, t).expect("topic id in range"))
                .collect(),
        }
    }

    /// Recount every table from the assignments and compare.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let k_count = self.config.topics;
        let v = self.vocabulary.len();
        let mut doc_topic = vec![0u32; self.docs.len() * k_count];
        let mut topic_term = vec![0u32; v * k_count];
        let mut totals = vec![0u32; k_count];
        for (d, (doc, z)) in self.docs.iter().zip(&self.assignments).enumerate() {
            if doc.len() != z.len() {
                return Err(format!(
                    "document {d}: {} tokens, {} assignments",
                    doc.len(),
                    z.len()
                ));
            }
            for (&w, &k) in doc.iter().zip(z) {
                if k >= k_count {
                    return Err(format!("document {d}: topic {k} out of range"));
                }
                doc_topic[d * k_count + k] += 1;
                topic_term[w * k_count + k] += 1;
                totals[k] += 1;
            }
        }
        if doc_topic != self.doc_topic {
            return Err("document-topic counts disagree with assignments".into());
        }
        if topic_term != self.topic_term {
            return Err("topic-term counts disagree with assignments".into());
        }
        if totals != self.topic_totals {
            return Err("topic totals disagree with assignments".into());
        }
        for (d, doc) in self.docs.iter().enumerate() {
            let row: u32 = self.doc_topic[d * k_count..(d + 1) * k_count].iter().sum();
            if row as usize != doc.len() {
                return Err(format!(
                    "document {d}: topic counts sum to {row}, length {}",
                    doc.len()
                ));
            }
        }
        for k in 0..k_count {
            let col: u32 = (0..v).map(|w| self.topic_term[w * k_count + k]).sum();
            if col != self.topic_totals[k] {
                return Err(format!(
                    "topic {k}: term counts sum to {col}, total {}",
                    self.topic_totals[k]
                ));
            }
        }
        if self.topic_totals.iter().map(|&n| n as usize).sum::<usize>() != self.total_tokens() {
            return Err("topic totals do not sum to the corpus token count".into());
        }
        Ok(())
    }
}

/// A running Gibbs chain. Call [`LdaSampler::sweep`] to advance it.
#[derive(Debug, Clone)]
pub struct LdaSampler {
    state: LdaModel,
    rng: ChaCha8Rng,
    sweeps: usize,
    weights: Vec<f64>,
}

impl LdaSampler {
    /// Build the vocabulary, map documents to term ids and draw initial
    /// topics uniformly at random.
    pub fn new<D, S>(documents: &[D], config: &LdaConfig) -> Result<Self>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        config.validate()?;
        let vocabulary = build_vocabulary(documents, config.min_df, config.max_df_ratio)?;
        let docs: Vec<Vec<usize>> = documents
            .iter()
            .map(|d| {
                d.as_ref()
                    .iter()
                    .filter_map(|p| vocabulary.get(p.as_ref()))
                    .collect()
            })
            .collect();
        if docs.iter().all(Vec::is_empty) {
            return Err(Error::EmptyInput(
                "every document is empty after vocabulary filtering".into(),
            ));
        }
        let k_count = config.topics;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut doc_topic = vec![0u32; docs.len() * k_count];
        let mut topic_term = vec![0u32; vocabulary.len() * k_count];
        let mut topic_totals = vec![0u32; k_count];
        let assignments: Vec<Vec<usize>> = docs
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.iter()
                    .map(|&w| {
                        let k = rng.gen_range(0..k_count);
                        doc_topic[d * k_count + k] += 1;
                        topic_term[w * k_count + k] += 1;
                        topic_totals[k] += 1;
                        k
                    })
                    .collect()
            })
            .collect();
        Ok(LdaSampler {
            state: LdaModel {
                config: config.clone(),
                vocabulary,
                docs,
                assignments,
                doc_topic,
                topic_term,
                topic_totals,
            },
            rng,
            sweeps: 0,
            weights: vec![0.0; k_count],
        })
    }

    /// Resample every token once.
    pub fn sweep(&mut self) {
        let s = &mut self.state;
        let k_count = s.config.topics;
        let alpha = s.config.alpha;
        let beta = s.config.beta;
        let v_beta = s.vocabulary.len() as f64 * beta;
        for d in 0..s.docs.len() {
            let dt = &mut s.doc_topic[d * k_count..(d + 1) * k_count];
            for (i, &w) in s.docs[d].iter().enumerate() {
                let old = s.assignments[d][i];
                let tw = &mut s.topic_term[w * k_count..(w + 1) * k_count];
                dt[old] -= 1;
                tw[old] -= 1;
                s.topic_totals[old] -= 1;

                let mut total = 0.0;
                for k in 0..k_count {
                    total += (dt[k] as f64 + alpha) * (tw[k] as f64 + beta)
                        / (s.topic_totals[k] as f64 + v_beta);
                    self.weights[k] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self
                    .weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(k_count - 1);

                dt[new] += 1;
                tw[new] += 1;
                s.topic_totals[new] += 1;
                s.assignments[d][i] = new;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn model(&self) -> &LdaModel {
        &self.state
    }

    pub fn into_model(self) -> LdaModel {
        self.state
    }
}

/// Run `config.iterations` sweeps and return the final state.
pub fn fit_lda<D, S>(documents: &[D], config: &LdaConfig) -> Result<LdaModel>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut sampler = LdaSampler::new(documents, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}
