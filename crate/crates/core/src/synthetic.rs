//! Planted-signal corpora for end-to-end testing.
//!
//! The generator writes articles, their comments and an annotated training
//! set where the ground truth is known by construction:
//!
//! * a marker bigram appears in the bodies of provoking articles and nowhere
//!   else;
//! * comments on provoking articles contain an insult token far more often
//!   than comments elsewhere;
//! * a subtext phrase appears in comments on tagged articles but never in an
//!   article body;
//! * annotated comments containing an insult are rated uncivil on all three
//!   aspects, up to a small label-noise rate.
//!
//! Filler text is drawn from pseudo-words built from fixed syllables, so it
//! never collides with stop words or planted terms.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedComment, Article, Comment};
use crate::error::{Error, Result};

const SYLLABLES: [&str; 16] = [
    "bal", "dor", "fen", "gim", "hus", "kel", "mar", "nop", "pil", "ros", "sut", "tev", "vak",
    "wen", "zol", "quin",
];

const INSULTS: [&str; 6] = ["idiot", "moron", "scum", "traitor", "loser", "clown"];

/// Phrases that tagged article bodies discuss openly.
const CONTENT_PHRASES: [&str; 8] = [
    "border patrol",
    "white house",
    "asylum seekers",
    "immigration reform",
    "law enforcement",
    "federal government",
    "refugee program",
    "executive order",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_articles: usize,
    pub comments_per_article: usize,
    pub n_annotated: usize,
    pub sources: Vec<String>,
    pub provoking_fraction: f64,
    /// Bigram planted in provoking article bodies.
    pub marker: String,
    pub uncivil_rate_provoking: f64,
    pub uncivil_rate_other: f64,
    pub tag: String,
    pub tagged_fraction: f64,
    /// Written into comments on tagged articles, never into bodies. Stop
    /// words inside it are fine; they vanish before phrase extraction.
    pub subtext_phrase: String,
    pub subtext_rate: f64,
    pub label_noise: f64,
    pub body_words: usize,
    pub comment_words: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_articles: 400,
            comments_per_article: 20,
            n_annotated: 1500,
            sources: vec!["synthetic-a".into(), "synthetic-b".into()],
            provoking_fraction: 0.5,
            marker: "caravan invasion".into(),
            uncivil_rate_provoking: 0.6,
            uncivil_rate_other: 0.1,
            tag: "Immigration".into(),
            tagged_fraction: 0.5,
            subtext_phrase: "build the wall".into(),
            subtext_rate: 0.3,
            label_noise: 0.03,
            body_words: 60,
            comment_words: 12,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let rates = [
            ("provoking_fraction", self.provoking_fraction),
            ("uncivil_rate_provoking", self.uncivil_rate_provoking),
            ("uncivil_rate_other", self.uncivil_rate_other),
            ("tagged_fraction", self.tagged_fraction),
            ("subtext_rate", self.subtext_rate),
            ("label_noise", self.label_noise),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {r} outside [0, 1]"
                )));
            }
        }
        if self.sources.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one source is required".into(),
            ));
        }
        if self.marker.split_whitespace().count() != 2 {
            return Err(Error::InvalidArgument(
                "marker must be exactly two words".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub articles: Vec<Article>,
    pub comments: Vec<Comment>,
    pub annotated: Vec<AnnotatedComment>,
    /// Ground truth: whether each article (same order) was generated as provoking.
    pub provoking: Vec<bool>,
}

fn filler_vocabulary() -> Vec<String> {
    let mut words = Vec::with_capacity(SYLLABLES.len() * SYLLABLES.len());
    for a in SYLLABLES {
        for b in SYLLABLES {
            if a != b {
                words.push(format!("{a}{b}"));
            }
        }
    }
    words
}

struct Generator {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
}

impl Generator {
    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| self.vocab[self.rng.gen_range(0..self.vocab.len())].clone())
            .collect()
    }

    fn insert_at_random(&mut self, words: &mut Vec<String>, phrase: &str) {
        let pos = self.rng.gen_range(0..=words.len());
        words.splice(pos..pos, phrase.split_whitespace().map(str::to_owned));
    }

    fn insult(&mut self) -> &'static str {
        INSULTS.choose(&mut self.rng).expect("non-empty")
    }

    fn ratings(&mut self, uncivil: bool) -> Vec<u8> {
        (0..3)
            .map(|_| {
                if uncivil {
                    self.rng.gen_range(1..=2)
                } else {
                    self.rng.gen_range(3..=5)
                }
            })
            .collect()
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        vocab: filler_vocabulary(),
    };

    // Exactly round(fraction * n) provoking articles per source, so the
    // per-source median split can recover the planted classes.
    let mut provoking = vec![false; config.n_articles];
    for s in 0..config.sources.len() {
        let mut members: Vec<usize> = (s..config.n_articles)
            .step_by(config.sources.len())
            .collect();
        let k = (config.provoking_fraction * members.len() as f64).round() as usize;
        members.shuffle(&mut g.rng);
        for &i in &members[..k] {
            provoking[i] = true;
        }
    }

    let mut articles = Vec::with_capacity(config.n_articles);
    let mut comments = Vec::new();
    for (i, &is_provoking) in provoking.iter().enumerate() {
        let source = config.sources[i % config.sources.len()].clone();
        let tagged = g.rng.gen_bool(config.tagged_fraction);

        let mut body = g.words(config.body_words);
        let mut topic_phrases = Vec::new();
        if tagged {
            let chosen: Vec<&str> = CONTENT_PHRASES
                .choose_multiple(&mut g.rng, 3)
                .copied()
                .collect();
            for p in &chosen {
                g.insert_at_random(&mut body, p);
                g.insert_at_random(&mut body, p);
            }
            topic_phrases = chosen;
        }
        if is_provoking {
            let repeats = g.rng.gen_range(1..=2);
            for _ in 0..repeats {
                g.insert_at_random(&mut body, &config.marker);
            }
        }
        let mut tags: BTreeSet<String> = BTreeSet::new();
        tags.insert("Politics".into());
        if tagged {
            tags.insert(config.tag.clone());
        }
        let article_id = format!("art-{i:05}");
        articles.push(Article {
            id: article_id.clone(),
            source,
            title: format!("{} {}", g.words(1)[0], g.words(1)[0]),
            body: body.join(" "),
            tags,
            date: format!("2016-{:02}-{:02}", 1 + i % 12, 1 + i % 28),
        });

        let uncivil_rate = if is_provoking {
            config.uncivil_rate_provoking
        } else {
            config.uncivil_rate_other
        };
        for j in 0..config.comments_per_article {
            let mut words = g.words(config.comment_words);
            if g.rng.gen_bool(uncivil_rate) {
                let insult = g.insult();
                g.insert_at_random(&mut words, insult);
            }
            if tagged {
                if !topic_phrases.is_empty() && g.rng.gen_bool(0.5) {
                    let p = topic_phrases[g.rng.gen_range(0..topic_phrases.len())];
                    g.insert_at_random(&mut words, p);
                }
                if g.rng.gen_bool(config.subtext_rate) {
                    g.insert_at_random(&mut words, &config.subtext_phrase);
                }
            }
            comments.push(Comment {
                id: format!("{article_id}-c{j:03}"),
                article_id: article_id.clone(),
                text: words.join(" "),
            });
        }
    }

    let mut annotated = Vec::with_capacity(config.n_annotated);
    for i in 0..config.n_annotated {
        let uncivil = g.rng.gen_bool(0.4);
        let mut words = g.words(config.comment_words);
        if uncivil {
            let insult = g.insult();
            g.insert_at_random(&mut words, insult);
        }
        let noisy = |g: &mut Generator| {
            if g.rng.gen_bool(config.label_noise) {
                !uncivil
            } else {
                uncivil
            }
        };
        let tox = noisy(&mut g);
        let agg = noisy(&mut g);
        let att = noisy(&mut g);
        let toxicity_ratings = g.ratings(tox);
        let aggression_ratings = g.ratings(agg);
        annotated.push(AnnotatedComment {
            id: format!("ann-{i:05}"),
            text: words.join(" "),
            toxicity_ratings,
            aggression_ratings,
            attack_flags: vec![att, att, att && g.rng.gen_bool(0.8)],
        });
    }

    Ok(SyntheticCorpus {
        articles,
        comments,
        annotated,
        provoking,
    })
}
