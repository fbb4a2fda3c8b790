//! Two-phase subtext mining.
//!
//! Phase one fits LDA on article bodies and collects the top terms of the
//! largest topics as content phrases. Phase two fits LDA on the comments of
//! those articles with every content phrase removed from the bags, so the
//! phrases it surfaces are ones readers bring that the articles do not.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Comment};
use crate::error::{Error, Result};
use crate::lda::{fit_lda, LdaConfig, TopicDump, TopicSummary};
use crate::textproc::PhraseSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubtextConfig {
    pub lda: LdaConfig,
    /// Number of topics, largest first, whose terms are collected.
    pub top_topics: usize,
    /// Terms taken from each of those topics.
    pub top_terms: usize,
}

impl Default for SubtextConfig {
    fn default() -> Self {
        SubtextConfig {
            lda: LdaConfig::default(),
            top_topics: 5,
            top_terms: 5,
        }
    }
}

/// Phrases from the top topics, plus the summaries they came from and the
/// full topic dump of the fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicPhrases {
    pub phrases: PhraseSet,
    pub top_topics: Vec<TopicSummary>,
    pub dump: TopicDump,
}

/// Fit LDA on `documents` with `exclude` removed from every bag and collect
/// the top terms of the largest topics.
pub fn extract_topic_phrases<S: AsRef<str>>(
    documents: &[S],
    config: &SubtextConfig,
    exclude: &PhraseSet,
) -> Result<TopicPhrases> {
    if documents.is_empty() {
        return Err(Error::EmptyInput(
            "no documents for topic extraction".into(),
        ));
    }
    let mut bags = config.lda.analyze(documents)?;
    for bag in &mut bags {
        bag.retain(|p| !exclude.contains(p));
    }
    if bags.iter().all(Vec::is_empty) {
        return Err(Error::EmptyInput(
            "no phrases remain after exclusion".into(),
        ));
    }
    let model = fit_lda(&bags, &config.lda)?;
    let top_topics = model
        .topics_by_size()
        .into_iter()
        .take(config.top_topics)
        .map(|k| model.topic_terms(k, config.top_terms))
        .collect::<Result<Vec<_>>>()?;
    let phrases = top_topics
        .iter()
        .flat_map(|t| t.terms.iter().map(|(p, _)| p.as_str()))
        .collect();
    Ok(TopicPhrases {
        phrases,
        top_topics,
        dump: model.dump(config.top_terms),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub top_topics: Vec<TopicSummary>,
    pub model: TopicDump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtextReport {
    pub content_phrases: PhraseSet,
    pub comment_phrases: PhraseSet,
    pub content_topics: PhaseReport,
    pub comment_topics: PhaseReport,
    pub n_articles: usize,
    pub n_comments: usize,
    pub config: SubtextConfig,
}

/// Run both phases. Only comments attached to one of `articles` are used.
/// Phase two uses the phase-one seed plus one.
pub fn mine_subtext(
    articles: &[Article],
    comments: &[Comment],
    config: &SubtextConfig,
) -> Result<SubtextReport> {
    if articles.is_empty() {
        return Err(Error::EmptyInput("no articles for subtext mining".into()));
    }
    let ids: HashSet<&str> = articles.iter().map(|a| a.id.as_str()).collect();
    let comment_texts: Vec<&str> = comments
        .iter()
        .filter(|c| ids.contains(c.article_id.as_str()))
        .map(|c| c.text.as_str())
        .collect();
    if comment_texts.is_empty() {
        return Err(Error::EmptyInput(
            "no comments attached to the selected articles".into(),
        ));
    }
    let bodies: Vec<&str> = articles.iter().map(|a| a.body.as_str()).collect();

    let content = extract_topic_phrases(&bodies, config, &PhraseSet::new())?;

    let mut phase_two = config.clone();
    phase_two.lda.seed = config.lda.seed.wrapping_add(1);
    let comment = extract_topic_phrases(&comment_texts, &phase_two, &content.phrases)?;

    Ok(SubtextReport {
        content_phrases: content.phrases,
        comment_phrases: comment.phrases,
        content_topics: PhaseReport {
            top_topics: content.top_topics,
            model: content.dump,
        },
        comment_topics: PhaseReport {
            top_topics: comment.top_topics,
            model: comment.dump,
        },
        n_articles: articles.len(),
        n_comments: comment_texts.len(),
        config: config.clone(),
    })
}

fn topic_lines(out: &mut String, topics: &[TopicSummary]) {
    for t in topics {
        let terms: Vec<String> = t
            .terms
            .iter()
            .map(|(p, w)| format!("{p} ({w:.4})"))
            .collect();
        let _ = writeln!(out, "- topic {}: {}", t.topic, terms.join(", "));
    }
}

impl SubtextReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two-column table of content and comment phrases, followed by the
    /// topics each column came from.
    pub fn to_markdown(&self) -> String {
        let join = |p: &PhraseSet| p.iter().collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "# Topic phrases\n");
        let _ = writeln!(
            out,
            "{} articles, {} comments, {} topics, seed {}\n",
            self.n_articles, self.n_comments, self.config.lda.topics, self.config.lda.seed
        );
        let _ = writeln!(out, "| Content Topic Phrases | Comment Topic Phrases |");
        let _ = writeln!(out, "|---|---|");
        let _ = writeln!(
            out,
            "| {} | {} |",
            join(&self.content_phrases),
            join(&self.comment_phrases)
        );
        let _ = writeln!(out, "\n## Article topics\n");
        topic_lines(&mut out, &self.content_topics.top_topics);
        let _ = writeln!(out, "\n## Comment topics\n");
        topic_lines(&mut out, &self.comment_topics.top_topics);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(topics: usize, terms: usize) -> SubtextConfig {
        SubtextConfig {
            lda: LdaConfig {
                topics,
                iterations: 100,
                min_df: 2,
                seed: 5,
                ..Default::default()
            },
            top_topics: topics,
            top_terms: terms,
        }
    }

    fn article(id: &str, body: &str) -> Article {
        Article {
            id: id.into(),
            source: "s".into(),
            title: String::new(),
            body: body.into(),
            tags: Default::default(),
            date: "2016-01-01".into(),
        }
    }

    fn filler(rng: &mut ChaCha8Rng, n: usize) -> String {
        const WORDS: [&str; 12] = [
            "senate", "budget", "county", "hearing", "ballot", "mayor", "ruling", "agency",
            "report", "session", "council", "statute",
        ];
        (0..n)
            .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn planted_corpus() -> (Vec<Article>, Vec<Comment>) {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut articles = Vec::new();
        let mut comments = Vec::new();
        for i in 0..30 {
            let body = format!(
                "{} border patrol {} white house {}",
                filler(&mut rng, 5),
                filler(&mut rng, 5),
                filler(&mut rng, 5)
            );
            articles.push(article(&format!("a{i}"), &body));
            for j in 0..6 {
                let mut text = filler(&mut rng, 4);
                if j % 2 == 0 {
                    text.push_str(" border patrol ");
                }
                if j % 3 == 0 {
                    text.push_str(" planted marker ");
                }
                text.push_str(&filler(&mut rng, 4));
                comments.push(Comment {
                    id: format!("c{i}-{j}"),
                    article_id: format!("a{i}"),
                    text,
                });
            }
        }
        (articles, comments)
    }

    #[test]
    fn single_topic_single_term() {
        let docs = ["alpha beta gamma", "alpha beta delta", "alpha beta"];
        let got = extract_topic_phrases(&docs, &cfg(1, 1), &PhraseSet::new()).unwrap();
        assert_eq!(got.phrases.iter().collect::<Vec<_>>(), vec!["alpha beta"]);
    }

    #[test]
    fn excluded_phrases_never_surface() {
        let docs = ["alpha beta gamma", "alpha beta delta", "alpha beta gamma"];
        let exclude: PhraseSet = ["alpha beta"].into_iter().collect();
        let got = extract_topic_phrases(&docs, &cfg(2, 5), &exclude).unwrap();
        assert!(!got.phrases.contains("alpha beta"));
        assert!(got.phrases.contains("beta gamma"));
    }

    #[test]
    fn exclusion_can_empty_the_corpus() {
        let docs = ["alpha beta", "alpha beta"];
        let exclude: PhraseSet = ["alpha beta"].into_iter().collect();
        assert!(matches!(
            extract_topic_phrases(&docs, &cfg(1, 1), &exclude),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn planted_phrase_is_comment_only() {
        let (articles, comments) = planted_corpus();
        let report = mine_subtext(&articles, &comments, &cfg(3, 5)).unwrap();
        assert!(report.content_phrases.contains("border patrol"));
        assert!(report.comment_phrases.contains("planted marker"));
        assert!(!report.content_phrases.contains("planted marker"));
        assert!(report.content_phrases.is_disjoint(&report.comment_phrases));
        assert!(report.content_phrases.len() <= 15 && report.comment_phrases.len() <= 15);
        assert_eq!(report.comment_topics.model.seed, 6);

        let again = mine_subtext(&articles, &comments, &cfg(3, 5)).unwrap();
        assert_eq!(report.to_json().unwrap(), again.to_json().unwrap());
        let md = report.to_markdown();
        assert!(md.contains("| Content Topic Phrases | Comment Topic Phrases |"));
    }

    #[test]
    fn identical_corpora_stay_disjoint() {
        let (articles, _) = planted_corpus();
        let comments: Vec<Comment> = articles
            .iter()
            .map(|a| Comment {
                id: format!("c-{}", a.id),
                article_id: a.id.clone(),
                text: a.body.clone(),
            })
            .collect();
        match mine_subtext(&articles, &comments, &cfg(3, 5)) {
            Ok(r) => assert!(r.content_phrases.is_disjoint(&r.comment_phrases)),
            Err(Error::EmptyInput(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn requires_both_collections() {
        let (articles, comments) = planted_corpus();
        assert!(mine_subtext(&[], &comments, &cfg(2, 2)).is_err());
        assert!(mine_subtext(&articles, &[], &cfg(2, 2)).is_err());
    }
}
