//! Comment incivility scoring and the provoking-article pipeline.
//!
//! Three aspect classifiers (toxicity, aggression, personal attack) share one
//! TF-IDF vectorizer. A comment's incivility score is the largest of the three
//! aspect probabilities; an article's weight is the mean score over its
//! comments. Within a source, articles weighted strictly above the source
//! median are labelled as provoking uncivil speech, and a bigram TF-IDF
//! classifier learns to predict that label from the article body alone.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{split_indices, AnnotatedComment, Article, Corpus};
use crate::error::{Error, Result};
use crate::features::{fit_tfidf, TfidfConfig, TfidfModel};
use crate::linmodel::{evaluate, train_logistic, EvalReport, LogisticModel, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Toxicity,
    Aggression,
    Attack,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Toxicity, Aspect::Aggression, Aspect::Attack];

    pub fn name(self) -> &'static str {
        match self {
            Aspect::Toxicity => "toxicity",
            Aspect::Aggression => "aggression",
            Aspect::Attack => "attack",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How per-annotator labels collapse to one binary label.
///
/// For the 1..=5 scales an annotator votes uncivil when their rating lies on
/// the uncivil side of `neutral_rating`; for attack a raised flag is a vote.
/// The comment is positive when the fraction of votes exceeds
/// `rule_threshold` strictly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinarizationRule {
    pub rule_threshold: f64,
    pub neutral_rating: u8,
    /// Ratings below neutral are the uncivil direction when true, above when false.
    pub uncivil_below_neutral: bool,
}

impl Default for BinarizationRule {
    fn default() -> Self {
        BinarizationRule {
            rule_threshold: 0.5,
            neutral_rating: 3,
            uncivil_below_neutral: true,
        }
    }
}

pub fn binarize_aspect(
    ac: &AnnotatedComment,
    aspect: Aspect,
    rule: &BinarizationRule,
) -> Result<bool> {
    let (votes, total) = match aspect {
        Aspect::Toxicity | Aspect::Aggression => {
            let ratings = if aspect == Aspect::Toxicity {
                &ac.toxicity_ratings
            } else {
                &ac.aggression_ratings
            };
            let votes = ratings
                .iter()
                .filter(|&&r| {
                    if rule.uncivil_below_neutral {
                        r < rule.neutral_rating
                    } else {
                        r > rule.neutral_rating
                    }
                })
                .count();
            (votes, ratings.len())
        }
        Aspect::Attack => (
            ac.attack_flags.iter().filter(|&&f| f).count(),
            ac.attack_flags.len(),
        ),
    };
    if total == 0 {
        return Err(Error::NoAnnotators {
            id: ac.id.clone(),
            field: aspect.name(),
        });
    }
    Ok(votes as f64 / total as f64 > rule.rule_threshold)
}

/// The shared vectorizer and the three aspect models.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectClassifiers {
    tfidf: TfidfModel,
    toxicity: LogisticModel,
    aggression: LogisticModel,
    attack: LogisticModel,
}

/// Per-aspect probabilities and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncivilityScore {
    pub value: f64,
    pub toxicity: f64,
    pub aggression: f64,
    pub attack: f64,
}

impl IncivilityScore {
    pub fn from_components(toxicity: f64, aggression: f64, attack: f64) -> Self {
        IncivilityScore {
            value: toxicity.max(aggression).max(attack),
            toxicity,
            aggression,
            attack,
        }
    }
}

pub const TFIDF_FILE: &str = "aspect_tfidf.json";

fn model_file(aspect: Aspect) -> String {
    format!("{}.json", aspect.name())
}

impl AspectClassifiers {
    pub fn new(
        tfidf: TfidfModel,
        toxicity: LogisticModel,
        aggression: LogisticModel,
        attack: LogisticModel,
    ) -> Result<Self> {
        for m in [&toxicity, &aggression, &attack] {
            if m.dimension() != tfidf.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: tfidf.dimension(),
                    found: m.dimension(),
                });
            }
        }
        Ok(AspectClassifiers {
            tfidf,
            toxicity,
            aggression,
            attack,
        })
    }

    pub fn tfidf(&self) -> &TfidfModel {
        &self.tfidf
    }

    pub fn model(&self, aspect: Aspect) -> &LogisticModel {
        match aspect {
            Aspect::Toxicity => &self.toxicity,
            Aspect::Aggression => &self.aggression,
            Aspect::Attack => &self.attack,
        }
    }

    /// Write the vectorizer and the three models into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.tfidf.save(dir.join(TFIDF_FILE))?;
        for aspect in Aspect::ALL {
            self.model(aspect).save(dir.join(model_file(aspect)))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let tfidf = TfidfModel::load(dir.join(TFIDF_FILE))?;
        let [t, g, a] = Aspect::ALL.map(|aspect| LogisticModel::load(dir.join(model_file(aspect))));
        Self::new(tfidf, t?, g?, a?)
    }
}

pub fn score_comment(classifiers: &AspectClassifiers, text: &str) -> IncivilityScore {
    let x = classifiers.tfidf.transform(text);
    let [t, g, a] = Aspect::ALL.map(|aspect| {
        classifiers
            .model(aspect)
            .predict_proba(&x)
            .expect("dimensions checked at construction")
    });
    IncivilityScore::from_components(t, g, a)
}

/// Held-out metrics for each aspect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectReports {
    pub toxicity: EvalReport,
    pub aggression: EvalReport,
    pub attack: EvalReport,
}

impl AspectReports {
    pub fn get(&self, aspect: Aspect) -> &EvalReport {
        match aspect {
            Aspect::Toxicity => &self.toxicity,
            Aspect::Aggression => &self.aggression,
            Aspect::Attack => &self.attack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

fn binary_labels(
    annotated: &[AnnotatedComment],
    aspect: Aspect,
    rule: &BinarizationRule,
) -> Result<Vec<bool>> {
    annotated
        .iter()
        .map(|ac| binarize_aspect(ac, aspect, rule))
        .collect()
}

fn require_both(labels: &[bool], what: &str) -> Result<()> {
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::SingleClass(what.to_owned()));
    }
    Ok(())
}

fn pick<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

/// Train the three aspect classifiers on one shared split.
///
/// The split is stratified on whether any aspect is positive. The TF-IDF
/// model is fitted on training texts only.
pub fn train_aspect_classifiers(
    annotated: &[AnnotatedComment],
    tfidf_config: &TfidfConfig,
    train_config: &TrainConfig,
    split: &SplitConfig,
    rule: &BinarizationRule,
) -> Result<(AspectClassifiers, AspectReports)> {
    let labels: Vec<Vec<bool>> = Aspect::ALL
        .iter()
        .map(|&a| binary_labels(annotated, a, rule))
        .collect::<Result<_>>()?;
    for (aspect, l) in Aspect::ALL.iter().zip(&labels) {
        require_both(l, &format!("aspect {aspect}"))?;
    }
    let any_positive: Vec<bool> = (0..annotated.len())
        .map(|i| labels.iter().any(|l| l[i]))
        .collect();
    let (train_idx, test_idx) = split_indices(
        annotated.len(),
        split.test_fraction,
        split.seed,
        Some(&any_positive),
    )?;
    let texts: Vec<&str> = annotated.iter().map(|a| a.text.as_str()).collect();
    let tfidf = fit_tfidf(&pick(&texts, &train_idx), tfidf_config)?;
    let x_train = tfidf.transform_all(&pick(&texts, &train_idx));
    let x_test = tfidf.transform_all(&pick(&texts, &test_idx));

    let mut models = Vec::with_capacity(3);
    let mut reports = Vec::with_capacity(3);
    for (aspect, l) in Aspect::ALL.iter().zip(&labels) {
        let y_train = pick(l, &train_idx);
        let y_test = pick(l, &test_idx);
        require_both(&y_train, &format!("aspect {aspect} (training split)"))?;
        require_both(&y_test, &format!("aspect {aspect} (test split)"))?;
        let model = train_logistic(&x_train, &y_train, train_config)?;
        reports.push(evaluate(&model, &x_test, &y_test, 0.5)?);
        models.push(model);
    }
    let [t, g, a]: [LogisticModel; 3] = models.try_into().expect("three aspects");
    let [rt, rg, ra]: [EvalReport; 3] = reports.try_into().expect("three aspects");
    Ok((
        AspectClassifiers::new(tfidf, t, g, a)?,
        AspectReports {
            toxicity: rt,
            aggression: rg,
            attack: ra,
        },
    ))
}

/// Evaluate fitted aspect classifiers on every comment of `annotated`.
pub fn evaluate_aspects(
    classifiers: &AspectClassifiers,
    annotated: &[AnnotatedComment],
    rule: &BinarizationRule,
) -> Result<AspectReports> {
    let xs: Vec<_> = annotated
        .iter()
        .map(|a| classifiers.tfidf.transform(&a.text))
        .collect();
    let [t, g, a] = Aspect::ALL.map(|aspect| {
        let y = binary_labels(annotated, aspect, rule)?;
        evaluate(classifiers.model(aspect), &xs, &y, 0.5)
    });
    Ok(AspectReports {
        toxicity: t?,
        aggression: g?,
        attack: a?,
    })
}

/// Mean incivility of an article's comments, with an optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleIncivility {
    pub article_id: String,
    pub source: String,
    pub weight: f64,
    pub n_comments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

/// Article weight from already-computed comment scores.
///
/// The mean is clamped into `[min, max]` of the scores so that rounding can
/// never push it outside the range of its inputs.
pub fn weight_from_scores(
    article_id: &str,
    source: &str,
    scores: &[f64],
) -> Result<ArticleIncivility> {
    if scores.is_empty() {
        return Err(Error::EmptyInput(format!(
            "article {article_id} has no comments"
        )));
    }
    // summing in sorted order makes the result independent of comment order
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(ArticleIncivility {
        article_id: article_id.to_owned(),
        source: source.to_owned(),
        weight: mean.clamp(min, max),
        n_comments: scores.len(),
        label: None,
    })
}

pub fn article_weight<S: AsRef<str>>(
    classifiers: &AspectClassifiers,
    article: &Article,
    comment_texts: &[S],
) -> Result<ArticleIncivility> {
    let scores: Vec<f64> = comment_texts
        .iter()
        .map(|t| score_comment(classifiers, t.as_ref()).value)
        .collect();
    weight_from_scores(&article.id, &article.source, &scores)
}

/// Weights for every article that has comments, plus the number of articles
/// skipped for having none.
pub fn corpus_weights(
    classifiers: &AspectClassifiers,
    corpus: &Corpus,
) -> Result<(Vec<ArticleIncivility>, usize)> {
    let mut out = Vec::new();
    let mut skipped = 0;
    for article in corpus.articles() {
        let texts: Vec<&str> = corpus
            .comments_for(&article.id)
            .into_iter()
            .map(|c| c.text.as_str())
            .collect();
        if texts.is_empty() {
            skipped += 1;
            continue;
        }
        out.push(article_weight(classifiers, article, &texts)?);
    }
    Ok((out, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceThreshold {
    pub source: String,
    pub median_weight: f64,
    pub n_articles: usize,
}

/// Median article weight for one source. An even count averages the two
/// middle values.
pub fn source_median(weights: &[ArticleIncivility]) -> Result<SourceThreshold> {
    let first = weights
        .first()
        .ok_or_else(|| Error::EmptyInput("no article weights for median".into()))?;
    if let Some(other) = weights.iter().find(|w| w.source != first.source) {
        return Err(Error::SourceMismatch {
            expected: first.source.clone(),
            found: other.source.clone(),
            article_id: other.article_id.clone(),
        });
    }
    let mut values: Vec<f64> = weights.iter().map(|w| w.weight).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    Ok(SourceThreshold {
        source: first.source.clone(),
        median_weight: median,
        n_articles: n,
    })
}

/// Label each article true iff its weight is strictly above the median.
pub fn label_articles(
    weights: &[ArticleIncivility],
    threshold: &SourceThreshold,
) -> Result<Vec<ArticleIncivility>> {
    weights
        .iter()
        .map(|w| {
            if w.source != threshold.source {
                return Err(Error::SourceMismatch {
                    expected: threshold.source.clone(),
                    found: w.source.clone(),
                    article_id: w.article_id.clone(),
                });
            }
            Ok(ArticleIncivility {
                label: Some(w.weight > threshold.median_weight),
                ..w.clone()
            })
        })
        .collect()
}

/// Body vectorizer plus classifier predicting whether an article provokes
/// above-median incivility.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvokingPipeline {
    pub tfidf: TfidfModel,
    pub model: LogisticModel,
}

pub const PROVOKING_TFIDF_FILE: &str = "provoking_tfidf.json";
pub const PROVOKING_MODEL_FILE: &str = "provoking_model.json";

impl ProvokingPipeline {
    pub fn new(tfidf: TfidfModel, model: LogisticModel) -> Result<Self> {
        if tfidf.dimension() != model.dimension() {
            return Err(Error::DimensionMismatch {
                expected: tfidf.dimension(),
                found: model.dimension(),
            });
        }
        Ok(ProvokingPipeline { tfidf, model })
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        self.tfidf.save(dir.join(PROVOKING_TFIDF_FILE))?;
        self.model.save(dir.join(PROVOKING_MODEL_FILE))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        Self::new(
            TfidfModel::load(dir.join(PROVOKING_TFIDF_FILE))?,
            LogisticModel::load(dir.join(PROVOKING_MODEL_FILE))?,
        )
    }
}

/// Train the provoking-article classifier on article bodies.
pub fn train_provoking_classifier<S: AsRef<str>>(
    bodies: &[S],
    labels: &[bool],
    tfidf_config: &TfidfConfig,
    train_config: &TrainConfig,
    split: &SplitConfig,
) -> Result<(ProvokingPipeline, EvalReport)> {
    if bodies.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: bodies.len(),
            found: labels.len(),
        });
    }
    require_both(labels, "article labels")?;
    let (train_idx, test_idx) =
        split_indices(bodies.len(), split.test_fraction, split.seed, Some(labels))?;
    let texts: Vec<&str> = bodies.iter().map(AsRef::as_ref).collect();
    let train_texts = pick(&texts, &train_idx);
    let tfidf = fit_tfidf(&train_texts, tfidf_config)?;
    let y_train = pick(labels, &train_idx);
    let y_test = pick(labels, &test_idx);
    require_both(&y_test, "article labels (test split)")?;
    let model = train_logistic(&tfidf.transform_all(&train_texts), &y_train, train_config)?;
    let report = evaluate(
        &model,
        &tfidf.transform_all(&pick(&texts, &test_idx)),
        &y_test,
        0.5,
    )?;
    Ok((ProvokingPipeline::new(tfidf, model)?, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProvokingPrediction {
    pub probability: f64,
    pub label: bool,
}

pub fn predict_provoking(pipeline: &ProvokingPipeline, body: &str) -> ProvokingPrediction {
    let x = pipeline.tfidf.transform(body);
    let probability = pipeline
        .model
        .predict_proba(&x)
        .expect("dimensions checked at construction");
    ProvokingPrediction {
        probability,
        label: probability > 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmodel::sigmoid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn annotated(id: usize, text: &str, tox: &[u8], agg: &[u8], att: &[bool]) -> AnnotatedComment {
        AnnotatedComment {
            id: id.to_string(),
            text: text.into(),
            toxicity_ratings: tox.to_vec(),
            aggression_ratings: agg.to_vec(),
            attack_flags: att.to_vec(),
        }
    }

    fn weight(id: &str, w: f64) -> ArticleIncivility {
        ArticleIncivility {
            article_id: id.into(),
            source: "politico".into(),
            weight: w,
            n_comments: 1,
            label: None,
        }
    }

    #[test]
    fn binarize_examples() {
        let rule = BinarizationRule::default();
        let ac = annotated(1, "x", &[1, 2, 4], &[3, 3], &[true, false]);
        assert!(binarize_aspect(&ac, Aspect::Toxicity, &rule).unwrap());
        assert!(!binarize_aspect(&ac, Aspect::Aggression, &rule).unwrap());
        assert!(!binarize_aspect(&ac, Aspect::Attack, &rule).unwrap());

        let flipped = BinarizationRule {
            uncivil_below_neutral: false,
            ..rule.clone()
        };
        assert!(!binarize_aspect(&ac, Aspect::Toxicity, &flipped).unwrap());

        let empty = annotated(2, "x", &[], &[3], &[true]);
        assert!(binarize_aspect(&empty, Aspect::Toxicity, &rule).is_err());
    }

    #[test]
    fn score_is_max_of_components() {
        let s = IncivilityScore::from_components(0.2, 0.7, 0.4);
        assert_eq!(s.value, 0.7);
        assert_eq!(IncivilityScore::from_components(0.5, 0.5, 0.5).value, 0.5);
    }

    #[test]
    fn weight_examples() {
        let w = weight_from_scores("a", "s", &[0.1, 0.3, 0.5]).unwrap();
        assert!((w.weight - 0.3).abs() < 1e-15);
        assert_eq!(w.n_comments, 3);
        assert_eq!(weight_from_scores("a", "s", &[0.42]).unwrap().weight, 0.42);
        // 0.1 * 3 / 3 rounds above 0.1 without the clamp
        assert_eq!(weight_from_scores("a", "s", &[0.1; 3]).unwrap().weight, 0.1);
        assert!(weight_from_scores("a", "s", &[]).is_err());
    }

    #[test]
    fn median_examples() {
        let ws: Vec<_> = [0.1, 0.3, 0.2].iter().map(|&w| weight("x", w)).collect();
        assert_eq!(source_median(&ws).unwrap().median_weight, 0.2);
        let ws: Vec<_> = [0.1, 0.3].iter().map(|&w| weight("x", w)).collect();
        assert!((source_median(&ws).unwrap().median_weight - 0.2).abs() < 1e-15);
        assert!(source_median(&[]).is_err());
        let mut mixed = ws.clone();
        mixed[1].source = "breitbart".into();
        assert!(matches!(
            source_median(&mixed),
            Err(Error::SourceMismatch { .. })
        ));
    }

    #[test]
    fn labeling_examples() {
        let t = SourceThreshold {
            source: "politico".into(),
            median_weight: 0.089,
            n_articles: 3,
        };
        let labeled = label_articles(&[weight("a", 0.10), weight("b", 0.089)], &t).unwrap();
        assert_eq!(labeled[0].label, Some(true));
        assert_eq!(labeled[1].label, Some(false));

        let mut other = weight("c", 0.5);
        other.source = "breitbart".into();
        assert!(label_articles(&[other], &t).is_err());
    }

    fn planted_annotated(n: usize, seed: u64) -> Vec<AnnotatedComment> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filler = [
            "policy", "vote", "senate", "budget", "today", "people", "think", "agree", "news",
            "report",
        ];
        (0..n)
            .map(|i| {
                let uncivil = rng.gen_bool(0.4);
                let mut words: Vec<&str> = (0..8)
                    .map(|_| filler[rng.gen_range(0..filler.len())])
                    .collect();
                if uncivil {
                    let pos = rng.gen_range(0..words.len());
                    words.insert(pos, "slur");
                }
                let r: &[u8] = if uncivil { &[1, 2, 2] } else { &[3, 4, 5] };
                annotated(i, &words.join(" "), r, r, &[uncivil, uncivil, false])
            })
            .collect()
    }

    #[test]
    fn planted_signal_aspects() {
        let data = planted_annotated(400, 11);
        let (clf, reports) = train_aspect_classifiers(
            &data,
            &TfidfConfig::aspect(),
            &TrainConfig::default(),
            &SplitConfig::default(),
            &BinarizationRule::default(),
        )
        .unwrap();
        for aspect in Aspect::ALL {
            assert!(
                reports.get(aspect).auc >= 0.95,
                "{aspect}: {:?}",
                reports.get(aspect)
            );
        }
        let s = score_comment(&clf, "you slur");
        assert!(s.value > 0.5);
        let oov = score_comment(&clf, "zzzz qqqq");
        assert_eq!(oov.toxicity, sigmoid(clf.model(Aspect::Toxicity).bias()));
    }

    #[test]
    fn zero_iterations_give_chance_auc() {
        let data = planted_annotated(100, 5);
        let cfg = TrainConfig {
            max_iterations: 0,
            ..Default::default()
        };
        let (_, reports) = train_aspect_classifiers(
            &data,
            &TfidfConfig::aspect(),
            &cfg,
            &SplitConfig::default(),
            &BinarizationRule::default(),
        )
        .unwrap();
        assert_eq!(reports.toxicity.auc, 0.5);
    }

    #[test]
    fn single_class_aspect_is_named() {
        let data: Vec<_> = (0..10)
            .map(|i| annotated(i, "hello there", &[1, 1], &[4, 4], &[i % 2 == 0]))
            .collect();
        let err = train_aspect_classifiers(
            &data,
            &TfidfConfig::aspect(),
            &TrainConfig::default(),
            &SplitConfig::default(),
            &BinarizationRule::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("toxicity"), "{err}");
    }

    #[test]
    fn provoking_classifier_on_planted_bigram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let filler = [
            "senate", "vote", "budget", "policy", "hearing", "campaign", "state", "county",
        ];
        let mut bodies = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let label = i % 2 == 0;
            let mut words: Vec<&str> = (0..30)
                .map(|_| filler[rng.gen_range(0..filler.len())])
                .collect();
            if label {
                words.splice(10..10, ["caravan", "invasion"]);
            }
            bodies.push(words.join(" "));
            labels.push(label);
        }
        let (pipeline, report) = train_provoking_classifier(
            &bodies,
            &labels,
            &TfidfConfig::article(),
            &TrainConfig::default(),
            &SplitConfig {
                test_fraction: 0.2,
                seed: 9,
            },
        )
        .unwrap();
        assert!(report.auc >= 0.9, "{report:?}");
        let p = predict_provoking(&pipeline, &bodies[0]);
        assert_eq!(p, predict_provoking(&pipeline, &bodies[0]));
        assert!((0.0..=1.0).contains(&p.probability));
        let oov = predict_provoking(&pipeline, "zzz qqq");
        assert_eq!(oov.probability, sigmoid(pipeline.model.bias()));
    }

    #[test]
    fn random_labels_are_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let vocab: Vec<String> = (0..60).map(|i| format!("w{i}")).collect();
        let bodies: Vec<String> = (0..200)
            .map(|_| {
                (0..25)
                    .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let labels: Vec<bool> = (0..200).map(|_| rng.gen_bool(0.5)).collect();
        let (_, report) = train_provoking_classifier(
            &bodies,
            &labels,
            &TfidfConfig::article(),
            &TrainConfig::default(),
            &SplitConfig::default(),
        )
        .unwrap();
        assert!((report.auc - 0.5).abs() <= 0.15, "{report:?}");
    }

    proptest! {
        #[test]
        fn distinct_weights_split_in_half(raw in proptest::collection::btree_set(0u32..1_000_000, 1..60), shift in 0u32..1000) {
            let ws: Vec<_> = raw.iter().enumerate().map(|(i, &w)| weight(&i.to_string(), w as f64 / 1e6)).collect();
            let t = source_median(&ws).unwrap();
            let labeled = label_articles(&ws, &t).unwrap();
            let positives = labeled.iter().filter(|w| w.label == Some(true)).count();
            prop_assert_eq!(positives, ws.len() / 2);

            let shifted: Vec<_> = ws.iter().map(|w| ArticleIncivility { weight: w.weight + shift as f64 / 1e4, ..w.clone() }).collect();
            let relabeled = label_articles(&shifted, &source_median(&shifted).unwrap()).unwrap();
            for (a, b) in labeled.iter().zip(&relabeled) {
                prop_assert_eq!(a.label, b.label);
            }
        }

        #[test]
        fn weight_bounds_and_permutation(scores in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
            let w = weight_from_scores("a", "s", &scores).unwrap().weight;
            let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(min <= w && w <= max);
            let mut rev = scores.clone();
            rev.reverse();
            let w2 = weight_from_scores("a", "s", &rev).unwrap().weight;
            prop_assert_eq!(w, w2);
        }
    }
}
