use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use incivility_core::corpus::{
    filter_by_keywords, filter_by_tag, load_annotated, load_articles, load_comments,
    read_jsonl_records, sample, write_jsonl, Article, Corpus,
};
use incivility_core::incivility::{
    evaluate_aspects, label_articles, predict_provoking, score_comment, source_median,
    train_aspect_classifiers, train_provoking_classifier, weight_from_scores, ArticleIncivility,
    AspectClassifiers, IncivilityScore, ProvokingPipeline,
};
use incivility_core::linmodel::EvalReport;
use incivility_core::subtext::mine_subtext;
use incivility_core::synthetic::generate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{require_input, RunConfig};
use crate::error::{input, internal, CliResult};

pub const ASPECT_EVAL_FILE: &str = "aspect_eval.json";
pub const SCORES_FILE: &str = "scores.jsonl";
pub const WEIGHTS_FILE: &str = "article_weights.jsonl";
pub const THRESHOLDS_FILE: &str = "thresholds.json";
pub const LABELS_FILE: &str = "article_labels.jsonl";
pub const PROVOKING_EVAL_FILE: &str = "provoking_eval.json";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const SUBTEXT_JSON_FILE: &str = "subtext_report.json";
pub const SUBTEXT_MD_FILE: &str = "subtext_report.md";
pub const EVALUATION_FILE: &str = "evaluation.json";

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(internal)
}

fn write_text(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(internal)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(internal)?;
    text.push('\n');
    write_text(path, &text)
}

/// One line of `scores.jsonl`; scores are printed with six decimals.
pub fn score_line(comment_id: &str, s: &IncivilityScore) -> String {
    let id = serde_json::to_string(comment_id).expect("strings always serialize");
    format!(
        "{{\"comment_id\":{id},\"toxicity\":{:.6},\"aggression\":{:.6},\"attack\":{:.6},\"incivility\":{:.6}}}",
        s.toxicity, s.aggression, s.attack, s.value
    )
}

/// One line of `article_labels.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub article_id: String,
    pub weight: f64,
    pub n_comments: usize,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub article_id: String,
    pub probability: f64,
    pub label: bool,
}

pub fn cmd_train_aspects(cfg: &RunConfig) -> CliResult<()> {
    let path = require_input(&cfg.annotated, "annotated")?;
    let annotated = load_annotated(path).map_err(input)?;
    let (classifiers, reports) = train_aspect_classifiers(
        &annotated,
        &cfg.aspect_tfidf,
        &cfg.train,
        &cfg.split,
        &cfg.binarization,
    )
    .map_err(input)?;
    ensure_dir(&cfg.out_dir)?;
    classifiers.save(&cfg.out_dir).map_err(internal)?;
    write_json(&cfg.out_dir.join(ASPECT_EVAL_FILE), &reports)?;
    println!(
        "trained aspect classifiers on {} comments ({} features): AUC toxicity {:.3}, aggression {:.3}, attack {:.3}",
        annotated.len(),
        classifiers.tfidf().dimension(),
        reports.toxicity.auc,
        reports.aggression.auc,
        reports.attack.auc
    );
    Ok(())
}

pub fn cmd_score(cfg: &RunConfig) -> CliResult<()> {
    let comments = load_comments(require_input(&cfg.comments, "comments")?).map_err(input)?;
    let articles = match &cfg.articles {
        Some(_) => Some(load_articles(require_input(&cfg.articles, "articles")?).map_err(input)?),
        None => None,
    };
    let classifiers = AspectClassifiers::load(cfg.model_dir()).map_err(input)?;

    let scores: Vec<IncivilityScore> = comments
        .par_iter()
        .map(|c| score_comment(&classifiers, &c.text))
        .collect();

    ensure_dir(&cfg.out_dir)?;
    let mut out = String::new();
    for (c, s) in comments.iter().zip(&scores) {
        out.push_str(&score_line(&c.id, s));
        out.push('\n');
    }
    write_text(&cfg.out_dir.join(SCORES_FILE), &out)?;
    println!("scored {} comments", comments.len());

    if let Some(articles) = articles {
        let by_id: HashMap<&str, f64> = comments
            .iter()
            .zip(&scores)
            .map(|(c, s)| (c.id.as_str(), s.value))
            .collect();
        let corpus = Corpus::new(articles, comments.clone());
        let mut weights = Vec::new();
        let mut skipped = 0;
        for article in corpus.articles() {
            let values: Vec<f64> = corpus
                .comments_for(&article.id)
                .iter()
                .map(|c| by_id[c.id.as_str()])
                .collect();
            if values.is_empty() {
                skipped += 1;
                continue;
            }
            weights
                .push(weight_from_scores(&article.id, &article.source, &values).map_err(internal)?);
        }
        write_jsonl(cfg.out_dir.join(WEIGHTS_FILE), &weights).map_err(internal)?;
        println!(
            "weighted {} articles ({} without comments excluded, {} comments without a loaded article)",
            weights.len(),
            skipped,
            corpus.dangling_comments()
        );
    }
    Ok(())
}

/// Summary of one source's labelling and classifier training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceOutcome {
    pub source: String,
    pub n_articles: usize,
    pub n_positive: usize,
    pub median_weight: f64,
    pub eval: EvalReport,
}

pub fn cmd_label_and_train_provoking(cfg: &RunConfig) -> CliResult<Vec<SourceOutcome>> {
    let mut articles = load_articles(require_input(&cfg.articles, "articles")?).map_err(input)?;
    let weights_path = cfg.weights_path();
    if !weights_path.exists() {
        return Err(input(anyhow!(
            "weights file not found: {} (run `score` with --articles first)",
            weights_path.display()
        )));
    }
    let weights: Vec<ArticleIncivility> = read_jsonl_records(&weights_path).map_err(input)?;
    if !cfg.keywords.is_empty() {
        articles = filter_by_keywords(&articles, &cfg.keywords);
    }

    let weight_by_id: HashMap<&str, &ArticleIncivility> =
        weights.iter().map(|w| (w.article_id.as_str(), w)).collect();
    let mut by_source: BTreeMap<String, Vec<Article>> = BTreeMap::new();
    for a in articles {
        if weight_by_id.contains_key(a.id.as_str()) {
            by_source.entry(a.source.clone()).or_default().push(a);
        }
    }
    if let Some(only) = &cfg.source {
        by_source.retain(|s, _| s == only);
    }
    if by_source.is_empty() {
        return Err(input(anyhow!("no weighted articles to label")));
    }

    let mut outcomes = Vec::new();
    for (source, mut group) in by_source {
        if let Some(k) = cfg.sample_per_source {
            group = sample(&group, k, cfg.sample_seed);
        }
        let group_weights: Vec<ArticleIncivility> = group
            .iter()
            .map(|a| ArticleIncivility {
                source: a.source.clone(),
                ..weight_by_id[a.id.as_str()].clone()
            })
            .collect();
        let threshold = source_median(&group_weights).map_err(input)?;
        let labeled = label_articles(&group_weights, &threshold).map_err(input)?;
        let labels: Vec<bool> = labeled.iter().map(|w| w.label == Some(true)).collect();
        let bodies: Vec<&str> = group.iter().map(|a| a.body.as_str()).collect();
        let (pipeline, eval) = train_provoking_classifier(
            &bodies,
            &labels,
            &cfg.article_tfidf,
            &cfg.train,
            &cfg.split,
        )
        .with_context(|| format!("source {source}"))
        .map_err(input)?;

        let dir = cfg.out_dir.join(&source);
        ensure_dir(&dir)?;
        write_json(&dir.join(THRESHOLDS_FILE), &threshold)?;
        let records: Vec<LabelRecord> = labeled
            .iter()
            .map(|w| LabelRecord {
                article_id: w.article_id.clone(),
                weight: w.weight,
                n_comments: w.n_comments,
                label: w.label == Some(true),
            })
            .collect();
        write_jsonl(dir.join(LABELS_FILE), &records).map_err(internal)?;
        pipeline.save(&dir).map_err(internal)?;
        write_json(&dir.join(PROVOKING_EVAL_FILE), &eval)?;

        let n_positive = labels.iter().filter(|&&l| l).count();
        println!(
            "{source}: {} articles, median weight {:.6}, {n_positive} provoking; held-out AUC {:.3}, accuracy {:.3}",
            group.len(),
            threshold.median_weight,
            eval.auc,
            eval.accuracy
        );
        outcomes.push(SourceOutcome {
            source,
            n_articles: group.len(),
            n_positive,
            median_weight: threshold.median_weight,
            eval,
        });
    }
    Ok(outcomes)
}

pub fn cmd_predict_provoking(cfg: &RunConfig) -> CliResult<()> {
    let articles = load_articles(require_input(&cfg.articles, "articles")?).map_err(input)?;
    let pipeline = ProvokingPipeline::load(cfg.model_dir()).map_err(input)?;
    let records: Vec<PredictionRecord> = articles
        .iter()
        .map(|a| {
            let p = predict_provoking(&pipeline, &a.body);
            PredictionRecord {
                article_id: a.id.clone(),
                probability: p.probability,
                label: p.label,
            }
        })
        .collect();
    ensure_dir(&cfg.out_dir)?;
    write_jsonl(cfg.out_dir.join(PREDICTIONS_FILE), &records).map_err(internal)?;
    println!(
        "predicted {} articles, {} provoking",
        records.len(),
        records.iter().filter(|r| r.label).count()
    );
    Ok(())
}

pub fn cmd_mine_subtext(cfg: &RunConfig) -> CliResult<()> {
    let articles = load_articles(require_input(&cfg.articles, "articles")?).map_err(input)?;
    let comments = load_comments(require_input(&cfg.comments, "comments")?).map_err(input)?;
    let tagged = filter_by_tag(&articles, &cfg.tag);
    if tagged.is_empty() {
        return Err(input(anyhow!("no articles tagged {:?}", cfg.tag)));
    }
    let report = mine_subtext(&tagged, &comments, &cfg.subtext).map_err(input)?;
    ensure_dir(&cfg.out_dir)?;
    let mut json = report.to_json().map_err(internal)?;
    json.push('\n');
    write_text(&cfg.out_dir.join(SUBTEXT_JSON_FILE), &json)?;
    write_text(&cfg.out_dir.join(SUBTEXT_MD_FILE), &report.to_markdown())?;
    println!(
        "{} tagged articles, {} comments: {} content phrases, {} comment phrases",
        report.n_articles,
        report.n_comments,
        report.content_phrases.len(),
        report.comment_phrases.len()
    );
    Ok(())
}

pub fn cmd_generate_synthetic(cfg: &RunConfig) -> CliResult<()> {
    let corpus = generate(&cfg.synthetic).map_err(input)?;
    ensure_dir(&cfg.out_dir)?;
    write_jsonl(cfg.out_dir.join("articles.jsonl"), &corpus.articles).map_err(internal)?;
    write_jsonl(cfg.out_dir.join("comments.jsonl"), &corpus.comments).map_err(internal)?;
    write_jsonl(cfg.out_dir.join("annotated.jsonl"), &corpus.annotated).map_err(internal)?;
    println!(
        "wrote {} articles ({} provoking), {} comments, {} annotated comments to {}",
        corpus.articles.len(),
        corpus.provoking.iter().filter(|&&p| p).count(),
        corpus.comments.len(),
        corpus.annotated.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

/// Evaluate saved models on labelled data.
///
/// With `annotated` set, the aspect classifiers in the model directory are
/// scored on every annotated comment. With `labels` and `articles` set, the
/// provoking pipeline in the model directory is scored on those articles.
pub fn cmd_evaluate(cfg: &RunConfig) -> CliResult<()> {
    let mut results = serde_json::Map::new();
    let mut summary = String::new();
    if cfg.annotated.is_some() {
        let annotated =
            load_annotated(require_input(&cfg.annotated, "annotated")?).map_err(input)?;
        let classifiers = AspectClassifiers::load(cfg.model_dir()).map_err(input)?;
        let reports =
            evaluate_aspects(&classifiers, &annotated, &cfg.binarization).map_err(input)?;
        let _ = writeln!(
            summary,
            "aspects on {} comments: AUC toxicity {:.3}, aggression {:.3}, attack {:.3}",
            annotated.len(),
            reports.toxicity.auc,
            reports.aggression.auc,
            reports.attack.auc
        );
        results.insert(
            "aspects".into(),
            serde_json::to_value(&reports).map_err(internal)?,
        );
    }
    if cfg.labels.is_some() {
        let records: Vec<LabelRecord> =
            read_jsonl_records(require_input(&cfg.labels, "labels")?).map_err(input)?;
        let articles = load_articles(require_input(&cfg.articles, "articles")?).map_err(input)?;
        let pipeline = ProvokingPipeline::load(cfg.model_dir()).map_err(input)?;
        let bodies: HashMap<&str, &str> = articles
            .iter()
            .map(|a| (a.id.as_str(), a.body.as_str()))
            .collect();
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for r in &records {
            let body = bodies.get(r.article_id.as_str()).ok_or_else(|| {
                input(anyhow!(
                    "labelled article {} not in articles file",
                    r.article_id
                ))
            })?;
            scores.push(predict_provoking(&pipeline, body).probability);
            labels.push(r.label);
        }
        let report = EvalReport::from_scores(&scores, &labels, 0.5).map_err(input)?;
        let _ = writeln!(
            summary,
            "provoking on {} articles: AUC {:.3}, accuracy {:.3}",
            records.len(),
            report.auc,
            report.accuracy
        );
        results.insert(
            "provoking".into(),
            serde_json::to_value(&report).map_err(internal)?,
        );
    }
    if results.is_empty() {
        return Err(input(anyhow!(
            "nothing to evaluate: set --annotated or --labels"
        )));
    }
    ensure_dir(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join(EVALUATION_FILE), &results)?;
    print!("{summary}");
    Ok(())
}
