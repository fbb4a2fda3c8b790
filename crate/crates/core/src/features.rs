//! TF-IDF vectorization of bag-of-n-gram documents.
//!
//! Weights are raw counts times the smoothed idf `ln((1 + N) / (1 + df)) + 1`,
//! and every vector is L2-normalised.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{build_vocabulary, ngrams, remove_stopwords, tokenize, Stoplist, Vocabulary};

/// A sparse vector with strictly increasing indices and non-zero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dimension: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            dimension,
            entries: Vec::new(),
        }
    }

    /// Build from `(index, value)` pairs in any order. Duplicate indices are
    /// summed and zeros dropped.
    pub fn from_pairs(
        dimension: usize,
        pairs: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            if i >= dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: i + 1,
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value at index {i}"
                )));
            }
            *acc.entry(i).or_insert(0.0) += v;
        }
        Ok(SparseVector {
            dimension,
            entries: acc.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.len(), values.iter().copied().enumerate())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Dot product with a dense vector of the same dimension.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub use_stoplist: bool,
}

impl TfidfConfig {
    /// Bigram features for article bodies. Bigrams seen in a single training
    /// article cannot generalize and only help the model memorize, so they
    /// are dropped.
    pub fn article() -> Self {
        TfidfConfig {
            n_min: 2,
            n_max: 2,
            min_df: 2,
            max_df_ratio: 1.0,
            use_stoplist: false,
        }
    }

    /// Unigram and bigram features for comment aspect classifiers.
    pub fn aspect() -> Self {
        TfidfConfig {
            n_min: 1,
            n_max: 2,
            min_df: 3,
            max_df_ratio: 1.0,
            use_stoplist: false,
        }
    }

    /// Tokenize, optionally drop stop words, and extract n-grams.
    pub fn analyze(&self, text: &str) -> Result<Vec<String>> {
        analyze_with(
            self,
            self.use_stoplist.then(Stoplist::english).as_ref(),
            text,
        )
    }
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self::article()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    config: TfidfConfig,
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    stoplist: Option<Stoplist>,
}

fn analyze_with(config: &TfidfConfig, stop: Option<&Stoplist>, text: &str) -> Result<Vec<String>> {
    let mut tokens = tokenize(text);
    if let Some(stop) = stop {
        tokens = remove_stopwords(&tokens, stop);
    }
    ngrams(&tokens, config.n_min, config.n_max)
}

/// Smoothed inverse document frequency.
pub fn smoothed_idf(n_documents: usize, df: usize) -> f64 {
    ((1.0 + n_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fit a TF-IDF model on raw document texts.
pub fn fit_tfidf<S: AsRef<str>>(documents: &[S], config: &TfidfConfig) -> Result<TfidfModel> {
    if documents.is_empty() {
        return Err(Error::EmptyInput("no documents to fit TF-IDF on".into()));
    }
    let stop = config.use_stoplist.then(Stoplist::english);
    let analyzed = documents
        .iter()
        .map(|d| analyze_with(config, stop.as_ref(), d.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let vocabulary = build_vocabulary(&analyzed, config.min_df, config.max_df_ratio)?;
    TfidfModel::new(config.clone(), vocabulary)
}

#[derive(Serialize, Deserialize)]
struct TfidfWire {
    format_version: u32,
    config: TfidfConfig,
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    n_documents: usize,
    document_frequency: Vec<usize>,
}

impl TfidfModel {
    pub const FORMAT_VERSION: u32 = 1;

    fn new(config: TfidfConfig, vocabulary: Vocabulary) -> Result<Self> {
        ngrams(&Default::default(), config.n_min, config.n_max)?;
        let n = vocabulary.n_documents();
        let idf = vocabulary
            .document_frequencies()
            .iter()
            .map(|&df| smoothed_idf(n, df))
            .collect();
        let stoplist = config.use_stoplist.then(Stoplist::english);
        Ok(TfidfModel {
            config,
            vocabulary,
            idf,
            stoplist,
        })
    }

    pub fn config(&self) -> &TfidfConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    /// Vectorize `text`. Out-of-vocabulary n-grams are ignored; a document
    /// with none in vocabulary maps to the zero vector.
    pub fn transform(&self, text: &str) -> SparseVector {
        let grams = analyze_with(&self.config, self.stoplist.as_ref(), text)
            .expect("n-gram range validated at fit time");
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for g in &grams {
            if let Some(i) = self.vocabulary.get(g) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, c * self.idf[i]))
            .collect();
        let norm = entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        SparseVector {
            dimension: self.dimension(),
            entries,
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<SparseVector> {
        texts.iter().map(|t| self.transform(t.as_ref())).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = TfidfWire {
            format_version: Self::FORMAT_VERSION,
            config: self.config.clone(),
            vocabulary: self.vocabulary.terms().to_vec(),
            idf: self.idf.clone(),
            n_documents: self.vocabulary.n_documents(),
            document_frequency: self.vocabulary.document_frequencies().to_vec(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let wire: TfidfWire = serde_json::from_str(json)?;
        if wire.format_version != Self::FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: wire.format_version,
                expected: Self::FORMAT_VERSION,
            });
        }
        if wire.idf.len() != wire.vocabulary.len() {
            return Err(Error::InvalidModel(
                "idf length differs from vocabulary".into(),
            ));
        }
        let vocabulary =
            Vocabulary::from_parts(wire.vocabulary, wire.document_frequency, wire.n_documents)?;
        let mut model = Self::new(wire.config, vocabulary)?;
        model.idf = wire.idf;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unigrams() -> TfidfConfig {
        TfidfConfig {
            n_min: 1,
            n_max: 1,
            min_df: 1,
            max_df_ratio: 1.0,
            use_stoplist: false,
        }
    }

    #[test]
    fn idf_values() {
        let m = fit_tfidf(&["a b", "a c"], &unigrams()).unwrap();
        let v = m.vocabulary();
        assert_abs_diff_eq!(m.idf()[v.get("a").unwrap()], 1.0, epsilon = 1e-12);
        // ln(3/2) + 1
        assert_abs_diff_eq!(
            m.idf()[v.get("b").unwrap()],
            1.405_465_108_108_164_3,
            epsilon = 1e-12
        );
        assert!(v.get("z").is_none());

        let single = fit_tfidf(&["x y y"], &unigrams()).unwrap();
        assert!(single.idf().iter().all(|&i| (i - 1.0).abs() < 1e-12));
        assert!(fit_tfidf::<&str>(&[], &unigrams()).is_err());
    }

    #[test]
    fn transform_examples() {
        let m = fit_tfidf(&["a b", "a c"], &unigrams()).unwrap();
        let v = m.transform("a b");
        assert_abs_diff_eq!(
            v.get(m.vocabulary().get("a").unwrap()),
            0.5797,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            v.get(m.vocabulary().get("b").unwrap()),
            0.8148,
            epsilon = 1e-3
        );

        let z = m.transform("z");
        assert_eq!(z.nnz(), 0);
        assert_eq!(z.dimension(), 3);

        assert_eq!(m.transform("a a"), m.transform("a"));
    }

    #[test]
    fn bigram_config_and_stoplist() {
        let cfg = TfidfConfig {
            use_stoplist: true,
            min_df: 1,
            ..TfidfConfig::article()
        };
        let m = fit_tfidf(&["build the wall today"], &cfg).unwrap();
        assert_eq!(m.vocabulary().terms(), &["build wall", "wall today"]);
    }

    #[test]
    fn json_round_trip() {
        let m = fit_tfidf(&["a b c", "a c d", "d e"], &unigrams()).unwrap();
        let back = TfidfModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = m
            .to_json()
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":9");
        assert!(matches!(
            TfidfModel::from_json(&bad),
            Err(Error::FormatVersion { .. })
        ));
    }

    #[test]
    fn sparse_vector_construction() {
        let v = SparseVector::from_pairs(5, [(3, 1.0), (1, 2.0), (3, 1.0), (4, 0.0)]).unwrap();
        assert_eq!(v.entries(), &[(1, 2.0), (3, 2.0)]);
        assert!(SparseVector::from_pairs(2, [(2, 1.0)]).is_err());
        assert!(SparseVector::from_pairs(2, [(0, f64::NAN)]).is_err());
        assert_eq!(v.dot(&[1.0, 1.0, 1.0, 0.5, 1.0]), 3.0);
    }

    proptest! {
        #[test]
        fn unit_norm(docs in proptest::collection::vec("[a-f]( [a-f]){0,6}", 1..8), probe in "[a-h]( [a-h]){0,6}") {
            let m = fit_tfidf(&docs, &unigrams()).unwrap();
            let v = m.transform(&probe);
            if v.nnz() > 0 {
                prop_assert!((v.norm() - 1.0).abs() < 1e-9);
            }
            prop_assert!(v.entries().windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn fit_is_order_independent(mut docs in proptest::collection::vec("[a-f]( [a-f]){0,6}", 1..8), probe in "[a-f]( [a-f]){0,6}") {
            let m1 = fit_tfidf(&docs, &unigrams()).unwrap();
            docs.reverse();
            let m2 = fit_tfidf(&docs, &unigrams()).unwrap();
            prop_assert_eq!(m1.transform(&probe), m2.transform(&probe));
        }
    }
}
