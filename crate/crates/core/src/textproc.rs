//! Tokenization, stop words, n-grams and vocabulary construction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the built-in stop-word list. Bump whenever [`DEFAULT_STOPWORDS`] changes.
pub const STOPLIST_VERSION: u32 = 1;

/// English function words removed before phrase extraction for topic modelling.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "aren't",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "can't",
    "cannot",
    "could",
    "couldn't",
    "did",
    "didn't",
    "do",
    "does",
    "doesn't",
    "doing",
    "don't",
    "down",
    "during",
    "each",
    "even",
    "ever",
    "few",
    "for",
    "from",
    "further",
    "get",
    "gets",
    "got",
    "had",
    "hadn't",
    "has",
    "hasn't",
    "have",
    "haven't",
    "having",
    "he",
    "he'd",
    "he'll",
    "he's",
    "her",
    "here",
    "here's",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "how's",
    "i",
    "i'd",
    "i'll",
    "i'm",
    "i've",
    "if",
    "in",
    "into",
    "is",
    "isn't",
    "it",
    "it's",
    "its",
    "itself",
    "just",
    "let's",
    "like",
    "me",
    "more",
    "most",
    "mustn't",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "one",
    "only",
    "or",
    "other",
    "ought",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "said",
    "same",
    "say",
    "says",
    "shan't",
    "she",
    "she'd",
    "she'll",
    "she's",
    "should",
    "shouldn't",
    "so",
    "some",
    "such",
    "than",
    "that",
    "that's",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "there's",
    "these",
    "they",
    "they'd",
    "they'll",
    "they're",
    "they've",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "us",
    "very",
    "was",
    "wasn't",
    "we",
    "we'd",
    "we'll",
    "we're",
    "we've",
    "were",
    "weren't",
    "what",
    "what's",
    "when",
    "when's",
    "where",
    "where's",
    "which",
    "while",
    "who",
    "who's",
    "whom",
    "why",
    "why's",
    "will",
    "with",
    "won't",
    "would",
    "wouldn't",
    "you",
    "you'd",
    "you'll",
    "you're",
    "you've",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// An ordered run of lowercase tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Tokens joined with single spaces.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Split text into lowercase tokens.
///
/// A token is a maximal run of letters, digits and apostrophes with leading
/// and trailing apostrophes trimmed, so contractions such as `don't` survive
/// while quoted words lose their quotes. Typographic apostrophes are folded
/// to `'`.
pub fn tokenize(text: &str) -> TokenSequence {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    let tokens = lowered
        .split(|c: char| !is_token_char(c))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    TokenSequence(tokens)
}

/// A set of lowercase stop words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(HashSet<String>);

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// The built-in English list, see [`DEFAULT_STOPWORDS`].
    pub fn english() -> Self {
        Self::new(DEFAULT_STOPWORDS.iter())
    }

    /// Parse a stop-word file: one term per line, `#` starts a comment.
    pub fn parse(contents: &str) -> Self {
        Self::new(contents.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&contents))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Drop every token that appears in `stoplist`, keeping order.
pub fn remove_stopwords(tokens: &TokenSequence, stoplist: &Stoplist) -> TokenSequence {
    TokenSequence(
        tokens
            .iter()
            .filter(|t| !stoplist.contains(t))
            .cloned()
            .collect(),
    )
}

/// All contiguous n-grams for `n` in `n_min..=n_max`, grouped by `n` and then
/// ordered by position.
pub fn ngrams(tokens: &TokenSequence, n_min: usize, n_max: usize) -> Result<Vec<String>> {
    if n_min < 1 || n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "n-gram range {n_min}..={n_max} is empty or starts below 1"
        )));
    }
    let toks = tokens.as_slice();
    let mut out = Vec::new();
    for n in n_min..=n_max {
        out.extend(toks.windows(n).map(|w| w.join(" ")));
    }
    Ok(out)
}

/// Term index with document frequencies.
///
/// Terms are indexed `0..len()` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    /// Rebuild a vocabulary from its parts, checking the ordering and df invariants.
    pub fn from_parts(terms: Vec<String>, df: Vec<usize>, n_documents: usize) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::InvalidModel(format!(
                "{} terms but {} document frequencies",
                terms.len(),
                df.len()
            )));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel(
                "vocabulary terms must be strictly increasing".into(),
            ));
        }
        if df.iter().any(|&d| d == 0 || d > n_documents) {
            return Err(Error::InvalidModel(
                "document frequency outside [1, document count]".into(),
            ));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms,
            index,
            df,
            n_documents,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Document frequency of the term at `index`.
    pub fn df(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }
}

/// Build a vocabulary keeping terms with `min_df <= df <= max_df_ratio * N`.
///
/// Both bounds are inclusive.
pub fn build_vocabulary<D, S>(
    documents: &[D],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Vocabulary>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    if documents.is_empty() {
        return Err(Error::EmptyInput(
            "no documents to build a vocabulary from".into(),
        ));
    }
    if min_df < 1 {
        return Err(Error::InvalidArgument("min_df must be at least 1".into()));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "max_df_ratio {max_df_ratio} outside (0, 1]"
        )));
    }
    let n = documents.len();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in documents {
        let unique: BTreeSet<&str> = doc.as_ref().iter().map(AsRef::as_ref).collect();
        for term in unique {
            *counts.entry(term).or_insert(0) += 1;
        }
    }
    // Tolerance absorbs ratio*N landing just under an integer, e.g. 0.29 * 100.
    let max_df = max_df_ratio * n as f64 + 1e-9;
    let (terms, df): (Vec<String>, Vec<usize>) = counts
        .into_iter()
        .filter(|&(_, d)| d >= min_df && d as f64 <= max_df)
        .map(|(t, d)| (t.to_owned(), d))
        .unzip();
    Vocabulary::from_parts(terms, df, n)
}

/// Lowercase and collapse internal whitespace.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// A set of normalized n-gram phrases.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhraseSet(BTreeSet<String>);

impl PhraseSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a phrase after normalization. Blank phrases are ignored.
    pub fn insert(&mut self, phrase: &str) -> bool {
        let p = normalize_phrase(phrase);
        if p.is_empty() {
            return false;
        }
        self.0.insert(p)
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.0.contains(phrase) || self.0.contains(&normalize_phrase(phrase))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_disjoint(&self, other: &PhraseSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl<S: AsRef<str>> FromIterator<S> for PhraseSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut set = PhraseSet::new();
        for p in iter {
            set.insert(p.as_ref());
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(tokens: &[&str]) -> TokenSequence {
        TokenSequence(tokens.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Build the WALL!"), seq(&["build", "the", "wall"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("don't stop"), seq(&["don't", "stop"]));
        assert_eq!(
            tokenize("'quoted' words, 2016!"),
            seq(&["quoted", "words", "2016"])
        );
        assert_eq!(tokenize("it\u{2019}s"), seq(&["it's"]));
    }

    #[test]
    fn stopword_removal() {
        let stop = Stoplist::new(["the"]);
        let t = seq(&["build", "the", "wall"]);
        assert_eq!(remove_stopwords(&t, &stop), seq(&["build", "wall"]));
        assert_eq!(remove_stopwords(&t, &Stoplist::default()), t);
        assert!(remove_stopwords(&seq(&["the", "the"]), &stop).is_empty());
    }

    #[test]
    fn stoplist_file_format() {
        let s = Stoplist::parse("# header\nThe\n  and # trailing\n\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("the") && s.contains("and"));
        assert!(Stoplist::english().len() >= 150);
    }

    #[test]
    fn ngram_examples() {
        let t = seq(&["a", "b", "c"]);
        assert_eq!(ngrams(&t, 2, 2).unwrap(), vec!["a b", "b c"]);
        assert_eq!(
            ngrams(&t, 1, 3).unwrap(),
            vec!["a", "b", "c", "a b", "b c", "a b c"]
        );
        assert!(ngrams(&seq(&["a"]), 2, 2).unwrap().is_empty());
        assert!(ngrams(&t, 0, 2).is_err());
        assert!(ngrams(&t, 3, 2).is_err());
    }

    #[test]
    fn vocabulary_examples() {
        let docs = vec![vec!["a"], vec!["a", "b"]];
        let v = build_vocabulary(&docs, 1, 1.0).unwrap();
        assert_eq!(v.terms(), &["a", "b"]);
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.df(0), 2);
        assert_eq!(v.df(1), 1);

        let v = build_vocabulary(&docs, 2, 1.0).unwrap();
        assert_eq!(v.terms(), &["a"]);

        let v = build_vocabulary(&docs, 1, 0.5).unwrap();
        assert_eq!(v.terms(), &["b"]);

        let empty: Vec<Vec<&str>> = vec![];
        assert!(build_vocabulary(&empty, 1, 1.0).is_err());
        assert!(build_vocabulary(&docs, 0, 1.0).is_err());
        assert!(build_vocabulary(&docs, 1, 0.0).is_err());
    }

    #[test]
    fn max_df_boundary_survives_float_rounding() {
        let mut docs: Vec<Vec<&str>> = (0..100).map(|_| vec!["x"]).collect();
        for d in docs.iter_mut().take(29) {
            d.push("y");
        }
        let v = build_vocabulary(&docs, 1, 0.29).unwrap();
        assert_eq!(v.terms(), &["y"]);
    }

    #[test]
    fn phrase_set_normalizes() {
        let mut p = PhraseSet::new();
        assert!(p.insert("  Build   Wall "));
        assert!(!p.insert("build wall"));
        assert!(!p.insert("   "));
        assert!(p.contains("BUILD wall"));
        assert_eq!(p.iter().collect::<Vec<_>>(), vec!["build wall"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.joined());
            prop_assert_eq!(once.clone(), twice);
            for t in once.iter() {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn ngram_count(len in 0usize..20, n in 1usize..6) {
            let t = TokenSequence((0..len).map(|i| format!("t{i}")).collect());
            let g = ngrams(&t, n, n).unwrap();
            prop_assert_eq!(g.len(), (len + 1).saturating_sub(n));
        }

        #[test]
        fn vocabulary_is_a_bijection(
            docs in proptest::collection::vec(
                proptest::collection::vec("[a-e]{1,2}", 0..8), 1..8),
            min_df in 1usize..3,
        ) {
            let v = build_vocabulary(&docs, min_df, 1.0).unwrap();
            for (i, term) in v.terms().iter().enumerate() {
                prop_assert_eq!(v.get(term), Some(i));
                prop_assert!(v.df(i) >= min_df && v.df(i) <= docs.len());
            }
        }
    }
}
