//! Articles, comments and annotated training comments: loading, filtering
//! and train/test splitting.
//!
//! All inputs are JSON-lines files, one record per line. Blank lines are
//! skipped; line numbers in errors are 1-based physical line numbers.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source: String,
    pub title: String,
    pub body: String,
    pub tags: BTreeSet<String>,
    pub date: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub article_id: String,
    pub text: String,
}

/// A training comment with per-annotator labels.
///
/// Toxicity and aggression are rated on a 1..=5 scale where 3 is neutral;
/// attack is one flag per annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedComment {
    pub id: String,
    pub text: String,
    #[serde(rename = "toxicity")]
    pub toxicity_ratings: Vec<u8>,
    #[serde(rename = "aggression")]
    pub aggression_ratings: Vec<u8>,
    #[serde(rename = "attack")]
    pub attack_flags: Vec<bool>,
}

/// Articles and comments with an article → comments index.
///
/// Comments whose article is not loaded are kept but not indexed.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    articles: Vec<Article>,
    comments: Vec<Comment>,
    index: HashMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn new(articles: Vec<Article>, comments: Vec<Comment>) -> Self {
        let known: HashSet<&str> = articles.iter().map(|a| a.id.as_str()).collect();
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, c) in comments.iter().enumerate() {
            if known.contains(c.article_id.as_str()) {
                index.entry(c.article_id.clone()).or_default().push(i);
            }
        }
        Corpus {
            articles,
            comments,
            index,
        }
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    /// Comments attached to `article_id`, in load order.
    pub fn comments_for(&self, article_id: &str) -> Vec<&Comment> {
        self.index
            .get(article_id)
            .map(|ids| ids.iter().map(|&i| &self.comments[i]).collect())
            .unwrap_or_default()
    }

    /// Number of comments whose article is not part of the corpus.
    pub fn dangling_comments(&self) -> usize {
        self.comments.len() - self.index.values().map(Vec::len).sum::<usize>()
    }
}

fn clean_serde_message(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    let msg = match msg.find(" at line ") {
        Some(pos) => msg[..pos].to_owned(),
        None => msg,
    };
    msg.replace('`', "")
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: clean_serde_message(&e),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

/// Read any JSON-lines file of `T` records, skipping blank lines.
pub fn read_jsonl_records<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    Ok(read_jsonl(path.as_ref())?
        .into_iter()
        .map(|(_, r)| r)
        .collect())
}

fn require_non_empty(line: usize, field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        return Err(Error::Parse {
            line,
            message: format!("empty field {field}"),
        });
    }
    Ok(())
}

/// Load articles in file order, rejecting empty ids or bodies and duplicate ids.
pub fn load_articles(path: impl AsRef<Path>) -> Result<Vec<Article>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, a) in read_jsonl::<Article>(path.as_ref())? {
        require_non_empty(line, "id", &a.id)?;
        require_non_empty(line, "body", &a.body)?;
        if !seen.insert(a.id.clone()) {
            return Err(Error::DuplicateId(a.id));
        }
        out.push(a);
    }
    Ok(out)
}

/// Load comments in file order, rejecting empty ids or texts and duplicate ids.
pub fn load_comments(path: impl AsRef<Path>) -> Result<Vec<Comment>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, c) in read_jsonl::<Comment>(path.as_ref())? {
        require_non_empty(line, "id", &c.id)?;
        require_non_empty(line, "article_id", &c.article_id)?;
        require_non_empty(line, "text", &c.text)?;
        if !seen.insert(c.id.clone()) {
            return Err(Error::DuplicateId(c.id));
        }
        out.push(c);
    }
    Ok(out)
}

/// One annotator row (or a pre-aggregated row) of an annotated corpus file.
#[derive(Debug, Deserialize)]
struct AnnotationRow {
    id: String,
    text: String,
    #[serde(default, deserialize_with = "one_or_many")]
    toxicity: Vec<i64>,
    #[serde(default, deserialize_with = "one_or_many")]
    aggression: Vec<i64>,
    #[serde(default, deserialize_with = "one_or_many")]
    attack: Vec<bool>,
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn parse_tsv_row(line_no: usize, header: &[String], line: &str) -> Result<AnnotationRow> {
    let cells: Vec<&str> = line.split('\t').collect();
    let get = |name: &str| -> Result<&str> {
        header
            .iter()
            .position(|h| h == name)
            .and_then(|i| cells.get(i).copied())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("missing field {name}"),
            })
    };
    let int = |name: &str| -> Result<Vec<i64>> {
        let raw = get(name)?.trim();
        if raw.is_empty() {
            return Ok(vec![]);
        }
        raw.parse().map(|v| vec![v]).map_err(|_| Error::Parse {
            line: line_no,
            message: format!("field {name}: not an integer: {raw:?}"),
        })
    };
    let attack = match get("attack")?.trim() {
        "" => vec![],
        "1" | "true" | "True" | "1.0" => vec![true],
        "0" | "false" | "False" | "0.0" => vec![false],
        other => {
            return Err(Error::Parse {
                line: line_no,
                message: format!("field attack: not a boolean: {other:?}"),
            })
        }
    };
    Ok(AnnotationRow {
        id: get("id")?.to_owned(),
        text: get("text")?.to_owned(),
        toxicity: int("toxicity")?,
        aggression: int("aggression")?,
        attack,
    })
}

/// Load an annotated corpus, aggregating all rows that share an id.
///
/// Two layouts are accepted. JSON lines carry
/// `{"id","text","toxicity","aggression","attack"}` where each label field is
/// a single value or an array. Tab-separated files start with a header row
/// naming the columns `id`, `text`, `toxicity`, `aggression` and `attack`
/// and carry one annotator per row. Records come out in order of first
/// appearance.
pub fn load_annotated(path: impl AsRef<Path>) -> Result<Vec<AnnotatedComment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<(usize, AnnotationRow)> = Vec::new();
    let mut tsv_header: Option<Vec<String>> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = &tsv_header {
            rows.push((line_no, parse_tsv_row(line_no, header, &line)?));
        } else if line.trim_start().starts_with('{') {
            let row = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: clean_serde_message(&e),
            })?;
            rows.push((line_no, row));
        } else if rows.is_empty() {
            tsv_header = Some(line.split('\t').map(|h| h.trim().to_lowercase()).collect());
        } else {
            return Err(Error::Parse {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, AnnotatedComment> = HashMap::new();
    for (line, row) in rows {
        require_non_empty(line, "id", &row.id)?;
        let entry = grouped.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            AnnotatedComment {
                id: row.id.clone(),
                text: row.text.clone(),
                toxicity_ratings: vec![],
                aggression_ratings: vec![],
                attack_flags: vec![],
            }
        });
        for (src, dst) in [
            (&row.toxicity, &mut entry.toxicity_ratings),
            (&row.aggression, &mut entry.aggression_ratings),
        ] {
            for &v in src {
                if !(1..=5).contains(&v) {
                    return Err(Error::InvalidRating {
                        id: row.id.clone(),
                        value: v,
                    });
                }
                dst.push(v as u8);
            }
        }
        entry.attack_flags.extend(&row.attack);
    }

    order
        .into_iter()
        .map(|id| {
            let ac = grouped.remove(&id).expect("grouped by id");
            for (field, n) in [
                ("toxicity", ac.toxicity_ratings.len()),
                ("aggression", ac.aggression_ratings.len()),
                ("attack", ac.attack_flags.len()),
            ] {
                if n == 0 {
                    return Err(Error::NoAnnotators { id: ac.id, field });
                }
            }
            Ok(ac)
        })
        .collect()
}

/// Write records as JSON lines.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn contains_subsequence(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Articles whose title or body contains at least one keyword as a whole
/// token (or token run, for multi-word keywords), ignoring case.
pub fn filter_by_keywords<S: AsRef<str>>(articles: &[Article], keywords: &[S]) -> Vec<Article> {
    let keys: Vec<Vec<String>> = keywords
        .iter()
        .map(|k| tokenize(k.as_ref()).into_vec())
        .filter(|k| !k.is_empty())
        .collect();
    articles
        .iter()
        .filter(|a| {
            let title = tokenize(&a.title);
            let body = tokenize(&a.body);
            keys.iter().any(|k| {
                contains_subsequence(title.as_slice(), k)
                    || contains_subsequence(body.as_slice(), k)
            })
        })
        .cloned()
        .collect()
}

/// Articles carrying `tag`, compared case-insensitively.
pub fn filter_by_tag(articles: &[Article], tag: &str) -> Vec<Article> {
    let tag = tag.trim().to_lowercase();
    articles
        .iter()
        .filter(|a| a.tags.iter().any(|t| t.trim().to_lowercase() == tag))
        .cloned()
        .collect()
}

/// Drop comments with fewer than `min_words` tokens. Not applied by default.
pub fn filter_min_words(comments: &[Comment], min_words: usize) -> Vec<Comment> {
    comments
        .iter()
        .filter(|c| tokenize(&c.text).len() >= min_words)
        .cloned()
        .collect()
}

/// Seeded uniform sample of `k` items without replacement, in input order.
pub fn sample<T: Clone>(items: &[T], k: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(k);
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i].clone()).collect()
}

fn test_count(n: usize, test_fraction: f64) -> usize {
    if n < 2 {
        return 0;
    }
    ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1)
}

/// Seeded train/test partition of `0..n`, each side in ascending order.
///
/// With labels the split is stratified: every class with at least two
/// members contributes `round(class_size * test_fraction)` items to the test
/// side, clamped so that both sides receive at least one.
pub fn split_indices(
    n: usize,
    test_fraction: f64,
    seed: u64,
    labels: Option<&[bool]>,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction {test_fraction} outside (0, 1)"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 items to split, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = match labels {
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: labels.len(),
                });
            }
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i]);
            vec![pos, neg]
        }
        None => vec![(0..n).collect()],
    };
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let k = test_count(group.len(), test_fraction);
        test.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded train/test split of `items`; see [`split_indices`].
pub fn split<T: Clone>(
    items: &[T],
    test_fraction: f64,
    seed: u64,
    labels: Option<&[bool]>,
) -> Result<(Vec<T>, Vec<T>)> {
    let (train, test) = split_indices(items.len(), test_fraction, seed, labels)?;
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| items[i].clone()).collect();
    Ok((pick(train), pick(test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn article(id: &str, title: &str, body: &str, tags: &[&str]) -> Article {
        Article {
            id: id.into(),
            source: "politico".into(),
            title: title.into(),
            body: body.into(),
            tags: tags.iter().map(|s| s.to_string()).collect(),
            date: "2016-05-01".into(),
        }
    }

    fn write_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_articles_cases() {
        let f = write_file("");
        assert!(load_articles(f.path()).unwrap().is_empty());

        let a = r#"{"id":"a1","source":"s","title":"t","body":"b one","tags":["x"],"date":"2016-01-01"}"#;
        let b =
            r#"{"id":"a2","source":"s","title":"t","body":"b two","tags":[],"date":"2016-01-02"}"#;
        let f = write_file(&format!("{a}\n{b}\n"));
        let got = load_articles(f.path()).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].id, "a1");
        assert_eq!(got[1].id, "a2");

        let bad = r#"{"id":"a3","source":"s","title":"t","tags":[],"date":"2016-01-02"}"#;
        let f = write_file(&format!("{a}\n{b}\n{bad}\n"));
        let err = load_articles(f.path()).unwrap_err().to_string();
        assert_eq!(err, "line 3: missing field body");

        let f = write_file(&format!("{a}\n{a}\n"));
        let err = load_articles(f.path()).unwrap_err().to_string();
        assert!(err.contains("a1"), "{err}");
    }

    #[test]
    fn load_comments_cases() {
        let f = write_file("\n");
        assert!(load_comments(f.path()).unwrap().is_empty());
        let lines = (1..=3)
            .map(|i| format!(r#"{{"id":"c{i}","article_id":"a1","text":"hello {i}"}}"#))
            .collect::<Vec<_>>()
            .join("\n");
        let f = write_file(&lines);
        assert_eq!(load_comments(f.path()).unwrap().len(), 3);

        let dup = r#"{"id":"c1","article_id":"a1","text":"x"}"#;
        let f = write_file(&format!("{dup}\n{dup}\n"));
        assert!(matches!(load_comments(f.path()), Err(Error::DuplicateId(id)) if id == "c1"));
    }

    #[test]
    fn load_annotated_groups_rows() {
        let f = write_file(concat!(
            r#"{"id":"1","text":"a","toxicity":3,"aggression":2,"attack":false}"#,
            "\n",
            r#"{"id":"2","text":"b","toxicity":[1],"aggression":[5],"attack":[true]}"#,
            "\n",
            r#"{"id":"1","text":"a","toxicity":3,"aggression":4,"attack":true}"#,
            "\n",
        ));
        let got = load_annotated(f.path()).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].id, "1");
        assert_eq!(got[0].toxicity_ratings, vec![3, 3]);
        assert_eq!(got[0].aggression_ratings, vec![2, 4]);
        assert_eq!(got[0].attack_flags, vec![false, true]);
        assert_eq!(got[1].toxicity_ratings, vec![1]);
    }

    #[test]
    fn load_annotated_tsv() {
        let f = write_file(
            "id\ttext\ttoxicity\taggression\tattack\n9\thi there\t2\t3\t1\n9\thi there\t4\t3\t0\n",
        );
        let got = load_annotated(f.path()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].toxicity_ratings, vec![2, 4]);
        assert_eq!(got[0].attack_flags, vec![true, false]);
    }

    #[test]
    fn load_annotated_rejects_bad_ratings() {
        let f = write_file(r#"{"id":"1","text":"a","toxicity":6,"aggression":2,"attack":false}"#);
        assert!(matches!(
            load_annotated(f.path()),
            Err(Error::InvalidRating { value: 6, .. })
        ));
        let f = write_file(r#"{"id":"1","text":"a","toxicity":[],"aggression":2,"attack":false}"#);
        assert!(matches!(
            load_annotated(f.path()),
            Err(Error::NoAnnotators {
                field: "toxicity",
                ..
            })
        ));
    }

    #[test]
    fn round_trip_articles() {
        let arts = vec![
            article("a", "Title", "Body text", &["Immigration", "Border"]),
            article("b", "", "Other \"quoted\" body\nwith newline", &[]),
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_jsonl(f.path(), &arts).unwrap();
        assert_eq!(load_articles(f.path()).unwrap(), arts);
    }

    #[test]
    fn keyword_filter() {
        let arts = vec![
            article("1", "", "Trump said the thing", &[]),
            article("2", "", "electioneering only", &[]),
            article("3", "The Election", "nothing", &[]),
        ];
        let kept = filter_by_keywords(&arts, &["trump"]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "1");
        let kept = filter_by_keywords(&arts, &["election"]);
        assert_eq!(
            kept.iter().map(|a| a.id.as_str()).collect::<Vec<_>>(),
            vec!["3"]
        );
        assert!(filter_by_keywords(&[], &["x"]).is_empty());
        let kept = filter_by_keywords(&arts, &["said the"]);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn tag_filter() {
        let arts = vec![
            article("1", "", "x", &["Immigration", "Border"]),
            article("2", "", "x", &[]),
        ];
        assert_eq!(filter_by_tag(&arts, "Immigration").len(), 1);
        assert_eq!(filter_by_tag(&arts, "immigration").len(), 1);
        assert!(filter_by_tag(&arts[1..], "Immigration").is_empty());
    }

    #[test]
    fn corpus_index_skips_dangling() {
        let arts = vec![article("a", "", "x", &[])];
        let comments = vec![
            Comment {
                id: "1".into(),
                article_id: "a".into(),
                text: "hi".into(),
            },
            Comment {
                id: "2".into(),
                article_id: "zz".into(),
                text: "hi".into(),
            },
        ];
        let c = Corpus::new(arts, comments);
        assert_eq!(c.comments_for("a").len(), 1);
        assert!(c.comments_for("zz").is_empty());
        assert_eq!(c.dangling_comments(), 1);
    }

    #[test]
    fn split_examples() {
        let items: Vec<u32> = (0..10).collect();
        let (train, test) = split(&items, 0.2, 7, None).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        assert_eq!(split(&items, 0.2, 7, None).unwrap(), (train, test));

        let labels: Vec<bool> = (0..10).map(|i| i < 5).collect();
        let (_, test) = split_indices(10, 0.2, 3, Some(&labels)).unwrap();
        assert_eq!(test.iter().filter(|&&i| labels[i]).count(), 1);
        assert_eq!(test.iter().filter(|&&i| !labels[i]).count(), 1);

        assert!(split(&items, 0.0, 1, None).is_err());
        assert!(split(&items, 1.0, 1, None).is_err());
        assert!(split(&items[..1], 0.5, 1, None).is_err());
    }

    #[test]
    fn sampler_is_seeded() {
        let items: Vec<u32> = (0..100).collect();
        let a = sample(&items, 10, 4);
        assert_eq!(a, sample(&items, 10, 4));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn split_partitions(n in 2usize..60, frac in 0.05f64..0.95, seed: u64, stratify: bool) {
            let labels: Vec<bool> = (0..n).map(|i| (i * 7 + seed as usize).is_multiple_of(3)).collect();
            let (train, test) = split_indices(n, frac, seed, stratify.then_some(&labels[..])).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            if stratify {
                for class in [true, false] {
                    let size = labels.iter().filter(|&&l| l == class).count();
                    let in_test = test.iter().filter(|&&i| labels[i] == class).count();
                    prop_assert!((in_test as f64 - size as f64 * frac).abs() <= 1.0);
                }
            }
        }

        #[test]
        fn keyword_union_is_monotone(
            words in proptest::collection::vec("[a-d]{1,2}", 1..12),
            k1 in proptest::collection::vec("[a-d]{1,2}", 0..3),
            k2 in proptest::collection::vec("[a-d]{1,2}", 0..3),
        ) {
            let arts: Vec<Article> = words
                .chunks(3)
                .enumerate()
                .map(|(i, w)| article(&i.to_string(), "", &w.join(" "), &[]))
                .collect();
            let union: Vec<String> = k1.iter().chain(&k2).cloned().collect();
            let small: HashSet<String> = filter_by_keywords(&arts, &k1).into_iter().map(|a| a.id).collect();
            let big: HashSet<String> = filter_by_keywords(&arts, &union).into_iter().map(|a| a.id).collect();
            prop_assert!(big.is_superset(&small));
        }
    }
}
