//! Incivility scoring for news comments, prediction of articles that provoke
//! uncivil discussion, and two-phase LDA mining of comment subtext.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] loads articles, comments and annotated training comments.
//! * [`textproc`] tokenizes text and builds n-gram vocabularies.
//! * [`features`] turns documents into L2-normalised TF-IDF vectors.
//! * [`linmodel`] trains logistic regression and computes evaluation metrics.
//! * [`incivility`] scores comments, weights articles and trains the
//!   provoking-article classifier.
//! * [`lda`] is a collapsed Gibbs sampler for latent Dirichlet allocation.
//! * [`subtext`] runs LDA over articles and then over their comments with
//!   the article phrases excluded.
//! * [`synthetic`] generates planted-signal corpora for end-to-end tests.

pub mod corpus;
pub mod error;
pub mod features;
pub mod incivility;
pub mod lda;
pub mod linmodel;
pub mod subtext;
pub mod synthetic;
pub mod textproc;

pub use error::{Error, Result};
