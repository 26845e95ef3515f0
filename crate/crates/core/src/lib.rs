//! Iterative relevance feedback (IRF) toolkit.
//!
//! The crate covers the whole experimental pipeline:
//!
//! * [`corpus_io`]: TREC collections, topics and qrels, plus text normalization
//!   (INQUERY stoplist and a Krovetz-style stemmer).
//! * [`index`]: an in-memory inverted index with a forward store and an on-disk snapshot.
//! * [`ranking`]: Dirichlet query likelihood, KL-divergence and dot-product rankers.
//! * [`feedback`]: the four feedback estimators (RM3, Distillation, Rocchio, Prob).
//! * [`irf_loop`]: the retrieve / judge / re-estimate session producing freezing rank lists.
//! * [`eval`]: MAP@1000, NDCG@20, Fisher randomization test and cross-validated grid search.
//!
//! A judgment budget of `k` documents per iteration over `n` iterations is split exactly as
//! configured; `n = 1` reproduces classic top-k relevance feedback.

pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod feedback;
pub mod index;
pub mod irf_loop;
pub mod params;
pub mod ranking;
pub mod synthetic;

pub use error::{Error, Result};
pub use index::CollectionIndex;
pub use params::ModelParams;
