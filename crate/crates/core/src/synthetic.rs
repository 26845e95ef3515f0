//! Seeded generator of small topical collections with known relevance.
//!
//! Every query owns a few query words and two planted topics. Relevant passages mix the
//! relevant topic with the query words; distractor passages mix a second topic with the same
//! query words, so the query alone cannot separate them but judged documents can.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{QrelSet, TermSequence, Topic};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub num_docs: usize,
    pub doc_len: usize,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub num_queries: usize,
    pub query_terms: usize,
    pub topic_terms: usize,
    pub relevant_per_query: usize,
    pub distractors_per_query: usize,
    /// Share of a topical passage's tokens drawn from its topic.
    pub topic_rate: f64,
    /// Share of a topical passage's tokens drawn from the query words.
    pub query_rate: f64,
    /// Share of a background passage's tokens drawn from some query's words.
    pub noise_query_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_docs: 5000,
            doc_len: 45,
            vocab_size: 20_000,
            zipf_exponent: 1.0,
            num_queries: 30,
            query_terms: 3,
            topic_terms: 40,
            relevant_per_query: 25,
            distractors_per_query: 25,
            topic_rate: 0.3,
            query_rate: 0.08,
            noise_query_rate: 0.05,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub docs: Vec<TermSequence>,
    pub topics: Vec<Topic>,
    pub qrels: QrelSet,
}

fn term(rank: usize) -> String {
    format!("w{rank}")
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCollection> {
    let c = config;
    let topical = c.num_queries * (c.relevant_per_query + c.distractors_per_query);
    let reserved = c.num_queries * (c.query_terms + 2 * c.topic_terms);
    if topical > c.num_docs || reserved * 2 > c.vocab_size || c.query_terms == 0 || c.doc_len == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic config cannot fit {topical} topical passages and {reserved} reserved terms"
        )));
    }
    if c.topic_rate + c.query_rate > 1.0 || !(0.0..=1.0).contains(&c.noise_query_rate) {
        return Err(Error::InvalidParameter("synthetic mixing rates must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let background = WeightedIndex::new((1..=c.vocab_size).map(|r| (r as f64).powf(-c.zipf_exponent)))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    // Reserved words come from the rarer half of the vocabulary.
    let mut pool: Vec<usize> = (c.vocab_size / 2..c.vocab_size).collect();
    pool.shuffle(&mut rng);
    let mut take = |n: usize| pool.split_off(pool.len() - n);
    struct Plan {
        query: Vec<usize>,
        relevant: Vec<usize>,
        distractor: Vec<usize>,
    }
    let plans: Vec<Plan> = (0..c.num_queries)
        .map(|_| Plan {
            query: take(c.query_terms),
            relevant: take(c.topic_terms),
            distractor: take(c.topic_terms),
        })
        .collect();

    let passage = |rng: &mut ChaCha8Rng, topic: Option<(&[usize], &[usize])>| -> Vec<String> {
        (0..c.doc_len)
            .map(|_| {
                let u: f64 = rng.gen();
                let rank = match topic {
                    Some((_, query)) if u < c.query_rate => *query.choose(rng).unwrap(),
                    Some((words, _)) if u < c.query_rate + c.topic_rate => *words.choose(rng).unwrap(),
                    None if u < c.noise_query_rate => {
                        *plans.choose(rng).unwrap().query.choose(rng).unwrap()
                    }
                    _ => background.sample(rng) + 1,
                };
                term(rank)
            })
            .collect()
    };

    let mut docs = Vec::with_capacity(c.num_docs);
    let mut qrels = QrelSet::new();
    let mut topics = Vec::with_capacity(c.num_queries);
    let mut next_id = {
        let mut ids: Vec<usize> = (0..c.num_docs).collect();
        ids.shuffle(&mut rng);
        move || format!("P{:05}", ids.pop().unwrap())
    };
    for (qi, plan) in plans.iter().enumerate() {
        let qid = format!("{}", 101 + qi);
        for _ in 0..c.relevant_per_query {
            let id = next_id();
            let terms = passage(&mut rng, Some((&plan.relevant, &plan.query)));
            qrels.insert(&qid, &id, rng.gen_range(1..=2));
            docs.push(TermSequence::new(id, terms));
        }
        for _ in 0..c.distractors_per_query {
            let id = next_id();
            let terms = passage(&mut rng, Some((&plan.distractor, &plan.query)));
            qrels.insert(&qid, &id, 0);
            docs.push(TermSequence::new(id, terms));
        }
        topics.push(Topic::new(qid, plan.query.iter().map(|&r| term(r))));
    }
    while docs.len() < c.num_docs {
        let id = next_id();
        let terms = passage(&mut rng, None);
        docs.push(TermSequence::new(id, terms));
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(SyntheticCollection { docs, topics, qrels })
}
