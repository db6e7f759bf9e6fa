use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Token, TokenStream};

/// Corpus whose two entity classes share context bags but not word order:
/// class-A entities occur as `e R x`, class-B entities as `x R e`, with `R`
/// drawn from a small set of relation words and `x` from a shared filler pool.
#[derive(Debug, Clone)]
pub struct OrderCorpus {
    pub stream: TokenStream,
    /// Entity ids with their class (`true` = A).
    pub entities: Vec<(String, bool)>,
}

#[derive(Debug, Clone)]
pub struct OrderCorpusSpec {
    pub entities_per_class: usize,
    pub sentences_per_entity: usize,
    pub relations: usize,
    pub fillers: usize,
    pub seed: u64,
}

impl Default for OrderCorpusSpec {
    fn default() -> Self {
        OrderCorpusSpec {
            entities_per_class: 100,
            sentences_per_entity: 40,
            relations: 3,
            fillers: 50,
            seed: 7,
        }
    }
}

pub fn order_corpus(spec: &OrderCorpusSpec) -> OrderCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entities = Vec::new();
    for i in 0..spec.entities_per_class {
        entities.push((format!("a{i}"), true));
        entities.push((format!("b{i}"), false));
    }
    let mut sentences = Vec::new();
    for (id, class_a) in &entities {
        for _ in 0..spec.sentences_per_entity {
            let r = Token::Word(format!("rel{}", rng.gen_range(0..spec.relations)));
            let x = Token::Word(format!("w{}", rng.gen_range(0..spec.fillers)));
            let e = Token::Entity(id.clone());
            sentences.push(if *class_a { vec![e, r, x] } else { vec![x, r, e] });
        }
    }
    sentences.shuffle(&mut rng);
    OrderCorpus {
        stream: TokenStream { sentences },
        entities,
    }
}
