use mulr::corpus::{build_vocabulary, extract_subwords, SubwordIndex, Token, TokenStream};
use mulr::embed::{train_subword_sgns, EmbeddingKind, EmbeddingStore, SgnsConfig};

fn stream() -> TokenStream {
    let lines = [
        "the nectar of the tangerine was sweet",
        "a marine saw the nectar",
        "the tangerine grew near the marine coast",
        "sweet nectar and sweet tangerine",
    ];
    let sentences = lines
        .iter()
        .cycle()
        .take(200)
        .map(|l| l.split(' ').map(|w| Token::Word(w.into())).collect())
        .collect();
    TokenStream { sentences }
}

fn trained() -> EmbeddingStore {
    let s = stream();
    let vocab = build_vocabulary(&s, 1).unwrap();
    let index = SubwordIndex::build(&vocab, 3, 6, 1).unwrap();
    let cfg = SgnsConfig { dim: 16, negatives: 3, window: 2, epochs: 2, table_size: 10_000, ..Default::default() };
    train_subword_sgns(&s, &vocab, &index, &cfg).unwrap()
}

#[test]
fn unseen_word_composes_from_trained_ngrams() {
    let store = trained();
    assert!(store.get("nectarine").is_none());
    let v = store.word_or_compose("nectarine").unwrap();
    assert!(v.iter().any(|&x| x != 0.0));

    // Brute-force composition: mean over the indexed ngrams of the word.
    let table = store.subwords().unwrap();
    let ids: Vec<usize> = extract_subwords("nectarine", 3, 6).iter().filter_map(|g| table.index.index_of(g)).collect();
    assert!(!ids.is_empty());
    for (d, x) in v.iter().enumerate() {
        let want = ids.iter().map(|&i| table.vectors.row(i)[d]).sum::<f64>() / ids.len() as f64;
        assert!((x - want).abs() < 1e-12);
    }
}

#[test]
fn trained_word_equals_its_composition() {
    let store = trained();
    let table = store.subwords().unwrap();
    let stored = store.get("tangerine").unwrap();
    let composed = table.compose("tangerine").unwrap();
    for (a, b) in stored.iter().zip(&composed) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn word_without_indexed_ngrams_has_no_vector() {
    let store = trained();
    assert!(store.word_or_compose("qqqq").is_none());
}

#[test]
fn subword_store_round_trips_through_text() {
    let store = trained();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub.vec");
    store.save_text(&path).unwrap();
    let back = EmbeddingStore::load_text(&path, EmbeddingKind::Subword).unwrap();
    assert_eq!(back, store);
    assert_eq!(back.word_or_compose("nectarine"), store.word_or_compose("nectarine"));
}
