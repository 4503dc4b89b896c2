//! Sanity checks for the bundled training corpus.

use std::path::PathBuf;

use levgen_core::level::{extract_patterns, parse_level, TileVocabulary};
use levgen_core::sim::is_playable;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_vocab_parses() {
    let text = std::fs::read_to_string(data_dir().join("vocab.txt")).unwrap();
    let vocab = TileVocabulary::parse(&text).unwrap();
    assert_eq!(vocab.len(), 8);
    assert_eq!(vocab, TileVocabulary::default_alphabet());
}

#[test]
fn bundled_corpus_is_well_formed_and_playable() {
    let vocab = TileVocabulary::default_alphabet();
    let dir = data_dir().join("corpus");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    assert_eq!(paths.len(), 16, "expected the 16 bundled levels");

    let mut distinct = std::collections::HashSet::new();
    for path in &paths {
        let text = std::fs::read_to_string(path).unwrap();
        let level = parse_level(&text, &vocab)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!((level.height(), level.width()), (14, 28), "{}", path.display());
        assert!(is_playable(&level, &vocab), "{} must be playable", path.display());
        distinct.insert(level.cells().to_vec());
        // patterns must be extractable at the default size
        extract_patterns(&level, 2).unwrap();
    }
    assert_eq!(distinct.len(), paths.len(), "levels must be pairwise distinct");
}
