//! Tile-grid levels: text I/O, one-hot encoding, tile-pattern statistics.
//!
//! A level is an `H x W` grid of indices into a [`TileVocabulary`]. The text
//! format is one character per tile, rows top to bottom. One-hot encodings
//! are flattened `(row * width + col) * vocab + channel`, which is also the
//! layout the generator and discriminator operate on.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Semantic tile classes the simulator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileCategory {
    Empty,
    Solid,
    Breakable,
    QuestionBox,
    Coin,
    Hazard,
    PipeBody,
    Platform,
}

impl FromStr for TileCategory {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, LevelError> {
        Ok(match s {
            "Empty" => Self::Empty,
            "Solid" => Self::Solid,
            "Breakable" => Self::Breakable,
            "QuestionBox" => Self::QuestionBox,
            "Coin" => Self::Coin,
            "Hazard" => Self::Hazard,
            "PipeBody" => Self::PipeBody,
            "Platform" => Self::Platform,
            other => return Err(LevelError::UnknownCategory(other.to_string())),
        })
    }
}

impl fmt::Display for TileCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Empty => "Empty",
            Self::Solid => "Solid",
            Self::Breakable => "Breakable",
            Self::QuestionBox => "QuestionBox",
            Self::Coin => "Coin",
            Self::Hazard => "Hazard",
            Self::PipeBody => "PipeBody",
            Self::Platform => "Platform",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("unknown symbol {ch:?} at row {row}, col {col}")]
    UnknownSymbol { row: usize, col: usize, ch: char },
    #[error("line {0} has a different length than the first line")]
    RaggedLines(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("unknown tile category {0:?}")]
    UnknownCategory(String),
    #[error("duplicate symbol {0:?} in vocabulary")]
    DuplicateSymbol(char),
    #[error("vocabulary needs at least Empty and Solid entries")]
    IncompleteVocabulary,
    #[error("non-finite value in logits")]
    NonFiniteInput,
    #[error("pattern size {k} exceeds level dimensions {h}x{w}")]
    PatternTooLarge { k: usize, h: usize, w: usize },
    #[error("level shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("cell index {0} outside vocabulary of size {1}")]
    IndexOutOfRange(usize, usize),
}

/// Ordered tile alphabet. Entry order fixes the channel index used by
/// one-hot encodings, so it must not change once models are trained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileVocabulary {
    entries: Vec<(char, TileCategory)>,
}

impl TileVocabulary {
    pub fn new(entries: Vec<(char, TileCategory)>) -> Result<Self, LevelError> {
        let mut seen = std::collections::HashSet::new();
        for &(ch, _) in &entries {
            if !seen.insert(ch) {
                return Err(LevelError::DuplicateSymbol(ch));
            }
        }
        let has = |cat: TileCategory| entries.iter().any(|&(_, c)| c == cat);
        if entries.len() < 2 || !has(TileCategory::Empty) || !has(TileCategory::Solid) {
            return Err(LevelError::IncompleteVocabulary);
        }
        Ok(Self { entries })
    }

    /// Default alphabet used by the bundled corpus.
    pub fn default_alphabet() -> Self {
        Self::new(vec![
            ('-', TileCategory::Empty),
            ('X', TileCategory::Solid),
            ('S', TileCategory::Breakable),
            ('?', TileCategory::QuestionBox),
            ('o', TileCategory::Coin),
            ('E', TileCategory::Hazard),
            ('|', TileCategory::PipeBody),
            ('T', TileCategory::Platform),
        ])
        .expect("default alphabet is valid")
    }

    /// Parses a mapping file: one `<char> <category>` pair per line,
    /// `#`-prefixed lines and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, LevelError> {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (sym, cat) = match (it.next(), it.next()) {
                (Some(s), Some(c)) if s.chars().count() == 1 => (s.chars().next().unwrap(), c),
                _ => return Err(LevelError::UnknownCategory(line.to_string())),
            };
            entries.push((sym, cat.parse()?));
        }
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn symbol(&self, index: usize) -> char {
        self.entries[index].0
    }

    pub fn category(&self, index: usize) -> TileCategory {
        self.entries[index].1
    }

    pub fn index_of(&self, ch: char) -> Option<usize> {
        self.entries.iter().position(|&(c, _)| c == ch)
    }

    /// First entry index carrying the given category, if any.
    pub fn index_of_category(&self, cat: TileCategory) -> Option<usize> {
        self.entries.iter().position(|&(_, c)| c == cat)
    }
}

/// H x W grid of vocabulary indices, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    height: usize,
    width: usize,
    cells: Vec<u8>,
}

impl Level {
    pub fn new(height: usize, width: usize, cells: Vec<u8>) -> Self {
        assert_eq!(cells.len(), height * width, "cell count must be H*W");
        Self { height, width, cells }
    }

    pub fn filled(height: usize, width: usize, value: u8) -> Self {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.cells[row * self.width + col] = value;
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }
}

/// Frequency distribution of k x k tile windows (stride 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDistribution {
    k: usize,
    counts: BTreeMap<Vec<u8>, u64>,
    total: u64,
}

impl PatternDistribution {
    /// Builds a distribution from raw pattern counts. Zero-count entries
    /// are dropped so every stored frequency is positive.
    pub fn from_counts(k: usize, counts: BTreeMap<Vec<u8>, u64>) -> Self {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        let total = counts.values().sum();
        Self { k, counts, total }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<Vec<u8>, u64> {
        &self.counts
    }

    pub fn probability(&self, pattern: &[u8]) -> f64 {
        match self.counts.get(pattern) {
            Some(&n) => n as f64 / self.total as f64,
            None => 0.0,
        }
    }

    /// Merges several distributions into one pooled distribution.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a PatternDistribution>) -> Self {
        let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        let mut k = 0;
        for p in parts {
            k = p.k;
            for (pat, n) in &p.counts {
                *counts.entry(pat.clone()).or_insert(0) += n;
            }
        }
        Self::from_counts(k, counts)
    }
}

/// Parses a level from its text form.
pub fn parse_level(text: &str, vocab: &TileVocabulary) -> Result<Level, LevelError> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return Err(LevelError::EmptyInput);
    }
    let width = lines[0].chars().count();
    if width == 0 {
        return Err(LevelError::EmptyInput);
    }
    let mut cells = Vec::with_capacity(lines.len() * width);
    for (row, line) in lines.iter().enumerate() {
        if line.chars().count() != width {
            return Err(LevelError::RaggedLines(row));
        }
        for (col, ch) in line.chars().enumerate() {
            let idx = vocab
                .index_of(ch)
                .ok_or(LevelError::UnknownSymbol { row, col, ch })?;
            cells.push(idx as u8);
        }
    }
    Ok(Level::new(lines.len(), width, cells))
}

/// Inverse of [`parse_level`].
pub fn serialize_level(level: &Level, vocab: &TileVocabulary) -> Result<String, LevelError> {
    let mut out = String::with_capacity(level.height * (level.width + 1));
    for row in 0..level.height {
        for col in 0..level.width {
            let idx = level.get(row, col) as usize;
            if idx >= vocab.len() {
                return Err(LevelError::IndexOutOfRange(idx, vocab.len()));
            }
            out.push(vocab.symbol(idx));
        }
        if row + 1 < level.height {
            out.push('\n');
        }
    }
    Ok(out)
}

/// One-hot encoding flattened as `(row * W + col) * V + channel`.
pub fn one_hot(level: &Level, vocab_size: usize) -> Vec<f64> {
    let mut out = vec![0.0; level.height * level.width * vocab_size];
    for (i, &cell) in level.cells.iter().enumerate() {
        out[i * vocab_size + cell as usize] = 1.0;
    }
    out
}

/// Argmax decode of a logits grid; ties resolve to the lowest channel.
pub fn decode_logits(
    logits: &[f64],
    height: usize,
    width: usize,
    vocab_size: usize,
) -> Result<Level, LevelError> {
    assert_eq!(logits.len(), height * width * vocab_size, "logit grid shape");
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(LevelError::NonFiniteInput);
    }
    let mut cells = Vec::with_capacity(height * width);
    for cell in logits.chunks_exact(vocab_size) {
        let mut best = 0;
        for (v, &x) in cell.iter().enumerate() {
            if x > cell[best] {
                best = v;
            }
        }
        cells.push(best as u8);
    }
    Ok(Level::new(height, width, cells))
}

/// Counts every k x k window of the level, stride 1 in both directions.
pub fn extract_patterns(level: &Level, k: usize) -> Result<PatternDistribution, LevelError> {
    if k == 0 || k > level.height || k > level.width {
        return Err(LevelError::PatternTooLarge { k, h: level.height, w: level.width });
    }
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for r in 0..=(level.height - k) {
        for c in 0..=(level.width - k) {
            let mut pat = Vec::with_capacity(k * k);
            for dr in 0..k {
                for dc in 0..k {
                    pat.push(level.get(r + dr, c + dc));
                }
            }
            *counts.entry(pat).or_insert(0) += 1;
        }
    }
    Ok(PatternDistribution::from_counts(k, counts))
}

/// Number of cells where the two levels differ.
pub fn hamming(a: &Level, b: &Level) -> Result<usize, LevelError> {
    if a.height != b.height || a.width != b.width {
        return Err(LevelError::ShapeMismatch(a.height, a.width, b.height, b.width));
    }
    Ok(a.cells.iter().zip(&b.cells).filter(|(x, y)| x != y).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn two_tile_vocab() -> TileVocabulary {
        TileVocabulary::new(vec![('-', TileCategory::Empty), ('X', TileCategory::Solid)])
            .unwrap()
    }

    #[test]
    fn parse_maps_symbols_to_indices() {
        let level = parse_level("--\nXX", &two_tile_vocab()).unwrap();
        assert_eq!(level.cells(), &[0, 0, 1, 1]);
        assert_eq!((level.height(), level.width()), (2, 2));
    }

    #[test]
    fn parse_rejects_unknown_symbol() {
        let err = parse_level("X?\n--", &two_tile_vocab()).unwrap_err();
        match err {
            LevelError::UnknownSymbol { row: 0, col: 1, ch: '?' } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_ragged_and_empty() {
        assert!(matches!(
            parse_level("--\nX", &two_tile_vocab()),
            Err(LevelError::RaggedLines(1))
        ));
        assert!(matches!(parse_level("", &two_tile_vocab()), Err(LevelError::EmptyInput)));
    }

    #[test]
    fn serialize_simple_cases() {
        let vocab = two_tile_vocab();
        let level = Level::new(2, 2, vec![0, 0, 1, 1]);
        assert_eq!(serialize_level(&level, &vocab).unwrap(), "--\nXX");
        let one = Level::new(1, 1, vec![1]);
        assert_eq!(serialize_level(&one, &vocab).unwrap(), "X");
    }

    #[test]
    fn one_hot_basics() {
        let level = Level::new(1, 1, vec![1]);
        assert_eq!(one_hot(&level, 3), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn decode_ties_pick_lowest_channel() {
        let level = decode_logits(&[0.5, 0.5, 0.1], 1, 1, 3).unwrap();
        assert_eq!(level.cells(), &[0]);
        let level = decode_logits(&[0.1, 0.9, 0.2], 1, 1, 3).unwrap();
        assert_eq!(level.cells(), &[1]);
        let level = decode_logits(&[0.0; 6], 1, 2, 3).unwrap();
        assert_eq!(level.cells(), &[0, 0]);
    }

    #[test]
    fn decode_rejects_non_finite() {
        assert!(matches!(
            decode_logits(&[0.0, f64::NAN], 1, 1, 2),
            Err(LevelError::NonFiniteInput)
        ));
    }

    #[test]
    fn uniform_level_has_single_pattern() {
        let level = Level::filled(14, 28, 0);
        let dist = extract_patterns(&level, 2).unwrap();
        assert_eq!(dist.total(), 13 * 27);
        assert_eq!(dist.counts().len(), 1);
        assert!((dist.probability(&[0, 0, 0, 0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_level_pattern_counts() {
        let level = Level::new(2, 2, vec![0, 1, 1, 0]);
        let dist = extract_patterns(&level, 2).unwrap();
        assert_eq!(dist.total(), 1);
        assert_eq!(dist.counts().get(&vec![0, 1, 1, 0]), Some(&1));
    }

    #[test]
    fn pattern_totals_match_brute_force_window_enumeration() {
        // 2x3 level, k=2: windows enumerated by hand.
        let level = Level::new(2, 3, vec![0, 1, 0, 1, 0, 1]);
        let dist = extract_patterns(&level, 2).unwrap();
        assert_eq!(dist.total(), 2);
        assert_eq!(dist.counts().get(&vec![0, 1, 1, 0]), Some(&1));
        assert_eq!(dist.counts().get(&vec![1, 0, 0, 1]), Some(&1));
    }

    #[test]
    fn pattern_too_large_is_rejected() {
        let level = Level::new(2, 2, vec![0; 4]);
        assert!(matches!(
            extract_patterns(&level, 3),
            Err(LevelError::PatternTooLarge { .. })
        ));
    }

    #[test]
    fn hamming_examples() {
        let a = Level::new(2, 2, vec![0, 1, 1, 0]);
        let b = Level::new(2, 2, vec![1, 0, 0, 1]);
        assert_eq!(hamming(&a, &a).unwrap(), 0);
        assert_eq!(hamming(&a, &b).unwrap(), 4);
        let c = Level::new(2, 3, vec![0; 6]);
        assert!(matches!(hamming(&a, &c), Err(LevelError::ShapeMismatch(..))));
    }

    #[test]
    fn hamming_matches_per_cell_loop() {
        let mut rng = crate::rng::stream(9, &[1]);
        for _ in 0..20 {
            let a = Level::new(6, 7, (0..42).map(|_| rng.gen_range(0..4u8)).collect());
            let b = Level::new(6, 7, (0..42).map(|_| rng.gen_range(0..4u8)).collect());
            let mut expect = 0;
            for r in 0..6 {
                for c in 0..7 {
                    if a.get(r, c) != b.get(r, c) {
                        expect += 1;
                    }
                }
            }
            assert_eq!(hamming(&a, &b).unwrap(), expect);
        }
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(cells in proptest::collection::vec(0u8..2, 1..120),
                                      width in 1usize..12) {
            let height = cells.len() / width;
            prop_assume!(height >= 1);
            let cells = cells[..height * width].to_vec();
            let vocab = two_tile_vocab();
            let level = Level::new(height, width, cells);
            let text = serialize_level(&level, &vocab).unwrap();
            let back = parse_level(&text, &vocab).unwrap();
            prop_assert_eq!(back, level);
        }

        #[test]
        fn one_hot_decode_round_trip(cells in proptest::collection::vec(0u8..5, 24)) {
            let level = Level::new(4, 6, cells);
            let encoded = one_hot(&level, 5);
            // every cell slice sums to one
            for chunk in encoded.chunks_exact(5) {
                prop_assert!((chunk.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
            let back = decode_logits(&encoded, 4, 6, 5).unwrap();
            prop_assert_eq!(back, level);
        }

        #[test]
        fn pattern_distribution_normalizes(cells in proptest::collection::vec(0u8..3, 36),
                                           k in 1usize..4) {
            let level = Level::new(6, 6, cells);
            let dist = extract_patterns(&level, k).unwrap();
            let windows = ((6 - k + 1) * (6 - k + 1)) as u64;
            prop_assert_eq!(dist.total(), windows);
            let sum: f64 = dist.counts().values().map(|&n| n as f64 / dist.total() as f64).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hamming_is_a_metric(a in proptest::collection::vec(0u8..3, 20),
                               b in proptest::collection::vec(0u8..3, 20),
                               c in proptest::collection::vec(0u8..3, 20)) {
            let la = Level::new(4, 5, a);
            let lb = Level::new(4, 5, b);
            let lc = Level::new(4, 5, c);
            let dab = hamming(&la, &lb).unwrap();
            let dba = hamming(&lb, &la).unwrap();
            let dac = hamming(&la, &lc).unwrap();
            let dcb = hamming(&lc, &lb).unwrap();
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(dab == 0, la == lb);
            prop_assert!(dab <= dac + dcb);
        }
    }
}
