//! Word and hashed character n-gram features.

use std::collections::HashMap;

use crate::tokenize::tokens;

/// 32-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in s.as_bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Character n-grams of `<word>` with lengths `min..=max`.
pub fn char_ngrams(word: &str, min: usize, max: usize) -> Vec<String> {
    let padded: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for start in 0..padded.len() {
        for len in min..=max {
            if start + len > padded.len() {
                break;
            }
            out.push(padded[start..start + len].iter().collect());
        }
    }
    out
}

/// Maps text to feature ids: `[0, vocab)` are words, `[vocab, vocab + bucket)`
/// are hashed n-grams.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurizer {
    vocab: HashMap<String, u32>,
    words: Vec<String>,
    ngram_min: usize,
    ngram_max: usize,
    bucket: u32,
}

impl Featurizer {
    /// Builds the vocabulary in order of first occurrence.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, ngram_min: usize, ngram_max: usize, bucket: u32) -> Self {
        let mut words = Vec::new();
        let mut vocab = HashMap::new();
        for text in texts {
            for tok in tokens(text) {
                if !vocab.contains_key(&tok) {
                    vocab.insert(tok.clone(), words.len() as u32);
                    words.push(tok);
                }
            }
        }
        Featurizer {
            vocab,
            words,
            ngram_min,
            ngram_max,
            bucket,
        }
    }

    pub fn from_words(words: Vec<String>, ngram_min: usize, ngram_max: usize, bucket: u32) -> Self {
        let vocab = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Featurizer {
            vocab,
            words,
            ngram_min,
            ngram_max,
            bucket,
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vocab_len(&self) -> u32 {
        self.words.len() as u32
    }

    /// Total rows of the (virtual) embedding table.
    pub fn rows(&self) -> u64 {
        self.words.len() as u64 + self.bucket as u64
    }

    pub fn features(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        let offset = self.vocab_len();
        for tok in tokens(text) {
            if let Some(&id) = self.vocab.get(&tok) {
                out.push(id);
            }
            for gram in char_ngrams(&tok, self.ngram_min, self.ngram_max) {
                out.push(offset + fnv1a(&gram) % self.bucket);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0x811c9dc5);
        assert_eq!(fnv1a("a"), 0xe40c292c);
        assert_eq!(fnv1a("foobar"), 0xbf9cf968);
    }

    #[test]
    fn ngrams_of_short_word() {
        assert_eq!(char_ngrams("ab", 3, 4), vec!["<ab", "<ab>", "ab>"]);
        assert!(char_ngrams("", 3, 6).is_empty());
        assert_eq!(char_ngrams("é", 3, 3), vec!["<é>"]);
    }

    #[test]
    fn features_words_and_unknowns() {
        let f = Featurizer::build(["hou afstand"], 3, 3, 100);
        assert_eq!(f.words(), &["hou".to_string(), "afstand".to_string()]);
        let known = f.features("hou");
        assert_eq!(known[0], 0);
        assert_eq!(known.len(), 1 + 3);
        assert!(known[1..].iter().all(|&id| (2..102).contains(&id)));
        // unknown word: n-grams only
        assert_eq!(f.features("xyz").len(), 3);
        assert!(f.features("").is_empty());
    }
}
