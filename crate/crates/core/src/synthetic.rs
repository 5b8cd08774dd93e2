//! Seeded synthetic labeled data for sanity checks, examples and
//! benchmarks. Nothing here resembles real annotations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stance::{Label, LabeledExample};

const MARKERS: [[&str; 2]; 3] = [["aaa", "bbb"], ["ccc", "ddd"], ["eee", "fff"]];

/// Linearly separable set: each label owns two marker words, every text
/// carries its label's markers plus one shared filler word. Labels cycle
/// through the first `classes` labels (2 or 3).
pub fn separable(n: usize, classes: usize, seed: u64) -> Vec<LabeledExample> {
    let classes = classes.clamp(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let c = i % classes;
            let [a, b] = MARKERS[c];
            let filler = format!("w{}", rng.gen_range(0..50));
            let mut words = vec![a, b, filler.as_str()];
            if rng.gen_bool(0.5) {
                words.push(a);
            }
            words.shuffle(&mut rng);
            LabeledExample::new(words.join(" "), Label::from_index(c))
        })
        .collect()
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(5..9);
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

/// Three balanced classes, each with a pool of `pool` indicative words;
/// texts hold two class words and three shared filler words. With
/// probability `noise` the label is replaced by a different random label.
pub fn noisy(n: usize, pool: usize, noise: f64, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<Vec<String>> = (0..3)
        .map(|_| (0..pool).map(|_| random_word(&mut rng)).collect())
        .collect();
    let filler: Vec<String> = (0..40).map(|_| random_word(&mut rng)).collect();
    (0..n)
        .map(|_| {
            let c = rng.gen_range(0..3);
            let mut words: Vec<&str> = Vec::with_capacity(5);
            for _ in 0..2 {
                words.push(&vocab[c][rng.gen_range(0..pool)]);
            }
            for _ in 0..3 {
                words.push(&filler[rng.gen_range(0..filler.len())]);
            }
            words.shuffle(&mut rng);
            let shift = rng.gen_range(1..3);
            let label = if rng.gen_bool(noise) {
                (c + shift) % 3
            } else {
                c
            };
            LabeledExample::new(words.join(" "), Label::from_index(label))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_shape() {
        let d = separable(9, 3, 1);
        assert_eq!(d.len(), 9);
        assert_eq!(d[4].label, Label::Rejects);
        assert!(d[4].text.contains("ccc") && d[4].text.contains("ddd"));
        assert_eq!(d, separable(9, 3, 1));
        assert!(separable(10, 2, 1).iter().all(|e| e.label != Label::Other));
    }

    #[test]
    fn noise_rate() {
        let clean = noisy(3000, 20, 0.0, 5);
        let dirty = noisy(3000, 20, 0.1, 5);
        let flipped = clean.iter().zip(&dirty).filter(|(a, b)| a.label != b.label).count();
        // same texts, only labels change
        assert!(clean.iter().zip(&dirty).all(|(a, b)| a.text == b.text));
        let rate = flipped as f64 / 3000.0;
        assert!((rate - 0.1).abs() < 0.02, "{rate}");
    }
}
