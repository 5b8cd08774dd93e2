use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::Featurizer;
use super::label::{Label, LabeledExample, NUM_LABELS};
use super::network::{init_row, LinearNet, RowIndex};
use crate::error::{Error, Result};

/// Training configuration. Defaults follow common fastText-style settings
/// for supervised text classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub char_ngram_min: usize,
    pub char_ngram_max: usize,
    pub bucket: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 100,
            epochs: 5,
            lr: 0.1,
            char_ngram_min: 3,
            char_ngram_max: 6,
            bucket: 2_000_000,
            seed: 42,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Hyperparams(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be positive");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail("lr must be a positive number");
        }
        if self.char_ngram_min == 0 || self.char_ngram_min > self.char_ngram_max {
            return fail("need 1 <= char_ngram_min <= char_ngram_max");
        }
        if self.bucket == 0 || self.bucket > (u32::MAX / 2) as usize {
            return fail("bucket must be in 1..=2^31");
        }
        Ok(())
    }
}

/// Trained stance classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct StanceModel {
    hyperparams: Hyperparams,
    featurizer: Featurizer,
    rows: RowIndex,
    net: LinearNet,
}

/// Output of [`StanceModel::predict`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// In [`Label::ORDER`].
    pub probs: [f64; NUM_LABELS],
}

/// Label with the highest probability; ties go to the earlier label.
pub fn argmax(probs: &[f64; NUM_LABELS]) -> Label {
    let mut best = 0;
    for k in 1..NUM_LABELS {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    Label::from_index(best)
}

/// Trains a model. Deterministic for fixed `(examples, hp)`.
pub fn train(examples: &[LabeledExample], hp: &Hyperparams) -> Result<StanceModel> {
    Ok(train_traced(examples, hp, false)?.0)
}

/// Like [`train`], also returning the mean training-set loss after every
/// epoch when `trace` is set.
pub fn train_traced(
    examples: &[LabeledExample],
    hp: &Hyperparams,
    trace: bool,
) -> Result<(StanceModel, Vec<f64>)> {
    hp.validate()?;
    if examples.is_empty() {
        return Err(Error::DegenerateTrainingSet("no examples".into()));
    }
    let first = examples[0].label;
    if examples.iter().all(|e| e.label == first) {
        return Err(Error::DegenerateTrainingSet(format!(
            "every example is labeled {first}"
        )));
    }

    let featurizer = Featurizer::build(
        examples.iter().map(|e| e.text.as_str()),
        hp.char_ngram_min,
        hp.char_ngram_max,
        hp.bucket as u32,
    );
    let global: Vec<Vec<u32>> = examples.iter().map(|e| featurizer.features(&e.text)).collect();
    let mut ids: Vec<u32> = global.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let rows = RowIndex::from_sorted(ids);
    let compact: Vec<Vec<usize>> = global
        .iter()
        .map(|f| f.iter().map(|&id| rows.get(id).expect("indexed")).collect())
        .collect();

    let mut net = LinearNet::new(hp.dim, hp.seed, rows.ids());
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let total_updates = (hp.epochs * examples.len()) as f64;
    let mut step = 0usize;
    let mut losses = Vec::new();
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let lr = hp.lr * (1.0 - step as f64 / total_updates);
            net.sgd_step(&compact[i], examples[i].label, lr);
            step += 1;
        }
        if trace {
            let sum: f64 = compact
                .iter()
                .zip(examples)
                .map(|(f, e)| net.loss(f, e.label))
                .sum();
            losses.push(sum / examples.len() as f64);
        }
    }
    net.round_to_f32();

    Ok((
        StanceModel {
            hyperparams: *hp,
            featurizer,
            rows,
            net,
        },
        losses,
    ))
}

impl StanceModel {
    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn vocab(&self) -> &[String] {
        self.featurizer.words()
    }

    /// Parameters over the rows materialised during training.
    pub fn network(&self) -> &LinearNet {
        &self.net
    }

    /// Compact row indices of `text`, or `None` if some feature was never
    /// seen in training.
    pub fn compact_features(&self, text: &str) -> Option<Vec<usize>> {
        self.featurizer
            .features(text)
            .into_iter()
            .map(|id| self.rows.get(id))
            .collect()
    }

    fn hidden(&self, text: &str) -> Vec<f64> {
        let dim = self.hyperparams.dim;
        let features = self.featurizer.features(text);
        let mut h = vec![0.0; dim];
        if features.is_empty() {
            return h;
        }
        for id in &features {
            match self.rows.get(*id) {
                Some(r) => h.iter_mut().zip(self.net.row(r)).for_each(|(a, b)| *a += b),
                None => h
                    .iter_mut()
                    .zip(init_row(self.hyperparams.seed, *id, dim))
                    .for_each(|(a, b)| *a += b),
            }
        }
        let inv = 1.0 / features.len() as f64;
        h.iter_mut().for_each(|x| *x *= inv);
        h
    }

    pub fn predict(&self, text: &str) -> Prediction {
        let probs = self.net.probs_for_hidden(&self.hidden(text));
        Prediction {
            label: argmax(&probs),
            probs,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&raw)
    }

    /// JSON document with base64 little-endian arrays.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let dim = self.hyperparams.dim;
        let mut input = Vec::with_capacity(self.net.n_rows() * dim);
        for r in 0..self.net.n_rows() {
            input.extend_from_slice(self.net.row(r));
        }
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            hyperparams: self.hyperparams,
            label_order: Label::ORDER.to_vec(),
            vocab: self.featurizer.words().to_vec(),
            input_rows: encode_u32(self.rows.ids()),
            input: encode_f32(&input),
            output: encode_f32(self.net.output()),
            bias: encode_f32(self.net.bias()),
        };
        let mut bytes = serde_json::to_vec(&file)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self> {
        let file: ModelFile = serde_json::from_slice(raw)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported format_version {}", file.format_version)));
        }
        if file.label_order != Label::ORDER {
            return Err(Error::Model("unexpected label_order".into()));
        }
        let hp = file.hyperparams;
        hp.validate()?;
        let dim = hp.dim;
        let ids = decode_u32(&file.input_rows)?;
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Model("input_rows must be strictly increasing".into()));
        }
        let input = decode_f32(&file.input)?;
        let output = decode_f32(&file.output)?;
        let bias = decode_f32(&file.bias)?;
        if input.len() != ids.len() * dim || output.len() != NUM_LABELS * dim || bias.len() != NUM_LABELS {
            return Err(Error::Model("array sizes do not match hyperparams".into()));
        }
        let featurizer = Featurizer::from_words(file.vocab, hp.char_ngram_min, hp.char_ngram_max, hp.bucket as u32);
        if ids.last().is_some_and(|&id| id as u64 >= featurizer.rows()) {
            return Err(Error::Model("row id outside the embedding table".into()));
        }
        Ok(StanceModel {
            hyperparams: hp,
            featurizer,
            rows: RowIndex::from_sorted(ids),
            net: LinearNet::from_parts(dim, input, output, [bias[0], bias[1], bias[2]]),
        })
    }
}

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    hyperparams: Hyperparams,
    label_order: Vec<Label>,
    vocab: Vec<String>,
    input_rows: String,
    input: String,
    output: String,
    bias: String,
}

fn encode_u32(xs: &[u32]) -> String {
    let bytes: Vec<u8> = xs.iter().flat_map(|x| x.to_le_bytes()).collect();
    BASE64.encode(bytes)
}

fn encode_f32(xs: &[f64]) -> String {
    let bytes: Vec<u8> = xs.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect();
    BASE64.encode(bytes)
}

fn decode_chunks(s: &str) -> Result<Vec<[u8; 4]>> {
    let bytes = BASE64
        .decode(s)
        .map_err(|e| Error::Model(format!("bad base64: {e}")))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Model("array length is not a multiple of 4 bytes".into()));
    }
    Ok(bytes.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

fn decode_u32(s: &str) -> Result<Vec<u32>> {
    Ok(decode_chunks(s)?.into_iter().map(u32::from_le_bytes).collect())
}

fn decode_f32(s: &str) -> Result<Vec<f64>> {
    Ok(decode_chunks(s)?
        .into_iter()
        .map(|b| f32::from_le_bytes(b) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stance::test_support::separable;

    fn small_hp() -> Hyperparams {
        Hyperparams {
            dim: 10,
            epochs: 20,
            lr: 0.2,
            bucket: 10_000,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn separable_training_accuracy() {
        let data = separable(200, 2, 1);
        let model = train(&data, &small_hp()).unwrap();
        let correct = data.iter().filter(|e| model.predict(&e.text).label == e.label).count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn deterministic_training() {
        let data = separable(60, 3, 5);
        let a = train(&data, &small_hp()).unwrap();
        let b = train(&data, &small_hp()).unwrap();
        for probe in ["aaa bbb", "ccc", "onbekend woord", ""] {
            assert_eq!(a.predict(probe), b.predict(probe));
        }
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
    }

    #[test]
    fn degenerate_training_sets() {
        let all_other: Vec<_> = (0..5).map(|i| LabeledExample::new(format!("t {i}"), Label::Other)).collect();
        assert!(matches!(train(&all_other, &small_hp()), Err(Error::DegenerateTrainingSet(_))));
        assert!(train(&[], &small_hp()).is_err());
        let bad = Hyperparams { lr: 0.0, ..small_hp() };
        assert!(matches!(train(&separable(10, 2, 1), &bad), Err(Error::Hyperparams(_))));
    }

    #[test]
    fn empty_text_uses_biases() {
        let model = train(&separable(30, 3, 2), &small_hp()).unwrap();
        let p = model.predict("");
        assert_eq!(p.probs, super::super::network::softmax(model.network().bias()));
        assert_eq!(p.label, argmax(&p.probs));
        assert_eq!(p, model.predict("   ...  "));
    }

    #[test]
    fn argmax_ties_follow_label_order() {
        assert_eq!(argmax(&[0.4, 0.4, 0.2]), Label::Supports);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), Label::Rejects);
        assert_eq!(argmax(&[1.0 / 3.0; 3]), Label::Supports);
    }

    #[test]
    fn save_load_bit_exact() {
        let model = train(&separable(90, 3, 4), &small_hp()).unwrap();
        let bytes = model.to_bytes().unwrap();
        let back = StanceModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, model);
        for i in 0..100 {
            let probe = format!("aaa{} ccc zz{} {}", i % 7, i, if i % 3 == 0 { "eee" } else { "" });
            let (a, b) = (model.predict(&probe), back.predict(&probe));
            assert_eq!(a.label, b.label);
            for k in 0..NUM_LABELS {
                assert_eq!(a.probs[k].to_bits(), b.probs[k].to_bits());
            }
        }
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn corrupt_model_rejected() {
        assert!(StanceModel::from_bytes(b"{}").is_err());
        let model = train(&separable(12, 2, 4), &small_hp()).unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&model.to_bytes().unwrap()).unwrap();
        v["bias"] = serde_json::Value::String(BASE64.encode([0u8; 8]));
        assert!(StanceModel::from_bytes(v.to_string().as_bytes()).is_err());
    }

    #[test]
    fn loss_decreases_late_in_training() {
        let data = separable(200, 3, 8);
        let hp = Hyperparams { epochs: 40, ..small_hp() };
        let (_, losses) = train_traced(&data, &hp, true).unwrap();
        assert_eq!(losses.len(), 40);
        let late = &losses[20..];
        let pairs = late.len() - 1;
        let violations: Vec<f64> = late.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
        assert!(violations.iter().all(|&d| d < 1e-3), "{violations:?}");
        assert!(violations.len() as f64 <= 0.05 * pairs as f64, "{violations:?}");
    }

    #[test]
    fn probabilities_form_simplex() {
        let model = train(&separable(30, 3, 2), &small_hp()).unwrap();
        for probe in ["aaa", "ccc ddd", "random words here", "😀", ""] {
            let p = model.predict(probe).probs;
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }
}
