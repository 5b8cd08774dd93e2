use std::io::Write;

use serde::{Deserialize, Serialize};

use super::label::{sanitize_text, Label, NUM_LABELS};
use super::model::StanceModel;
use crate::corpus::{dedup, sample, DedupMode, Message, SampleSpec};
use crate::error::{Error, Result};
use crate::filterkit::TopicQuery;

/// Selects messages for manual labeling: topic filter, exact-text
/// deduplication, then a seeded uniform sample.
pub fn prepare_annotation_set(
    msgs: impl IntoIterator<Item = Message>,
    query: &TopicQuery,
    spec: SampleSpec,
    seed: u64,
) -> Result<Vec<Message>> {
    let selected: Vec<Message> = dedup(
        msgs.into_iter().filter(|m| query.matches(&m.text)),
        DedupMode::ByExactText,
    )
    .collect();
    if selected.is_empty() {
        return Err(Error::EmptySelection(query.name().to_string()));
    }
    sample(selected, spec, seed)
}

/// Writes a label template: an empty label column, a tab, then the text.
pub fn write_annotation_template<W: Write>(out: &mut W, msgs: &[Message]) -> Result<()> {
    for m in msgs {
        writeln!(out, "\t{}", sanitize_text(m.text.trim()))?;
    }
    Ok(())
}

/// A message with its predicted stance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMessage {
    pub message: Message,
    pub label: Label,
    pub probs: [f64; NUM_LABELS],
}

/// Lazily predicts every message, keeping input order.
pub fn label_corpus<'a>(
    model: &'a StanceModel,
    msgs: impl IntoIterator<Item = Message> + 'a,
) -> impl Iterator<Item = LabeledMessage> + 'a {
    msgs.into_iter().map(move |message| {
        let p = model.predict(&message.text);
        LabeledMessage {
            message,
            label: p.label,
            probs: p.probs,
        }
    })
}

/// Row of the labeled-corpus CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub id: String,
    pub timestamp: String,
    pub label: Label,
    pub p_supports: f64,
    pub p_rejects: f64,
    pub p_other: f64,
}

impl From<&LabeledMessage> for LabeledRow {
    fn from(l: &LabeledMessage) -> Self {
        LabeledRow {
            id: l.message.id.clone(),
            timestamp: l.message.created_at(),
            label: l.label,
            p_supports: l.probs[0],
            p_rejects: l.probs[1],
            p_other: l.probs[2],
        }
    }
}
