//! Overlapping sliding windows over corpus text, producing training
//! examples whose windows jointly cover the whole source.

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// One window of a source text. Offsets are character indices; `text` is
/// exactly the source sliced at `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub source_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Cut `text` into windows of `window` characters starting at multiples of
/// `stride`. The final window is clamped to the text length (no padding),
/// and a text no longer than `window` yields exactly one window covering
/// it. The empty text yields no windows.
pub fn sliding_windows(
    source_id: &str,
    text: &str,
    window: usize,
    stride: usize,
) -> Result<Vec<TrainingExample>, CorpusError> {
    if window == 0 || stride == 0 {
        return Err(CorpusError::WindowParams { window, stride });
    }
    // Byte index of each character boundary, plus the end.
    let boundaries: Vec<usize> = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = boundaries.len() - 1;

    let mut examples = Vec::new();
    if n_chars == 0 {
        return Ok(examples);
    }
    let mut start = 0usize;
    loop {
        let end = (start + window).min(n_chars);
        examples.push(TrainingExample {
            source_id: source_id.to_string(),
            start,
            end,
            text: text[boundaries[start]..boundaries[end]].to_string(),
        });
        if start + window >= n_chars {
            break;
        }
        start += stride;
    }
    Ok(examples)
}
