//! Post-processing of raw model completions into compilable candidate
//! sources: truncate the completion at the point where the prompt's module
//! closes, then reattach the prompt (synthesizing the close when the model
//! never produced one).

pub mod lexer;

pub use lexer::{scan_modules, tokenize, ModuleScan, Token, TokenKind};

use thiserror::Error;

use crate::generation::Temperature;
use crate::problems::Detail;

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error("prompt must open exactly one module (opens {opens}, closes {closes})")]
    BadPromptShape { opens: usize, closes: usize },
}

/// Cut a raw completion at the first point where the module opened by the
/// prompt is closed. The scan starts at depth 1 (the prompt's unmatched
/// `module`), `module` keywords in the completion push, `endmodule` pops,
/// and the cut lands just after the `endmodule` that reaches depth 0 —
/// anything after it (chatter, spurious extra modules) is discarded.
/// `begin`/`end` blocks never terminate the body. Keywords inside comments
/// or strings are masked by the lexer and never cut.
///
/// Returns the (possibly shortened) body and a flag that is true when the
/// completion ran out before closing the module, in which case the caller
/// appends one synthesized `endmodule`.
pub fn truncate_completion(raw: &str) -> (String, bool) {
    let mut depth: i64 = 1;
    let mut kept = String::new();
    for tok in tokenize(raw) {
        kept.push_str(&tok.text);
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "module" => depth += 1,
                "endmodule" => {
                    depth -= 1;
                    if depth == 0 {
                        return (kept, false);
                    }
                }
                _ => {}
            }
        }
    }
    (raw.to_string(), true)
}

/// Concatenate prompt and truncated body into one candidate source,
/// appending a synthesized `endmodule` when the completion never closed
/// the module. Fails if the prompt does not open exactly one module.
pub fn assemble_source(
    prompt: &str,
    body: &str,
    synthesized_close: bool,
) -> Result<String, PostprocessError> {
    let scan = scan_modules(prompt);
    if scan.net != 1 || scan.dipped_negative {
        return Err(PostprocessError::BadPromptShape { opens: scan.opens, closes: scan.closes });
    }
    let mut text = String::with_capacity(prompt.len() + body.len() + 16);
    text.push_str(prompt);
    text.push_str(body);
    if synthesized_close {
        // On its own line: the body may end inside a line comment.
        text.push_str("\nendmodule\n");
    }
    Ok(text)
}

/// Identifies the completion a candidate was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionRef {
    pub temperature: Temperature,
    pub index: usize,
}

/// A compilable unit: one post-processed completion stitched to its prompt.
#[derive(Debug, Clone)]
pub struct CandidateSource {
    pub problem_id: String,
    pub detail: Detail,
    pub completion_ref: CompletionRef,
    pub source_text: String,
    /// True when truncation discarded text after the closing `endmodule`.
    pub truncation_applied: bool,
    /// True when the close had to be synthesized.
    pub synthesized_close: bool,
}

impl CandidateSource {
    pub fn build(
        problem_id: &str,
        detail: Detail,
        completion_ref: CompletionRef,
        prompt: &str,
        raw_completion: &str,
    ) -> Result<CandidateSource, PostprocessError> {
        let (body, synthesized_close) = truncate_completion(raw_completion);
        let truncation_applied = body.len() != raw_completion.len();
        let source_text = assemble_source(prompt, &body, synthesized_close)?;
        Ok(CandidateSource {
            problem_id: problem_id.to_string(),
            detail,
            completion_ref,
            source_text,
            truncation_applied,
            synthesized_close,
        })
    }
}
