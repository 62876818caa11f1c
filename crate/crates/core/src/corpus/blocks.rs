//! Extraction of self-contained module blocks from mixed prose/code text
//! (book dumps): each block runs from a `module` keyword to the first
//! following `endmodule` and contains no interior module boundary.

use crate::postprocess::{tokenize, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerilogBlock {
    pub text: String,
    /// Character offset of the block start in the source text.
    pub start_offset: usize,
}

/// Return every maximal `module … endmodule` region of `text`, in order.
/// When module openers repeat before a close (nested or garbled text), the
/// innermost opener wins, so no returned block ever contains an interior
/// `module` or `endmodule` keyword. Keywords inside comments and strings
/// are masked and never open or close a block.
pub fn extract_verilog_blocks(text: &str) -> Vec<VerilogBlock> {
    let tokens = tokenize(text);
    let mut blocks = Vec::new();
    let mut open_idx: Option<usize> = None;
    for (idx, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword {
            continue;
        }
        match tok.text.as_str() {
            "module" => open_idx = Some(idx),
            "endmodule" => {
                if let Some(start) = open_idx.take() {
                    let text: String =
                        tokens[start..=idx].iter().map(|t| t.text.as_str()).collect();
                    blocks.push(VerilogBlock { text, start_offset: tokens[start].offset });
                }
            }
            _ => {}
        }
    }
    blocks
}
