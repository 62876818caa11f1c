//! Lossless Verilog token scanner.
//!
//! This is not a full Verilog-2005 lexer: it recognizes exactly the token
//! shapes needed to find module boundaries in free-form text — comments,
//! strings, identifiers, number literals, and the four structural keywords
//! `module` / `endmodule` / `begin` / `end`. Everything else degrades to
//! `Operator` or `Other` single-char tokens. The one hard guarantee is that
//! concatenating `Token::text` in order reproduces the input byte-for-byte,
//! and that keywords are never reported from inside a comment or string.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Operator,
    Literal,
    CommentLine,
    CommentBlock,
    StringLit,
    Whitespace,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Character (not byte) index of the token start in the input.
    pub offset: usize,
}

/// The only words that matter for boundary tracking. `always`, `assign` and
/// friends deliberately scan as `Identifier`.
const KEYWORDS: [&str; 4] = ["module", "endmodule", "begin", "end"];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

fn is_base_char(c: char) -> bool {
    matches!(c, 'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H')
}

fn is_based_value_char(c: char) -> bool {
    c.is_ascii_hexdigit() || matches!(c, 'x' | 'X' | 'z' | 'Z' | '?' | '_')
}

const OPERATOR_CHARS: &str = "+-*/%^&|~!<>=?:;,.()[]{}@#";

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    tokens: Vec<Token>,
}

impl Scanner {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn emit_from(&mut self, start: usize, kind: TokenKind) {
        let text: String = self.chars[start..self.pos].iter().collect();
        self.tokens.push(Token { kind, text, offset: start });
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek(0).map(&pred).unwrap_or(false) {
            self.pos += 1;
        }
    }

    fn scan_whitespace(&mut self) {
        let start = self.pos;
        self.take_while(|c| c.is_whitespace());
        self.emit_from(start, TokenKind::Whitespace);
    }

    fn scan_line_comment(&mut self) {
        let start = self.pos;
        self.take_while(|c| c != '\n');
        self.emit_from(start, TokenKind::CommentLine);
    }

    fn scan_block_comment(&mut self) {
        let start = self.pos;
        self.pos += 2; // consume "/*"
        loop {
            match self.peek(0) {
                None => break, // unterminated: comment runs to end of input
                Some('*') if self.peek(1) == Some('/') => {
                    self.pos += 2;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.emit_from(start, TokenKind::CommentBlock);
    }

    fn scan_string(&mut self) {
        let start = self.pos;
        self.pos += 1; // opening quote
        loop {
            match self.peek(0) {
                None => break,
                // Verilog strings cannot contain a raw newline; an
                // unterminated string ends at the line break.
                Some('\n') => break,
                Some('\\') => {
                    self.pos += 1;
                    if self.peek(0).is_some() && self.peek(0) != Some('\n') {
                        self.pos += 1;
                    }
                }
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        self.emit_from(start, TokenKind::StringLit);
    }

    fn scan_word(&mut self) {
        let start = self.pos;
        self.take_while(is_ident_char);
        let word: String = self.chars[start..self.pos].iter().collect();
        let kind = if KEYWORDS.contains(&word.as_str()) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.emit_from(start, kind);
    }

    /// `$display`-style system names scan as one identifier token.
    fn scan_system_word(&mut self) {
        let start = self.pos;
        self.pos += 1;
        self.take_while(is_ident_char);
        self.emit_from(start, TokenKind::Identifier);
    }

    /// Escaped identifiers (`\foo+bar `) run to the next whitespace; notably
    /// `\module` is an identifier, not a keyword.
    fn scan_escaped_ident(&mut self) {
        let start = self.pos;
        self.pos += 1;
        self.take_while(|c| !c.is_whitespace());
        self.emit_from(start, TokenKind::Identifier);
    }

    /// Compiler directives (`` `define``, `` `ifdef`` …) scan as a single
    /// `Other` token so a directive name never reads as a keyword.
    fn scan_directive(&mut self) {
        let start = self.pos;
        self.pos += 1;
        self.take_while(is_ident_char);
        self.emit_from(start, TokenKind::Other);
    }

    /// At a `'`: consume a based-literal tail (`'b0101`, `'sh F` without the
    /// space) if one is present. Returns false when the quote is stray.
    fn try_scan_based_tail(&mut self) -> bool {
        let mut ahead = 1;
        if matches!(self.peek(ahead), Some('s') | Some('S')) {
            ahead += 1;
        }
        match self.peek(ahead) {
            Some(c) if is_base_char(c) => {
                self.pos += ahead + 1;
                self.take_while(is_based_value_char);
                true
            }
            _ => false,
        }
    }

    fn scan_number(&mut self) {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit() || c == '_');
        if self.peek(0) == Some('\'') && self.try_scan_based_tail() {
            // sized based literal, e.g. 8'hA5
        } else {
            if self.peek(0) == Some('.') && self.peek(1).map(|c| c.is_ascii_digit()).unwrap_or(false)
            {
                self.pos += 1;
                self.take_while(|c| c.is_ascii_digit() || c == '_');
            }
            if matches!(self.peek(0), Some('e') | Some('E')) {
                let mut ahead = 1;
                if matches!(self.peek(ahead), Some('+') | Some('-')) {
                    ahead += 1;
                }
                if self.peek(ahead).map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += ahead;
                    self.take_while(|c| c.is_ascii_digit() || c == '_');
                }
            }
        }
        self.emit_from(start, TokenKind::Literal);
    }

    fn scan_other_char(&mut self) {
        let start = self.pos;
        let c = self.chars[self.pos];
        self.pos += 1;
        let kind = if OPERATOR_CHARS.contains(c) {
            TokenKind::Operator
        } else {
            TokenKind::Other
        };
        self.emit_from(start, kind);
    }

    fn run(mut self) -> Vec<Token> {
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.scan_whitespace();
            } else if c == '/' && self.peek(1) == Some('/') {
                self.scan_line_comment();
            } else if c == '/' && self.peek(1) == Some('*') {
                self.scan_block_comment();
            } else if c == '"' {
                self.scan_string();
            } else if is_ident_start(c) {
                self.scan_word();
            } else if c == '$' && self.peek(1).map(is_ident_start).unwrap_or(false) {
                self.scan_system_word();
            } else if c == '\\' && self.peek(1).map(|n| !n.is_whitespace()).unwrap_or(false) {
                self.scan_escaped_ident();
            } else if c == '`' && self.peek(1).map(is_ident_start).unwrap_or(false) {
                self.scan_directive();
            } else if c.is_ascii_digit() {
                self.scan_number();
            } else if c == '\'' {
                let start = self.pos;
                if self.try_scan_based_tail() {
                    self.emit_from(start, TokenKind::Literal);
                } else {
                    self.pos += 1;
                    self.emit_from(start, TokenKind::Other);
                }
            } else {
                self.scan_other_char();
            }
        }
        self.tokens
    }
}

/// Scan `text` into a lossless token stream: the concatenation of the
/// returned token texts equals the input exactly.
pub fn tokenize(text: &str) -> Vec<Token> {
    Scanner { chars: text.chars().collect(), pos: 0, tokens: Vec::new() }.run()
}

/// Summary of `module` / `endmodule` keyword structure in a piece of text,
/// counting only keywords outside comments and strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleScan {
    pub opens: usize,
    pub closes: usize,
    /// opens − closes.
    pub net: i64,
    /// True if a running open/close walk ever went below zero
    /// (an `endmodule` with no matching opener before it).
    pub dipped_negative: bool,
    /// True if at least one `module` keyword is followed later by an
    /// `endmodule` keyword.
    pub pair_seen: bool,
}

pub fn scan_modules(text: &str) -> ModuleScan {
    let mut scan =
        ModuleScan { opens: 0, closes: 0, net: 0, dipped_negative: false, pair_seen: false };
    let mut depth: i64 = 0;
    for tok in tokenize(text) {
        if tok.kind != TokenKind::Keyword {
            continue;
        }
        match tok.text.as_str() {
            "module" => {
                scan.opens += 1;
                depth += 1;
            }
            "endmodule" => {
                scan.closes += 1;
                depth -= 1;
                if depth < 0 {
                    scan.dipped_negative = true;
                }
                if scan.opens > 0 {
                    scan.pair_seen = true;
                }
            }
            _ => {}
        }
    }
    scan.net = scan.opens as i64 - scan.closes as i64;
    scan
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(text: &str) {
        let joined: String = tokenize(text).iter().map(|t| t.text.as_str()).collect();
        assert_eq!(joined, text, "token concatenation must reproduce the input");
    }

    fn kinds_of(text: &str) -> Vec<(TokenKind, String)> {
        tokenize(text).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn keywords_recognized_in_code() {
        let toks = kinds_of("module m; begin end endmodule");
        let kw: Vec<&str> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Keyword)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(kw, ["module", "begin", "end", "endmodule"]);
    }

    #[test]
    fn keyword_in_line_comment_is_masked() {
        let toks = kinds_of("// endmodule\nassign x = 1;");
        assert!(toks.iter().all(|(k, _)| *k != TokenKind::Keyword));
        assert_eq!(toks[0], (TokenKind::CommentLine, "// endmodule".to_string()));
    }

    #[test]
    fn keyword_in_block_comment_and_string_is_masked() {
        for text in ["/* module a; endmodule */ x", "y = \"endmodule\";"] {
            let kw_count =
                tokenize(text).iter().filter(|t| t.kind == TokenKind::Keyword).count();
            assert_eq!(kw_count, 0, "no keyword expected in {text:?}");
        }
    }

    #[test]
    fn unterminated_block_comment_runs_to_end() {
        let toks = kinds_of("x /* open comment endmodule");
        assert_eq!(
            toks.last().unwrap(),
            &(TokenKind::CommentBlock, "/* open comment endmodule".to_string())
        );
        roundtrip("x /* open comment endmodule");
    }

    #[test]
    fn number_shapes() {
        for (text, want) in [
            ("42", "42"),
            ("8'hA5", "8'hA5"),
            ("4'b10_10", "4'b10_10"),
            ("'bx", "'bx"),
            ("3'sd7", "3'sd7"),
            ("1.5e-3", "1.5e-3"),
        ] {
            let toks = tokenize(text);
            assert_eq!(toks[0].kind, TokenKind::Literal, "{text}");
            assert_eq!(toks[0].text, want);
        }
    }

    #[test]
    fn escaped_identifier_and_directive_are_not_keywords() {
        let toks = kinds_of("\\module `endmodule x");
        assert_eq!(toks[0], (TokenKind::Identifier, "\\module".to_string()));
        assert_eq!(toks[2], (TokenKind::Other, "`endmodule".to_string()));
    }

    #[test]
    fn offsets_are_char_indices() {
        let text = "é module"; // multi-byte first char
        let toks = tokenize(text);
        let module_tok = toks.iter().find(|t| t.text == "module").unwrap();
        assert_eq!(module_tok.offset, 2);
        assert_eq!(module_tok.kind, TokenKind::Keyword);
    }

    #[test]
    fn lossless_on_awkward_inputs() {
        for text in [
            "",
            "\"unterminated\nnext line",
            "a /*/ b",
            "x = 'h; $display(\"%d\\\"q\", 1)",
            "\\esc+id rest",
            "`define FOO 1\nmodule m; endmodule",
            "num 12'h3_F tail'",
        ] {
            roundtrip(text);
        }
    }

    #[test]
    fn scan_modules_counts_and_pairs() {
        let s = scan_modules("module a; endmodule\nmodule b;");
        assert_eq!((s.opens, s.closes, s.net), (2, 1, 1));
        assert!(s.pair_seen);
        assert!(!s.dipped_negative);

        let s = scan_modules("// module only in comment");
        assert_eq!((s.opens, s.closes), (0, 0));
        assert!(!s.pair_seen);

        let s = scan_modules("endmodule module a;");
        assert!(s.dipped_negative);
        assert!(!s.pair_seen, "close precedes every open");
    }
}
