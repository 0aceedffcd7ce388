//! Splits one source line into tokens.

use super::diag::{Diagnostic, DiagnosticKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Literal text and its value.
    Number(String, f64),
    /// Symbols between `|` and `>`.
    Ket(String),
    Punct(char),
}

impl Tok {
    pub fn text(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s, _) => s.clone(),
            Tok::Ket(s) => format!("|{s}>"),
            Tok::Punct(c) => c.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
}

/// Tokens of `line` and the trailing comment text, if any.
pub fn lex_line(line: &str, line_no: usize) -> Result<(Vec<Token>, Option<String>), Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        if c.is_whitespace() {
            k += 1;
        } else if c == '#' {
            let text: String = chars[k + 1..].iter().collect();
            return Ok((tokens, Some(text.trim().to_string())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(chars[start..k].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let value = text.parse::<f64>().map_err(|_| {
                Diagnostic::new(DiagnosticKind::Lexical, line_no, col, "malformed number").with_token(text.clone())
            })?;
            tokens.push(Token {
                tok: Tok::Number(text, value),
                col,
            });
        } else if c == '|' {
            let start = k;
            k += 1;
            while k < chars.len() && chars[k] != '>' && !chars[k].is_whitespace() {
                k += 1;
            }
            let body: String = chars[start + 1..k].iter().collect();
            if k >= chars.len() || chars[k] != '>' {
                return Err(Diagnostic::new(DiagnosticKind::Lexical, line_no, col, "unterminated ket")
                    .with_token(chars[start..k].iter().collect::<String>())
                    .with_expected("`>`"));
            }
            k += 1;
            if let Some((off, bad)) = body.chars().enumerate().find(|(_, ch)| !matches!(ch, '0' | 'H' | 'V')) {
                return Err(Diagnostic::new(DiagnosticKind::Lexical, line_no, col + 1 + off, "invalid ket symbol")
                    .with_token(bad.to_string())
                    .with_expected("`0`, `H` or `V`"));
            }
            if body.is_empty() {
                return Err(Diagnostic::new(DiagnosticKind::Lexical, line_no, col, "empty ket").with_token("|>"));
            }
            tokens.push(Token { tok: Tok::Ket(body), col });
        } else if "=+-*/()[],".contains(c) {
            tokens.push(Token { tok: Tok::Punct(c), col });
            k += 1;
        } else {
            return Err(Diagnostic::new(DiagnosticKind::Lexical, line_no, col, "unexpected character").with_token(c.to_string()));
        }
    }
    Ok((tokens, None))
}
