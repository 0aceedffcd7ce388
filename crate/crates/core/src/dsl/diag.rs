use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Semantic,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::Lexical => "lexical error",
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Semantic => "semantic error",
        }
    }
}

/// A located problem in a circuit file. Lines and columns start at 1; line 0
/// stands for input that does not come from the file, such as an override.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub kind: DiagnosticKind,
    pub message: String,
    /// The offending token, if there is one.
    pub token: Option<String>,
    /// What the parser would have accepted instead.
    pub expected: Option<String>,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line,
            col,
            kind,
            message: message.into(),
            token: None,
            expected: None,
        }
    }

    pub fn with_token(mut self, token: impl Into<String>) -> Diagnostic {
        self.token = Some(token.into());
        self
    }

    pub fn with_expected(mut self, expected: impl Into<String>) -> Diagnostic {
        self.expected = Some(expected.into());
        self
    }

    /// Multi-line report with the source line and a caret, optionally in ANSI color.
    pub fn render(&self, file: &str, source: &str, color: bool) -> String {
        let (red, bold, reset) = if color { ("\x1b[31m", "\x1b[1m", "\x1b[0m") } else { ("", "", "") };
        let mut out = format!("{bold}{file}:{}:{}: {red}{}{reset}{bold}: {}{reset}", self.line, self.col, self.kind.as_str(), self.message);
        if let Some(e) = &self.expected {
            out.push_str(&format!(" (expected {e})"));
        }
        if let Some(text) = self.line.checked_sub(1).and_then(|n| source.lines().nth(n)) {
            let width = self.token.as_ref().map_or(1, |t| t.chars().count().max(1));
            out.push_str(&format!(
                "\n{:>4} | {text}\n     | {}{red}{}{reset}",
                self.line,
                " ".repeat(self.col.saturating_sub(1)),
                "^".repeat(width)
            ));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.kind.as_str(), self.message)?;
        if let Some(t) = &self.token {
            write!(f, " (found `{t}`")?;
            if let Some(e) = &self.expected {
                write!(f, ", expected {e}")?;
            }
            write!(f, ")")?;
        } else if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}
