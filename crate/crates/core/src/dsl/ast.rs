//! Parsed circuit documents and their canonical text form.

use std::fmt;

use super::expr::Expr;

/// A complex literal `(re, im)`.
pub type ComplexExpr = (Expr, Expr);

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSpec {
    /// Row-major entries.
    Literal(Vec<Vec<ComplexExpr>>),
    X,
    H,
    /// Householder completion of the given image of the first basis ket.
    Householder(Vec<ComplexExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<Expr>),
    /// `steps` evenly spaced values from `from`, excluding `to`.
    Range { from: Expr, to: Expr, steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Paths(Vec<String>),
    Param { name: String, expr: Expr },
    /// Equal-weight sum of the listed kets.
    Init(Vec<String>),
    Nl { signal: String, idler: String },
    Nl1p { pump: String, signal: String, idler: String, g: Option<Expr> },
    Phase { path: String, phi: Expr },
    Hwp { path: String },
    Unitary { paths: Vec<String>, matrix: MatrixSpec },
    Align { a: String, b: String },
    Bs { a: String, b: String, symmetric: bool },
    Object { path: String, loss: String, t: Expr, gamma: Expr },
    Measure(Vec<String>),
    TraceKeep(Vec<String>),
    Sweep { name: String, grid: Grid },
}

impl StmtKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            StmtKind::Paths(_) => "paths",
            StmtKind::Param { .. } => "param",
            StmtKind::Init(_) => "init",
            StmtKind::Nl { .. } => "nl",
            StmtKind::Nl1p { .. } => "nl1p",
            StmtKind::Phase { .. } => "phase",
            StmtKind::Hwp { .. } => "hwp",
            StmtKind::Unitary { .. } => "unitary",
            StmtKind::Align { .. } => "align",
            StmtKind::Bs { .. } => "bs",
            StmtKind::Object { .. } => "object",
            StmtKind::Measure(_) => "measure",
            StmtKind::TraceKeep(_) => "trace_keep",
            StmtKind::Sweep { .. } => "sweep",
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(
            self,
            StmtKind::Nl { .. }
                | StmtKind::Nl1p { .. }
                | StmtKind::Phase { .. }
                | StmtKind::Hwp { .. }
                | StmtKind::Unitary { .. }
                | StmtKind::Align { .. }
                | StmtKind::Bs { .. }
                | StmtKind::Object { .. }
        )
    }
}

/// A statement with its position; positions are ignored by `==`.
#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StmtKind,
    pub comment: Option<String>,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Statement) -> bool {
        self.kind == other.kind && self.comment == other.comment
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Blank,
    Comment(String),
    Stmt(Statement),
}

/// A whole file: statements interleaved with comments and single blank lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub items: Vec<Item>,
}

impl Document {
    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.items.iter().filter_map(|i| match i {
            Item::Stmt(s) => Some(s),
            _ => None,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.statements().filter(|s| s.kind.is_gate()).count()
    }

    pub fn paths(&self) -> Option<&[String]> {
        self.statements().find_map(|s| match &s.kind {
            StmtKind::Paths(p) => Some(p.as_slice()),
            _ => None,
        })
    }

    /// Declared parameters with their defining expressions, in order.
    pub fn params(&self) -> Vec<(&str, &Expr)> {
        self.statements()
            .filter_map(|s| match &s.kind {
                StmtKind::Param { name, expr } => Some((name.as_str(), expr)),
                _ => None,
            })
            .collect()
    }

    /// Canonical text; parsing it gives back an equal document.
    pub fn to_source(&self) -> String {
        self.to_string()
    }
}

fn complex(f: &mut fmt::Formatter<'_>, (re, im): &ComplexExpr) -> fmt::Result {
    write!(f, "({re}, {im})")
}

fn vector(f: &mut fmt::Formatter<'_>, v: &[ComplexExpr]) -> fmt::Result {
    write!(f, "[")?;
    for (n, z) in v.iter().enumerate() {
        if n > 0 {
            write!(f, ", ")?;
        }
        complex(f, z)?;
    }
    write!(f, "]")
}

/// An expression that follows another on the same line; a leading minus
/// would otherwise merge the two.
fn trailing(e: &Expr) -> String {
    let s = e.to_string();
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.keyword())?;
        match self {
            StmtKind::Paths(p) | StmtKind::Measure(p) | StmtKind::TraceKeep(p) => {
                for x in p {
                    write!(f, " {x}")?;
                }
                Ok(())
            }
            StmtKind::Param { name, expr } => write!(f, " {name} = {expr}"),
            StmtKind::Init(kets) => {
                for (n, k) in kets.iter().enumerate() {
                    write!(f, "{}|{k}>", if n == 0 { " " } else { " + " })?;
                }
                Ok(())
            }
            StmtKind::Nl { signal, idler } => write!(f, " {signal} {idler}"),
            StmtKind::Nl1p { pump, signal, idler, g } => {
                write!(f, " {pump} {signal} {idler}")?;
                match g {
                    Some(g) => write!(f, " {g}"),
                    None => Ok(()),
                }
            }
            StmtKind::Phase { path, phi } => write!(f, " {path} {phi}"),
            StmtKind::Hwp { path } => write!(f, " {path}"),
            StmtKind::Unitary { paths, matrix } => {
                for p in paths {
                    write!(f, " {p}")?;
                }
                match matrix {
                    MatrixSpec::X => write!(f, " X"),
                    MatrixSpec::H => write!(f, " H"),
                    MatrixSpec::Householder(v) => {
                        write!(f, " householder ")?;
                        vector(f, v)
                    }
                    MatrixSpec::Literal(rows) => {
                        write!(f, " [")?;
                        for (n, row) in rows.iter().enumerate() {
                            if n > 0 {
                                write!(f, ", ")?;
                            }
                            vector(f, row)?;
                        }
                        write!(f, "]")
                    }
                }
            }
            StmtKind::Align { a, b } => write!(f, " {a} {b}"),
            StmtKind::Bs { a, b, symmetric } => {
                write!(f, " {a} {b}")?;
                if *symmetric {
                    write!(f, " symmetric")?;
                }
                Ok(())
            }
            StmtKind::Object { path, loss, t, gamma } => write!(f, " {path} {loss} {t} {}", trailing(gamma)),
            StmtKind::Sweep { name, grid } => match grid {
                Grid::List(values) => {
                    write!(f, " {name} [")?;
                    for (n, v) in values.iter().enumerate() {
                        if n > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, "]")
                }
                Grid::Range { from, to, steps } => write!(f, " {name} from {from} to {to} steps {steps}"),
            },
        }
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                Item::Blank => writeln!(f)?,
                Item::Comment(c) if c.is_empty() => writeln!(f, "#")?,
                Item::Comment(c) => writeln!(f, "# {c}")?,
                Item::Stmt(s) => match &s.comment {
                    Some(c) if c.is_empty() => writeln!(f, "{}  #", s.kind)?,
                    Some(c) => writeln!(f, "{}  # {c}", s.kind)?,
                    None => writeln!(f, "{}", s.kind)?,
                },
            }
        }
        Ok(())
    }
}
