//! Line-oriented recursive-descent parser.

use super::ast::{ComplexExpr, Document, Grid, Item, MatrixSpec, Statement, StmtKind};
use super::diag::{Diagnostic, DiagnosticKind};
use super::expr::{BinOp, Expr};
use super::lexer::{lex_line, Tok, Token};

const KEYWORDS: [&str; 14] = [
    "paths", "param", "init", "nl", "nl1p", "phase", "hwp", "unitary", "align", "bs", "object", "measure", "trace_keep", "sweep",
];
const RESERVED: [&str; 8] = ["pi", "sqrt", "from", "to", "steps", "symmetric", "householder", "X"];

/// A name used in a statement, kept for the scope check.
#[derive(Debug, Clone)]
enum Ref {
    Path(String, usize),
    Param(String, usize),
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
    refs: Vec<Ref>,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn error(&self, message: &str, expected: &str) -> Diagnostic {
        let d = Diagnostic::new(DiagnosticKind::Syntax, self.line, self.col(), message).with_expected(expected);
        match self.peek() {
            Some(t) => d.with_token(t.text()),
            None => d.with_token("end of line"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error("unexpected token", &format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Option<(String, usize)> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let col = self.col();
                self.pos += 1;
                Some((s.clone(), col))
            }
            _ => None,
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("unexpected token", &format!("`{kw}`"))),
        }
    }

    fn path(&mut self, col: usize, name: String) -> String {
        self.refs.push(Ref::Path(name.clone(), col));
        name
    }

    /// Every remaining token as a path name.
    fn path_list(&mut self) -> PResult<Vec<(String, usize)>> {
        let mut out = Vec::new();
        while !self.at_end() {
            match self.ident() {
                Some(p) => out.push(p),
                None => return Err(self.error("unexpected token", "a path name")),
            }
        }
        Ok(out)
    }

    fn leading_idents(&mut self, n: usize) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        while out.len() < n {
            match self.ident() {
                Some(p) => out.push(p),
                None => break,
            }
        }
        out
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_punct('+') {
                BinOp::Add
            } else if self.eat_punct('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_punct('*') {
                BinOp::Mul
            } else if self.eat_punct('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Number(text, v)) => {
                let e = Expr::Num(text.clone(), *v);
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s == "pi" => {
                self.pos += 1;
                Ok(Expr::Pi)
            }
            Some(Tok::Ident(s)) if s == "sqrt" => {
                self.pos += 1;
                self.expect_punct('(')?;
                let inner = self.expr()?;
                self.expect_punct(')')?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                self.refs.push(Ref::Param(s.clone(), col));
                Ok(Expr::Param(s))
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_punct(')')?;
                Ok(inner)
            }
            _ => Err(self.error("expected an expression", "a number, `pi`, `sqrt`, a parameter or `(`")),
        }
    }

    fn complex(&mut self) -> PResult<ComplexExpr> {
        self.expect_punct('(')?;
        let re = self.expr()?;
        self.expect_punct(',')?;
        let im = self.expr()?;
        self.expect_punct(')')?;
        Ok((re, im))
    }

    fn vector(&mut self) -> PResult<Vec<ComplexExpr>> {
        self.expect_punct('[')?;
        let mut out = vec![self.complex()?];
        while self.eat_punct(',') {
            out.push(self.complex()?);
        }
        self.expect_punct(']')?;
        Ok(out)
    }

    fn matrix(&mut self) -> PResult<Vec<Vec<ComplexExpr>>> {
        self.expect_punct('[')?;
        let mut rows = vec![self.vector()?];
        while self.eat_punct(',') {
            rows.push(self.vector()?);
        }
        self.expect_punct(']')?;
        Ok(rows)
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected token", "end of line"))
        }
    }
}

fn arity(kw: &str, line: usize, col: usize, message: &str) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Syntax, line, col, message).with_token(kw.to_string())
}

fn parse_statement(cur: &mut Cursor) -> PResult<StmtKind> {
    let (kw, kw_col) = match cur.ident() {
        Some(k) => k,
        None => return Err(cur.error("expected a statement", "a keyword")),
    };
    let line = cur.line;
    let exact = |cur: &mut Cursor, n: usize, msg: &str| -> PResult<Vec<String>> {
        let list = cur.path_list()?;
        if list.len() != n {
            return Err(arity(&kw, line, kw_col, msg).with_expected(format!("{n} path name{}", if n == 1 { "" } else { "s" })));
        }
        Ok(list.into_iter().map(|(p, c)| cur.path(c, p)).collect())
    };
    let at_least_one = |cur: &mut Cursor, msg: &str| -> PResult<Vec<String>> {
        let list = cur.path_list()?;
        if list.is_empty() {
            return Err(arity(&kw, line, kw_col, msg).with_expected("a path name"));
        }
        Ok(list.into_iter().map(|(p, c)| cur.path(c, p)).collect())
    };

    let kind = match kw.as_str() {
        "paths" => {
            let list = cur.path_list()?;
            if list.is_empty() {
                return Err(arity(&kw, line, kw_col, "paths requires at least 1 path name").with_expected("a path name"));
            }
            StmtKind::Paths(list.into_iter().map(|(p, _)| p).collect())
        }
        "param" => {
            let Some((name, _)) = cur.ident() else {
                return Err(cur.error("expected a parameter name", "an identifier"));
            };
            cur.expect_punct('=')?;
            let expr = cur.expr()?;
            StmtKind::Param { name, expr }
        }
        "init" => {
            let mut kets = Vec::new();
            loop {
                match cur.peek() {
                    Some(Tok::Ket(k)) => {
                        kets.push(k.clone());
                        cur.pos += 1;
                    }
                    _ => return Err(cur.error("expected a ket", "a ket such as `|H0>`")),
                }
                if !cur.eat_punct('+') {
                    break;
                }
            }
            StmtKind::Init(kets)
        }
        "nl" => {
            let p = exact(cur, 2, "nl requires 2 paths")?;
            StmtKind::Nl {
                signal: p[0].clone(),
                idler: p[1].clone(),
            }
        }
        "nl1p" => {
            let ids = cur.leading_idents(3);
            if ids.len() < 3 {
                return Err(arity(&kw, line, kw_col, "nl1p requires 3 paths").with_expected("pump, signal and idler paths"));
            }
            let p: Vec<String> = ids.into_iter().map(|(p, c)| cur.path(c, p)).collect();
            let g = if cur.at_end() { None } else { Some(cur.expr()?) };
            StmtKind::Nl1p {
                pump: p[0].clone(),
                signal: p[1].clone(),
                idler: p[2].clone(),
                g,
            }
        }
        "phase" => {
            let ids = cur.leading_idents(1);
            if ids.is_empty() || cur.at_end() {
                return Err(arity(&kw, line, kw_col, "phase requires a path and an angle").with_expected("a path name and an angle"));
            }
            let (p, c) = ids.into_iter().next().expect("one ident");
            let path = cur.path(c, p);
            StmtKind::Phase { path, phi: cur.expr()? }
        }
        "hwp" => StmtKind::Hwp {
            path: exact(cur, 1, "hwp requires 1 path")?.remove(0),
        },
        "unitary" => {
            let mut ids = Vec::new();
            while let Some(id) = cur.ident() {
                ids.push(id);
            }
            let matrix = if ids.last().is_some_and(|(s, _)| s == "householder") && cur.peek() == Some(&Tok::Punct('[')) {
                ids.pop();
                MatrixSpec::Householder(cur.vector()?)
            } else if cur.peek() == Some(&Tok::Punct('[')) {
                MatrixSpec::Literal(cur.matrix()?)
            } else if cur.at_end() && ids.last().is_some_and(|(s, _)| s == "X" || s == "H") {
                match ids.pop().expect("nonempty").0.as_str() {
                    "X" => MatrixSpec::X,
                    _ => MatrixSpec::H,
                }
            } else {
                return Err(cur.error("expected a matrix", "`[[...]]`, `X`, `H` or `householder [...]`"));
            };
            if ids.is_empty() || ids.len() > 2 {
                return Err(arity(&kw, line, kw_col, "unitary requires 1 or 2 paths").with_expected("1 or 2 path names"));
            }
            if ids.len() == 2 && matches!(matrix, MatrixSpec::X | MatrixSpec::H) {
                return Err(Diagnostic::new(DiagnosticKind::Semantic, line, kw_col, "presets `X` and `H` act on a single path")
                    .with_token(kw.clone()));
            }
            let paths = ids.into_iter().map(|(p, c)| cur.path(c, p)).collect();
            StmtKind::Unitary { paths, matrix }
        }
        "align" => {
            let p = exact(cur, 2, "align requires 2 paths")?;
            StmtKind::Align {
                a: p[0].clone(),
                b: p[1].clone(),
            }
        }
        "bs" => {
            let mut list = cur.path_list()?;
            let symmetric = list.len() == 3 && list[2].0 == "symmetric";
            if symmetric {
                list.pop();
            }
            if list.len() != 2 {
                return Err(arity(&kw, line, kw_col, "bs requires 2 paths").with_expected("2 path names, optionally followed by `symmetric`"));
            }
            let p: Vec<String> = list.into_iter().map(|(p, c)| cur.path(c, p)).collect();
            StmtKind::Bs {
                a: p[0].clone(),
                b: p[1].clone(),
                symmetric,
            }
        }
        "object" => {
            let msg = "object requires 2 paths, a transmittance and a phase";
            let ids = cur.leading_idents(2);
            if ids.len() < 2 || cur.at_end() {
                return Err(arity(&kw, line, kw_col, msg).with_expected("object PATH LOSS T GAMMA"));
            }
            let p: Vec<String> = ids.into_iter().map(|(p, c)| cur.path(c, p)).collect();
            let t = cur.expr()?;
            if cur.at_end() {
                return Err(arity(&kw, line, kw_col, msg).with_expected("object PATH LOSS T GAMMA"));
            }
            let gamma = cur.expr()?;
            StmtKind::Object {
                path: p[0].clone(),
                loss: p[1].clone(),
                t,
                gamma,
            }
        }
        "measure" => StmtKind::Measure(at_least_one(cur, "measure requires at least 1 path")?),
        "trace_keep" => StmtKind::TraceKeep(at_least_one(cur, "trace_keep requires at least 1 path")?),
        "sweep" => {
            let Some((name, col)) = cur.ident() else {
                return Err(cur.error("expected a parameter name", "an identifier"));
            };
            cur.refs.push(Ref::Param(name.clone(), col));
            let grid = if cur.peek() == Some(&Tok::Punct('[')) {
                cur.pos += 1;
                let mut values = vec![cur.expr()?];
                while cur.eat_punct(',') {
                    values.push(cur.expr()?);
                }
                cur.expect_punct(']')?;
                Grid::List(values)
            } else {
                cur.expect_keyword("from")?;
                let from = cur.expr()?;
                cur.expect_keyword("to")?;
                let to = cur.expr()?;
                cur.expect_keyword("steps")?;
                let steps = match cur.peek() {
                    Some(Tok::Number(_, v)) if v.fract() == 0.0 && *v >= 1.0 && *v <= 1e9 => *v as usize,
                    _ => return Err(cur.error("steps must be a positive integer", "a positive integer")),
                };
                cur.pos += 1;
                Grid::Range { from, to, steps }
            };
            StmtKind::Sweep { name, grid }
        }
        _ => {
            return Err(Diagnostic::new(DiagnosticKind::Syntax, line, kw_col, "unknown statement")
                .with_token(kw.clone())
                .with_expected(format!("one of {}", KEYWORDS.join(", "))))
        }
    };
    cur.finish()?;
    Ok(kind)
}

/// Names in scope while walking the file top to bottom.
#[derive(Default)]
struct Scope {
    paths: Option<Vec<String>>,
    params: Vec<String>,
    gates_seen: bool,
    init_seen: bool,
    sweep_seen: bool,
}

fn semantic(line: usize, col: usize, msg: String, token: &str) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::Semantic, line, col, msg).with_token(token.to_string())
}

fn check_scope(scope: &mut Scope, stmt: &Statement, refs: &[Ref], kets: &[(String, usize)], diags: &mut Vec<Diagnostic>) {
    let (line, col) = (stmt.line, stmt.col);
    let kw = stmt.kind.keyword();
    let start = diags.len();
    for r in refs {
        match r {
            Ref::Path(p, c) => {
                let known = scope.paths.as_ref().is_some_and(|ps| ps.contains(p));
                if !known {
                    diags.push(semantic(line, *c, format!("undeclared path `{p}`"), p).with_expected("a path declared with `paths`"));
                }
            }
            Ref::Param(p, c) => {
                if !scope.params.contains(p) {
                    diags.push(semantic(line, *c, format!("undefined parameter `{p}`"), p).with_expected("a parameter defined earlier with `param`"));
                }
            }
        }
    }
    // a target named twice in one statement
    let mut seen: Vec<&str> = Vec::new();
    for r in refs {
        if let Ref::Path(p, c) = r {
            if seen.contains(&p.as_str()) {
                diags.push(semantic(line, *c, format!("path `{p}` used twice in `{kw}`"), p));
            }
            seen.push(p);
        }
    }

    match &stmt.kind {
        StmtKind::Paths(ps) => {
            if scope.paths.is_some() {
                diags.push(semantic(line, col, "duplicate paths declaration".into(), kw));
            } else {
                let mut uniq: Vec<&String> = Vec::new();
                for p in ps {
                    if uniq.contains(&p) {
                        diags.push(semantic(line, col, format!("path `{p}` declared twice"), p));
                    } else if KEYWORDS.contains(&p.as_str()) || RESERVED.contains(&p.as_str()) || p == "H" {
                        diags.push(semantic(line, col, format!("`{p}` is reserved and cannot name a path"), p));
                    }
                    uniq.push(p);
                }
                scope.paths = Some(ps.clone());
            }
        }
        StmtKind::Param { name, .. } => {
            if KEYWORDS.contains(&name.as_str()) || RESERVED.contains(&name.as_str()) {
                diags.push(semantic(line, col, format!("`{name}` is reserved and cannot name a parameter"), name));
            } else if scope.params.contains(name) {
                diags.push(semantic(line, col, format!("parameter `{name}` already defined"), name));
            } else {
                scope.params.push(name.clone());
            }
        }
        StmtKind::Init(_) => {
            if scope.init_seen {
                diags.push(semantic(line, col, "duplicate init statement".into(), kw));
            }
            if scope.gates_seen {
                diags.push(semantic(line, col, "init must come before every gate".into(), kw));
            }
            match &scope.paths {
                None => diags.push(semantic(line, col, "init before the paths declaration".into(), kw)),
                Some(ps) => {
                    for (k, c) in kets {
                        if k.chars().count() != ps.len() {
                            diags.push(semantic(
                                line,
                                *c,
                                format!("ket has {} symbols but {} paths are declared", k.chars().count(), ps.len()),
                                &format!("|{k}>"),
                            ));
                        }
                    }
                }
            }
            scope.init_seen = true;
        }
        StmtKind::Sweep { .. } => {
            if scope.sweep_seen {
                diags.push(semantic(line, col, "only one sweep is allowed".into(), kw));
            }
            scope.sweep_seen = true;
        }
        k if k.is_gate() => scope.gates_seen = true,
        _ => {}
    }
    if diags.len() > start {
        // keep the first problem per statement at the front of the list
        diags[start..].sort_by_key(|d| d.col);
    }
}

/// Parses and validates `text`; on failure every diagnostic is returned, in line order.
pub fn parse(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let doc = parse_unchecked(text)?;
    doc.lower(&[])?;
    Ok(doc)
}

/// Syntax and scope checks only; values are not evaluated.
pub fn parse_unchecked(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let mut items = Vec::new();
    let mut diags = Vec::new();
    let mut scope = Scope::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let (tokens, comment) = match lex_line(raw, line) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if tokens.is_empty() {
            match comment {
                Some(c) => items.push(Item::Comment(c)),
                None => {
                    if !items.is_empty() && items.last() != Some(&Item::Blank) {
                        items.push(Item::Blank);
                    }
                }
            }
            continue;
        }
        let mut cur = Cursor {
            tokens: &tokens,
            pos: 0,
            line,
            end_col: raw.chars().count() + 1,
            refs: Vec::new(),
        };
        match parse_statement(&mut cur) {
            Ok(kind) => {
                let stmt = Statement {
                    kind,
                    comment,
                    line,
                    col: tokens[0].col,
                };
                let kets: Vec<(String, usize)> = tokens
                    .iter()
                    .filter_map(|t| match &t.tok {
                        Tok::Ket(k) => Some((k.clone(), t.col)),
                        _ => None,
                    })
                    .collect();
                check_scope(&mut scope, &stmt, &cur.refs, &kets, &mut diags);
                items.push(Item::Stmt(stmt));
            }
            Err(d) => diags.push(d),
        }
    }
    while items.last() == Some(&Item::Blank) {
        items.pop();
    }
    if scope.paths.is_none() {
        diags.insert(0, Diagnostic::new(DiagnosticKind::Semantic, 1, 1, "missing paths declaration").with_expected("`paths NAME...`"));
    }
    if diags.is_empty() {
        Ok(Document { items })
    } else {
        Err(diags)
    }
}

/// A standalone expression, as given to `--set NAME=EXPR`.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let (tokens, comment) = lex_line(text, 0)?;
    let mut cur = Cursor {
        tokens: &tokens,
        pos: 0,
        line: 0,
        end_col: text.chars().count() + 1,
        refs: Vec::new(),
    };
    let e = cur.expr()?;
    cur.finish()?;
    if comment.is_some() {
        return Err(Diagnostic::new(DiagnosticKind::Syntax, 0, 1, "comments are not allowed in an expression"));
    }
    Ok(e)
}
