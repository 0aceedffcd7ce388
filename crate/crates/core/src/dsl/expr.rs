//! Real-valued parameter expressions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Literal text as written, and its value.
    Num(String, f64),
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// A literal that reads back as exactly `v`; negative values become a negation.
    pub fn number(v: f64) -> Expr {
        if v.is_sign_negative() {
            Expr::Neg(Box::new(Expr::number(-v)))
        } else if v.fract() == 0.0 && v < 1e15 {
            Expr::Num(format!("{}", v as i64), v)
        } else {
            Expr::Num(format!("{v:?}"), v)
        }
    }

    fn int(n: i64) -> Expr {
        Expr::Num(n.to_string(), n as f64)
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// The most readable expression that evaluates bit-for-bit to `v`:
    /// small integers, rational multiples of `pi`, `sqrt(n)/d`, or the
    /// shortest round-tripping decimal.
    pub fn from_value(v: f64) -> Expr {
        if !v.is_finite() {
            return Expr::number(v);
        }
        if v.is_sign_negative() {
            let inner = Expr::from_value(-v);
            let candidate = Expr::Neg(Box::new(inner));
            if candidate.eval_const().map(f64::to_bits) == Some(v.to_bits()) {
                return candidate;
            }
            return Expr::number(v);
        }
        if v.fract() == 0.0 && v < 1e15 {
            return Expr::number(v);
        }
        let same = |e: &Expr| e.eval_const().is_some_and(|x| x.to_bits() == v.to_bits());
        let mut candidates = vec![Expr::Pi];
        for d in 1..=16i64 {
            for k in 1..=64i64 {
                let num = if k == 1 { Expr::Pi } else { Expr::bin(BinOp::Mul, Expr::int(k), Expr::Pi) };
                candidates.push(if d == 1 { num } else { Expr::bin(BinOp::Div, num, Expr::int(d)) });
            }
        }
        for n in [2i64, 3, 5, 6, 7] {
            let root = Expr::Sqrt(Box::new(Expr::int(n)));
            candidates.push(Expr::bin(BinOp::Div, Expr::int(1), root.clone()));
            for d in 1..=8i64 {
                candidates.push(if d == 1 { root.clone() } else { Expr::bin(BinOp::Div, root.clone(), Expr::int(d)) });
            }
        }
        candidates.into_iter().find(same).unwrap_or_else(|| Expr::number(v))
    }

    pub fn eval(&self, env: &BTreeMap<String, f64>) -> Result<f64, String> {
        let v = match self {
            Expr::Num(_, v) => *v,
            Expr::Pi => PI,
            Expr::Param(name) => *env.get(name).ok_or_else(|| format!("undefined parameter `{name}`"))?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Sqrt(a) => a.eval(env)?.sqrt(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expression `{self}` is not a finite number"))
        }
    }

    pub fn eval_const(&self) -> Option<f64> {
        self.eval(&BTreeMap::new()).ok()
    }

    /// Every parameter name the expression refers to.
    pub fn params(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Param(n) => out.push(n),
            Expr::Neg(a) | Expr::Sqrt(a) => a.collect_params(out),
            Expr::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Num(..) | Expr::Pi => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(text, _) => write!(f, "{text}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Param(n) => write!(f, "{n}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, a.precedence() < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                wrap(f, a, a.precedence() < p)?;
                write!(f, "{}", op.symbol())?;
                wrap(f, b, b.precedence() <= p)
            }
        }
    }
}
