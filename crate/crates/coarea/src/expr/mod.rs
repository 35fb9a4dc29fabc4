//! Expression maps: a small arithmetic language parsed into differentiable
//! maps `phi: R^k -> R^n`.
//!
//! The grammar covers `+ - * / ^`, `sqrt`, `exp`, `log`, `abs`, `sin`, `cos`
//! plus variables `x1..xk` and decimal constants. One expression per output
//! coordinate, separated by `;`. See `GRAMMAR.md` in the repository root for
//! the EBNF.
//!
//! Jacobians are exact forward-mode derivatives computed with dual vectors,
//! not finite differences.

mod dual;
mod interval;
mod parse;

pub use dual::DualVec;
pub use interval::Interval;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Unary functions of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Abs,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

/// Expression tree over variables `x1..xk` (stored zero-based).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed differentiable map `R^k -> R^n`, one expression per coordinate.
///
/// Immutable after construction; evaluation is pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    coords: Vec<Expr>,
    input_dim: usize,
}

impl MapExpr {
    /// Parses a semicolon-separated list of `n` expressions over `x1..xk`.
    pub fn parse(source: &str, k: usize, n: usize) -> Result<MapExpr> {
        parse::parse_map(source, k, n)
    }

    pub fn from_coords(coords: Vec<Expr>, k: usize) -> Result<MapExpr> {
        for c in &coords {
            check_vars(c, k)?;
        }
        Ok(MapExpr { coords, input_dim: k })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Expr] {
        &self.coords
    }

    /// Coordinatewise evaluation at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension(format!(
                "point has length {}, map expects {}",
                x.len(),
                self.input_dim
            )));
        }
        self.coords.iter().map(|c| eval_expr(c, x)).collect()
    }

    /// Evaluates a single output coordinate.
    pub fn eval_coord(&self, i: usize, x: &[f64]) -> Result<f64> {
        eval_expr(&self.coords[i], x)
    }

    /// Exact forward-mode Jacobian, an `n x k` matrix.
    pub fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension(format!(
                "point has length {}, map expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let k = self.input_dim;
        let mut j = Mat::zeros(self.coords.len(), k);
        for (i, c) in self.coords.iter().enumerate() {
            let d = dual::eval_dual(c, x)?;
            for (col, g) in d.grad.iter().enumerate() {
                j[(i, col)] = *g;
            }
        }
        Ok(j)
    }

    /// Conservative range enclosure of every coordinate over an axis-aligned
    /// region; `None` entries mark coordinates undefined on the whole region.
    pub fn eval_interval(&self, lo: &[f64], hi: &[f64]) -> Vec<Option<Interval>> {
        self.coords
            .iter()
            .map(|c| interval::eval_interval(c, lo, hi))
            .collect()
    }

    /// Renders the map back to grammar text, one coordinate per `;`.
    pub fn unparse(&self) -> String {
        self.coords
            .iter()
            .map(parse::unparse)
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Serialises as `{"k":…,"n":…,"coords":[…]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.input_dim,
            "n": self.output_dim(),
            "coords": self.coords.iter().map(parse::unparse).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MapExpr> {
        let k = v
            .get("k")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Config("map json needs integer field `k`".into()))?
            as usize;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Config("map json needs integer field `n`".into()))?
            as usize;
        let coords = v
            .get("coords")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Config("map json needs array field `coords`".into()))?;
        let src = coords
            .iter()
            .map(|c| {
                c.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::Config("coords entries must be strings".into()))
            })
            .collect::<Result<Vec<_>>>()?
            .join(";");
        MapExpr::parse(&src, k, n)
    }
}

fn check_vars(e: &Expr, k: usize) -> Result<()> {
    match e {
        Expr::Const(_) => Ok(()),
        Expr::Var(i) => {
            if *i < k {
                Ok(())
            } else {
                Err(Error::UnknownVariable { index: i + 1, max: k })
            }
        }
        Expr::Neg(a) | Expr::Call(_, a) => check_vars(a, k),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            check_vars(a, k)?;
            check_vars(b, k)
        }
    }
}

/// Integer exponent fast path: `Pow` with a literal integer exponent is
/// evaluated by repeated multiplication, which keeps negative bases legal
/// (`x^2` must work on all of R).
pub(crate) fn const_int_exponent(e: &Expr) -> Option<i32> {
    match e {
        Expr::Const(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => Some(*c as i32),
        Expr::Neg(inner) => const_int_exponent(inner).map(|n| -n),
        _ => None,
    }
}

fn eval_expr(e: &Expr, x: &[f64]) -> Result<f64> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var(i) => x[*i],
        Expr::Neg(a) => -eval_expr(a, x)?,
        Expr::Add(a, b) => eval_expr(a, x)? + eval_expr(b, x)?,
        Expr::Sub(a, b) => eval_expr(a, x)? - eval_expr(b, x)?,
        Expr::Mul(a, b) => eval_expr(a, x)? * eval_expr(b, x)?,
        Expr::Div(a, b) => {
            let d = eval_expr(b, x)?;
            if d == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            eval_expr(a, x)? / d
        }
        Expr::Pow(a, b) => {
            let base = eval_expr(a, x)?;
            if let Some(n) = const_int_exponent(b) {
                if n < 0 && base == 0.0 {
                    return Err(Error::Domain("zero raised to a negative power".into()));
                }
                base.powi(n)
            } else {
                let p = eval_expr(b, x)?;
                if base <= 0.0 {
                    return Err(Error::Domain(format!(
                        "power with non-integer exponent needs positive base, got {base}"
                    )));
                }
                base.powf(p)
            }
        }
        Expr::Call(f, a) => {
            let v = eval_expr(a, x)?;
            match f {
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative value {v}")));
                    }
                    v.sqrt()
                }
                Func::Exp => v.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(Error::Domain(format!("log of nonpositive value {v}")));
                    }
                    v.ln()
                }
                Func::Abs => v.abs(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
            }
        }
    };
    if v.is_nan() {
        return Err(Error::Domain("evaluation produced NaN".into()));
    }
    Ok(v)
}
