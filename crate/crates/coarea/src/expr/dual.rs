//! Forward-mode differentiation with dual vectors.
//!
//! A `DualVec` carries a value together with its gradient against all k
//! inputs, so one AST walk per output coordinate yields an exact Jacobian
//! row. Product, quotient and chain rules hold exactly up to floating
//! arithmetic.

use super::{const_int_exponent, Expr, Func};
use crate::error::{Error, Result};

/// Value plus gradient with respect to the k map inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVec {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl DualVec {
    pub fn constant(v: f64, k: usize) -> Self {
        DualVec { value: v, grad: vec![0.0; k] }
    }

    pub fn variable(v: f64, index: usize, k: usize) -> Self {
        let mut grad = vec![0.0; k];
        grad[index] = 1.0;
        DualVec { value: v, grad }
    }

    fn map_grad(mut self, value: f64, factor: f64) -> Self {
        for g in &mut self.grad {
            *g *= factor;
        }
        self.value = value;
        self
    }

    fn add(mut self, rhs: &DualVec) -> Self {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        self
    }

    fn sub(mut self, rhs: &DualVec) -> Self {
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        self
    }

    fn mul(mut self, rhs: &DualVec) -> Self {
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a = *a * rhs.value + self.value * b;
        }
        self.value *= rhs.value;
        self
    }

    fn div(mut self, rhs: &DualVec) -> Result<Self> {
        if rhs.value == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let inv = 1.0 / rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a = (*a - self.value * inv * b) * inv;
        }
        self.value *= inv;
        Ok(self)
    }

    fn neg(mut self) -> Self {
        self.value = -self.value;
        for g in &mut self.grad {
            *g = -*g;
        }
        self
    }

    fn powi(self, n: i32) -> Result<Self> {
        if n == 0 {
            let k = self.grad.len();
            return Ok(DualVec::constant(1.0, k));
        }
        if self.value == 0.0 && n < 0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        let v = self.value;
        let value = v.powi(n);
        let slope = f64::from(n) * v.powi(n - 1);
        Ok(self.map_grad(value, slope))
    }
}

pub fn eval_dual(e: &Expr, x: &[f64]) -> Result<DualVec> {
    let k = x.len();
    let d = match e {
        Expr::Const(c) => DualVec::constant(*c, k),
        Expr::Var(i) => DualVec::variable(x[*i], *i, k),
        Expr::Neg(a) => eval_dual(a, x)?.neg(),
        Expr::Add(a, b) => eval_dual(a, x)?.add(&eval_dual(b, x)?),
        Expr::Sub(a, b) => eval_dual(a, x)?.sub(&eval_dual(b, x)?),
        Expr::Mul(a, b) => eval_dual(a, x)?.mul(&eval_dual(b, x)?),
        Expr::Div(a, b) => eval_dual(a, x)?.div(&eval_dual(b, x)?)?,
        Expr::Pow(a, b) => {
            let base = eval_dual(a, x)?;
            if let Some(n) = const_int_exponent(b) {
                base.powi(n)?
            } else {
                let exp = eval_dual(b, x)?;
                if base.value <= 0.0 {
                    return Err(Error::Domain(format!(
                        "power with non-integer exponent needs positive base, got {}",
                        base.value
                    )));
                }
                // d(b^e) = b^e * (e' ln b + e b'/b)
                let value = base.value.powf(exp.value);
                let ln_b = base.value.ln();
                let mut grad = base.grad;
                for (g, eg) in grad.iter_mut().zip(&exp.grad) {
                    *g = value * (eg * ln_b + exp.value * *g / base.value);
                }
                DualVec { value, grad }
            }
        }
        Expr::Call(f, a) => {
            let inner = eval_dual(a, x)?;
            let v = inner.value;
            match f {
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative value {v}")));
                    }
                    if v == 0.0 {
                        return Err(Error::NondifferentiablePoint(
                            "sqrt has unbounded derivative at 0".into(),
                        ));
                    }
                    let s = v.sqrt();
                    inner.map_grad(s, 0.5 / s)
                }
                Func::Exp => {
                    let ev = v.exp();
                    inner.map_grad(ev, ev)
                }
                Func::Log => {
                    if v <= 0.0 {
                        return Err(Error::Domain(format!("log of nonpositive value {v}")));
                    }
                    inner.map_grad(v.ln(), 1.0 / v)
                }
                Func::Abs => {
                    if v == 0.0 {
                        return Err(Error::NondifferentiablePoint("abs at 0".into()));
                    }
                    inner.map_grad(v.abs(), v.signum())
                }
                Func::Sin => inner.map_grad(v.sin(), v.cos()),
                Func::Cos => inner.map_grad(v.cos(), -v.sin()),
            }
        }
    };
    if d.value.is_nan() {
        return Err(Error::Domain("evaluation produced NaN".into()));
    }
    Ok(d)
}
