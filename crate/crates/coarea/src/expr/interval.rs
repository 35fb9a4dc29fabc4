//! Interval evaluation of expression trees.
//!
//! Used by level-set extraction and preimage search to prune grid regions
//! that provably miss a fiber. Enclosures are conservative: the returned
//! interval always contains the range of the expression over the points of
//! the region where it is defined. `None` means the expression is undefined
//! on the entire region, so the region cannot meet any fiber.

use super::{const_int_exponent, Expr, Func};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn whole() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Membership test padded by a small mesh-safety margin.
    pub fn contains_with_margin(&self, v: f64) -> bool {
        let m = 1e-9 * (1.0 + v.abs() + self.lo.abs().min(1e12) + self.hi.abs().min(1e12));
        self.lo - m <= v && v <= self.hi + m
    }

    fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    fn sub(self, o: Interval) -> Interval {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }

    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    fn mul(self, o: Interval) -> Interval {
        // 0 * inf endpoints are treated as 0, which keeps enclosures valid
        fn m(a: f64, b: f64) -> f64 {
            if a == 0.0 || b == 0.0 {
                0.0
            } else {
                a * b
            }
        }
        let c = [
            m(self.lo, o.lo),
            m(self.lo, o.hi),
            m(self.hi, o.lo),
            m(self.hi, o.hi),
        ];
        Interval {
            lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn div(self, o: Interval) -> Interval {
        if o.contains(0.0) {
            return Interval::whole();
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        Interval {
            lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn powi(self, n: i32) -> Option<Interval> {
        if n == 0 {
            return Some(Interval::point(1.0));
        }
        if n < 0 {
            return Some(Interval::point(1.0).div(self.powi(-n)?));
        }
        let (a, b) = (self.lo, self.hi);
        if n % 2 == 1 || a >= 0.0 {
            Some(Interval::new(powi_f(a, n), powi_f(b, n)))
        } else if b <= 0.0 {
            Some(Interval::new(powi_f(b, n), powi_f(a, n)))
        } else {
            // even power straddling zero
            Some(Interval { lo: 0.0, hi: powi_f(a, n).max(powi_f(b, n)) })
        }
    }

    fn sqrt(self) -> Option<Interval> {
        if self.hi < 0.0 {
            return None;
        }
        Some(Interval { lo: self.lo.max(0.0).sqrt(), hi: self.hi.sqrt() })
    }

    fn exp(self) -> Interval {
        Interval { lo: self.lo.exp(), hi: self.hi.exp() }
    }

    fn log(self) -> Option<Interval> {
        if self.hi <= 0.0 {
            return None;
        }
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { self.lo.ln() };
        Some(Interval { lo, hi: self.hi.ln() })
    }

    fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval { lo: 0.0, hi: self.hi.max(-self.lo) }
        }
    }

    fn sin(self) -> Interval {
        trig_range(self, 0.0)
    }

    fn cos(self) -> Interval {
        // cos(x) = sin(x + pi/2)
        trig_range(self, PI / 2.0)
    }
}

fn powi_f(v: f64, n: i32) -> f64 {
    if v.is_infinite() {
        if n % 2 == 1 || v > 0.0 {
            v.signum() * f64::INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        v.powi(n)
    }
}

/// Range of sin over `[lo+shift, hi+shift]`: endpoint values plus any
/// interior critical point of sin (odd multiples of pi/2).
fn trig_range(iv: Interval, shift: f64) -> Interval {
    let lo = iv.lo + shift;
    let hi = iv.hi + shift;
    if !lo.is_finite() || !hi.is_finite() || hi - lo >= 2.0 * PI {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let mut min = lo.sin().min(hi.sin());
    let mut max = lo.sin().max(hi.sin());
    // first critical point >= lo is at (2m+1) pi/2
    let m = ((lo / (PI / 2.0) - 1.0) / 2.0).ceil() as i64;
    for j in m..m + 3 {
        let c = (2 * j + 1) as f64 * PI / 2.0;
        if c >= lo && c <= hi {
            min = min.min(c.sin());
            max = max.max(c.sin());
        }
    }
    Interval { lo: min, hi: max }
}

/// Conservative enclosure of `e` over the box `[lo, hi]`; `None` when the
/// expression is undefined on the whole box.
pub fn eval_interval(e: &Expr, lo: &[f64], hi: &[f64]) -> Option<Interval> {
    match e {
        Expr::Const(c) => Some(Interval::point(*c)),
        Expr::Var(i) => Some(Interval::new(lo[*i], hi[*i])),
        Expr::Neg(a) => Some(eval_interval(a, lo, hi)?.neg()),
        Expr::Add(a, b) => Some(eval_interval(a, lo, hi)?.add(eval_interval(b, lo, hi)?)),
        Expr::Sub(a, b) => Some(eval_interval(a, lo, hi)?.sub(eval_interval(b, lo, hi)?)),
        Expr::Mul(a, b) => Some(eval_interval(a, lo, hi)?.mul(eval_interval(b, lo, hi)?)),
        Expr::Div(a, b) => Some(eval_interval(a, lo, hi)?.div(eval_interval(b, lo, hi)?)),
        Expr::Pow(a, b) => {
            let base = eval_interval(a, lo, hi)?;
            if let Some(n) = const_int_exponent(b) {
                base.powi(n)
            } else {
                // general powers are only defined on positive bases
                let exponent = eval_interval(b, lo, hi)?;
                if base.hi <= 0.0 {
                    return None;
                }
                let b_pos = Interval { lo: base.lo.max(f64::MIN_POSITIVE), hi: base.hi };
                Some(b_pos.log()?.mul(exponent).exp())
            }
        }
        Expr::Call(f, a) => {
            let inner = eval_interval(a, lo, hi)?;
            match f {
                Func::Sqrt => inner.sqrt(),
                Func::Exp => Some(inner.exp()),
                Func::Log => inner.log(),
                Func::Abs => Some(inner.abs()),
                Func::Sin => Some(inner.sin()),
                Func::Cos => Some(inner.cos()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MapExpr;

    fn enclosure(src: &str, k: usize, lo: &[f64], hi: &[f64]) -> Option<Interval> {
        let m = MapExpr::parse(src, k, 1).unwrap();
        m.eval_interval(lo, hi).into_iter().next().unwrap()
    }

    #[test]
    fn norm_squared_enclosure_contains_true_range() {
        let iv = enclosure("x1^2+x2^2", 2, &[-1.0, 0.5], &[2.0, 1.0]).unwrap();
        // true range: [0.25, 5]
        assert!(iv.lo <= 0.25 && iv.hi >= 5.0);
        assert!(iv.lo >= 0.0);
    }

    #[test]
    fn division_with_zero_denominator_widens_to_whole_line() {
        let iv = enclosure("1/x1", 1, &[-1.0], &[1.0]).unwrap();
        assert_eq!(iv, Interval::whole());
    }

    #[test]
    fn log_undefined_region_prunes() {
        assert_eq!(enclosure("log(x1)", 1, &[-2.0], &[-1.0]), None);
        let iv = enclosure("log(x1)", 1, &[-1.0], &[std::f64::consts::E]).unwrap();
        assert_eq!(iv.lo, f64::NEG_INFINITY);
        assert!((iv.hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sin_range_catches_interior_extrema() {
        let iv = enclosure("sin(x1)", 1, &[0.1], &[3.0]).unwrap();
        assert!((iv.hi - 1.0).abs() < 1e-12);
        assert!(iv.lo <= 3.0f64.sin() + 1e-12);
    }

    #[test]
    fn interval_is_sound_on_random_boxes() {
        let sources = [
            ("sqrt(x1^2+x2^2)", 2),
            ("x1*x2-x2^3", 2),
            ("exp(x1)*cos(x2)", 2),
            ("abs(x1)-1/(2+x2)", 2),
        ];
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for (src, k) in sources {
            let m = MapExpr::parse(src, k, 1).unwrap();
            for _ in 0..200 {
                let lo: Vec<f64> = (0..k).map(|_| -2.0 + 3.0 * next()).collect();
                let hi: Vec<f64> = lo.iter().map(|l| l + 0.5 + next()).collect();
                let iv = match m.eval_interval(&lo, &hi)[0] {
                    Some(iv) => iv,
                    None => continue,
                };
                // sample interior points; every defined value must fall inside
                for _ in 0..20 {
                    let x: Vec<f64> = lo
                        .iter()
                        .zip(&hi)
                        .map(|(l, h)| l + (h - l) * next())
                        .collect();
                    if let Ok(v) = m.eval(&x) {
                        assert!(
                            iv.lo - 1e-9 <= v[0] && v[0] <= iv.hi + 1e-9,
                            "{src}: {} outside [{}, {}]",
                            v[0],
                            iv.lo,
                            iv.hi
                        );
                    }
                }
            }
        }
    }
}
