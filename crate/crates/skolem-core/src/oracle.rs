//! Rigorous numeric evaluation of Skolem terms in logarithmic space.

use rug::{Float, Rational};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::skolem::{Kind, Term};

pub const DEFAULT_POINTS: [i64; 2] = [20, 40];
pub const DEFAULT_PRECISION: u32 = 128;

/// Largest `ln g(x)` for which `g(x)` is still materialised as an exponent.
const MAX_LN_EXPONENT: f64 = 1.0e8;

/// An enclosure of `ln f(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LnValue {
    pub enclosure: Interval,
}

impl LnValue {
    pub fn ln_value(&self) -> Float {
        self.enclosure.mid()
    }

    pub fn error_bound(&self) -> Float {
        self.enclosure.radius()
    }

    /// Enclosure of `f(x)` itself, when it is representable.
    pub fn value(&self, prec: u32) -> Result<Interval> {
        self.enclosure.exp(prec)
    }
}

fn eval_rec(t: &Term, x: &Interval, prec: u32, memo: &mut HashMap<Term, Interval>) -> Result<Interval> {
    if let Some(v) = memo.get(t) {
        return Ok(v.clone());
    }
    let v = if let Some(n) = t.nat_value() {
        Interval::from_int(n as i64, prec).ln(prec)?
    } else {
        match t.kind() {
            Kind::One => Interval::from_int(0, prec),
            Kind::X => x.clone(),
            Kind::Add(a, b) => {
                let la = eval_rec(a, x, prec, memo)?;
                let lb = eval_rec(b, x, prec, memo)?;
                la.ln_add_exp(&lb, prec)?
            }
            Kind::Mul(a, b) => {
                let la = eval_rec(a, x, prec, memo)?;
                let lb = eval_rec(b, x, prec, memo)?;
                la.add(&lb, prec)?
            }
            Kind::Pow(a, b) => {
                let la = eval_rec(a, x, prec, memo)?;
                if la.lo() == 0 && la.hi() == 0 {
                    Interval::from_int(0, prec)
                } else {
                    let lb = eval_rec(b, x, prec, memo)?;
                    if *lb.hi_float() > MAX_LN_EXPONENT {
                        return Err(Error::Range(format!(
                            "exponent {b} too large to evaluate in log space"
                        )));
                    }
                    lb.exp(prec)?.mul(&la, prec)?
                }
            }
        }
    };
    memo.insert(t.clone(), v.clone());
    Ok(v)
}

/// Enclosure of `ln t(x)` at working precision `prec`.
pub fn eval_ln(t: &Term, x: &Rational, prec: u32) -> Result<LnValue> {
    if *x <= 1 {
        return Err(Error::Precondition("evaluation point must exceed 1".into()));
    }
    let prec = prec.max(16);
    let lnx = Interval::point(x, prec).ln(prec)?;
    let mut memo = HashMap::new();
    Ok(LnValue { enclosure: eval_rec(t, &lnx, prec, &mut memo)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumericVerdict {
    Less,
    Greater,
    Mixed,
    Indistinguishable,
}

/// Per-point enclosures of `ln f − ln g` and the combined verdict.
#[derive(Clone, Debug)]
pub struct NumericComparison {
    pub verdict: NumericVerdict,
    pub differences: Vec<Interval>,
}

pub fn numeric_compare_detail(f: &Term, g: &Term, xs: &[Rational], prec: u32) -> Result<NumericComparison> {
    if xs.is_empty() {
        return Err(Error::Precondition("no sample points".into()));
    }
    let mut differences = Vec::with_capacity(xs.len());
    let (mut less, mut greater, mut unclear) = (false, false, false);
    for x in xs {
        let d = eval_ln(f, x, prec)?.enclosure.sub(&eval_ln(g, x, prec)?.enclosure, prec)?;
        if d.is_positive() {
            greater = true;
        } else if d.is_negative() {
            less = true;
        } else {
            unclear = true;
        }
        differences.push(d);
    }
    let verdict = match (less, greater, unclear) {
        (true, true, _) => NumericVerdict::Mixed,
        (_, _, true) => NumericVerdict::Indistinguishable,
        (true, false, false) => NumericVerdict::Less,
        (false, true, false) => NumericVerdict::Greater,
        (false, false, false) => NumericVerdict::Indistinguishable,
    };
    Ok(NumericComparison { verdict, differences })
}

/// Sign of `f − g` across the sample points.
pub fn numeric_compare(f: &Term, g: &Term, xs: &[Rational], prec: u32) -> Result<NumericVerdict> {
    Ok(numeric_compare_detail(f, g, xs, prec)?.verdict)
}

/// Enclosures of `f(x)/g(x)` at each sample point.
pub fn numeric_limit(f: &Term, g: &Term, xs: &[Rational], prec: u32) -> Result<Vec<Interval>> {
    xs.iter()
        .map(|x| {
            let d = eval_ln(f, x, prec)?.enclosure.sub(&eval_ln(g, x, prec)?.enclosure, prec)?;
            if d.hi_float().clone().abs() > MAX_LN_EXPONENT || d.lo_float().clone().abs() > MAX_LN_EXPONENT {
                return Err(Error::Range("ratio not representable".into()));
            }
            d.exp(prec)
        })
        .collect()
}
