//! Closed intervals with MPFR endpoints and outward rounding.

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Rational};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` guaranteed to contain the quantity it encloses.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

fn fmin(a: Float, b: Float) -> Float {
    if a <= b { a } else { b }
}

fn fmax(a: Float, b: Float) -> Float {
    if a >= b { a } else { b }
}

impl Interval {
    pub fn new(lo: Float, hi: Float) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Range("interval endpoint overflowed".into()));
        }
        debug_assert!(lo <= hi, "inverted interval");
        Ok(Interval { lo, hi })
    }

    pub fn point(q: &Rational, prec: u32) -> Self {
        Interval { lo: down(prec, q), hi: up(prec, q) }
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        Interval::point(&Rational::from(n), prec)
    }

    pub fn lo(&self) -> Rational {
        self.lo.to_rational().expect("finite endpoint")
    }

    pub fn hi(&self) -> Rational {
        self.hi.to_rational().expect("finite endpoint")
    }

    pub fn lo_float(&self) -> &Float {
        &self.lo
    }

    pub fn hi_float(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    /// Midpoint, rounded to nearest.
    pub fn mid(&self) -> Float {
        let s = Float::with_val(self.prec() + 1, &self.lo + &self.hi);
        s / 2u32
    }

    /// Half-width, rounded up.
    pub fn radius(&self) -> Float {
        let m = self.mid();
        fmax(up(self.prec(), &self.hi - &m), up(self.prec(), &m - &self.lo))
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo <= *q && *q <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    /// Strict order when the intervals are disjoint, `None` when they overlap.
    pub fn separate(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, o: &Interval, prec: u32) -> Result<Interval> {
        Interval::new(down(prec, &self.lo + &o.lo), up(prec, &self.hi + &o.hi))
    }

    pub fn sub(&self, o: &Interval, prec: u32) -> Result<Interval> {
        Interval::new(down(prec, &self.lo - &o.hi), up(prec, &self.hi - &o.lo))
    }

    pub fn mul(&self, o: &Interval, prec: u32) -> Result<Interval> {
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(prec, a * b);
            let h = up(prec, a * b);
            lo = Some(match lo {
                Some(x) => fmin(x, l),
                None => l,
            });
            hi = Some(match hi {
                Some(x) => fmax(x, h),
                None => h,
            });
        }
        Interval::new(lo.expect("four products"), hi.expect("four products"))
    }

    pub fn mul_rational(&self, q: &Rational, prec: u32) -> Result<Interval> {
        self.mul(&Interval::point(q, prec), prec)
    }

    pub fn recip(&self, prec: u32) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::Undetermined("division by an interval containing zero".into()));
        }
        Interval::new(down(prec, 1 / &self.hi), up(prec, 1 / &self.lo))
    }

    pub fn div(&self, o: &Interval, prec: u32) -> Result<Interval> {
        self.mul(&o.recip(prec)?, prec)
    }

    pub fn powi(&self, k: i32, prec: u32) -> Result<Interval> {
        if k < 0 {
            return self.powi(-k, prec)?.recip(prec);
        }
        let mut acc = Interval::from_int(1, prec);
        for _ in 0..k {
            acc = acc.mul(self, prec)?;
        }
        Ok(acc)
    }

    pub fn exp(&self, prec: u32) -> Result<Interval> {
        Interval::new(down(prec, self.lo.exp_ref()), up(prec, self.hi.exp_ref()))
    }

    pub fn ln(&self, prec: u32) -> Result<Interval> {
        if self.lo <= 0 {
            return Err(Error::Undetermined("logarithm of an interval not known to be positive".into()));
        }
        Interval::new(down(prec, self.lo.ln_ref()), up(prec, self.hi.ln_ref()))
    }

    /// Encloses `ln(e^a + e^b)` for `a ∈ self`, `b ∈ o`.
    pub fn ln_add_exp(&self, o: &Interval, prec: u32) -> Result<Interval> {
        fn lse(a: &Float, b: &Float, prec: u32, r: Round) -> Float {
            let (m, n) = if a >= b { (a, b) } else { (b, a) };
            let mut d = Float::new(prec);
            AssignRound::assign_round(&mut d, n - m, r);
            d.exp_round(r);
            d.ln_1p_round(r);
            let mut out = Float::new(prec);
            AssignRound::assign_round(&mut out, m + &d, r);
            out
        }
        Interval::new(lse(&self.lo, &o.lo, prec, Round::Down), lse(&self.hi, &o.hi, prec, Round::Up))
    }

    /// Decimal endpoints, rounded outward to `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (
            self.lo.to_string_radix_round(10, Some(digits), Round::Down),
            self.hi.to_string_radix_round(10, Some(digits), Round::Up),
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal(20);
        write!(f, "[{lo}, {hi}]")
    }
}
