use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::{Float, Rational};
use skolem_core::constants::{cmp_const, ConstOrdering, Constant, EMembership, Expr};

const ORACLE_PREC: u32 = 512;

fn float(q: &Rational) -> Float {
    Float::with_val(ORACLE_PREC, q)
}

/// A random expression together with its value computed directly in 512-bit floats.
fn tree(rng: &mut StdRng, depth: u32) -> (Expr, Float) {
    if depth == 0 || rng.gen_bool(0.25) {
        let q = Rational::from((rng.gen_range(-9i64..=9), rng.gen_range(1i64..=5)));
        let v = float(&q);
        return (Expr::Rat(q), v);
    }
    let small = |rng: &mut StdRng| {
        let q = Rational::from((rng.gen_range(1i64..=7), rng.gen_range(1i64..=3)));
        (Expr::Rat(q.clone()), float(&q))
    };
    match rng.gen_range(0..6) {
        0 => {
            let ((a, x), (b, y)) = (tree(rng, depth - 1), tree(rng, depth - 1));
            (Expr::Add(a.into(), b.into()), x + y)
        }
        1 => {
            let ((a, x), (b, y)) = (tree(rng, depth - 1), tree(rng, depth - 1));
            (Expr::Sub(a.into(), b.into()), x - y)
        }
        2 => {
            let ((a, x), (b, y)) = (tree(rng, depth - 1), tree(rng, depth - 1));
            (Expr::Mul(a.into(), b.into()), x * y)
        }
        3 => {
            let (a, x) = tree(rng, depth - 1);
            let (b, y) = tree(rng, depth - 1);
            let (b, y) = if y.clone().abs() < 1e-6 { small(rng) } else { (b, y) };
            (Expr::Div(a.into(), b.into()), x / y)
        }
        4 => {
            let (a, x) = tree(rng, depth - 1);
            let (a, x) = if x.clone().abs() > 30 { small(rng) } else { (a, x) };
            (Expr::Exp(a.into()), x.exp())
        }
        _ => {
            let (a, x) = tree(rng, depth - 1);
            let (a, x) = if x < 1e-6 { small(rng) } else { (a, x) };
            (Expr::Log(a.into()), x.ln())
        }
    }
}

fn reversed(o: ConstOrdering) -> ConstOrdering {
    match o {
        ConstOrdering::Less => ConstOrdering::Greater,
        ConstOrdering::Greater => ConstOrdering::Less,
        other => other,
    }
}

fn contains(lo: &Rational, hi: &Rational, v: &Float) -> bool {
    let slack = Float::with_val(ORACLE_PREC, v.clone().abs() * Float::with_val(64, Float::i_exp(1, -400)))
        + Float::with_val(64, Float::i_exp(1, -400));
    let v_lo = v.clone() - &slack;
    let v_hi = v.clone() + &slack;
    *lo <= v_hi.to_rational().unwrap() && v_lo.to_rational().unwrap() <= *hi
}

#[test]
fn ten_thousand_random_trees() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut previous: Option<Constant> = None;
    let (mut built, mut skipped) = (0, 0);
    for _ in 0..10_000 {
        let depth = rng.gen_range(1..=4);
        let (e, v) = tree(&mut rng, depth);
        let c = match Constant::from_expr(&e) {
            Ok(c) => c,
            Err(err) => {
                panic!("{e} failed to build: {err}");
            }
        };
        let coarse = match c.eval_interval(64) {
            Ok(i) => i,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let fine = c.eval_interval(128).expect("refinement succeeds after a coarse enclosure");
        assert!(contains(&fine.lo(), &fine.hi(), &v), "{e} = {v} outside {fine}");
        assert!(contains(&coarse.lo(), &coarse.hi(), &v), "{e} = {v} outside {coarse}");
        assert!(fine.width() <= coarse.width() || fine.width() < 1e-30, "{e}: refinement widened");
        assert!(fine.separate(&coarse).is_none(), "{e}: refinement moved away");
        if v.clone().abs() > 1e-30 {
            let expect = if v > 0 { ConstOrdering::Greater } else { ConstOrdering::Less };
            assert_eq!(c.sign(256), expect, "{e}");
        }
        if let Some(q) = c.as_rational() {
            assert!(c.flag().in_e(), "{e}");
            assert_eq!(c.flag() == EMembership::InEPlus, q > 0, "{e}");
        }
        let round = Constant::from_expr(&c.to_expr()).expect("canonical tree rebuilds");
        assert_eq!(round, c, "{e}");
        if let Some(p) = &previous {
            assert_eq!(cmp_const(&c, p, 256), reversed(cmp_const(p, &c, 256)));
            assert_eq!(cmp_const(&c, &c, 256), ConstOrdering::EqualExact);
        }
        previous = Some(c);
        built += 1;
    }
    assert!(skipped * 100 <= built, "too many unevaluable trees: {skipped}");
}

#[test]
fn field_identities() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..500 {
        let (a, x) = tree(&mut rng, 3);
        let (b, _) = tree(&mut rng, 2);
        let a = Constant::from_expr(&a).unwrap();
        let b = Constant::from_expr(&b).unwrap();
        assert_eq!(a.add(&b).sub(&b), a);
        assert!(a.sub(&a).is_zero());
        if x.clone().abs() > 1e-6 {
            assert!(a.mul(&a.recip().unwrap()).is_one(), "{a}");
        }
        if x.clone().abs() < 30 {
            assert_eq!(a.exp().log().unwrap(), a);
        }
    }
}

#[test]
fn raising_the_cap_never_flips_a_verdict() {
    let mut rng = StdRng::seed_from_u64(99);
    let mut strict = 0;
    for _ in 0..1000 {
        let (a, _) = tree(&mut rng, 3);
        let (b, _) = tree(&mut rng, 3);
        let (a, b) = (Constant::from_expr(&a).unwrap(), Constant::from_expr(&b).unwrap());
        let verdicts: Vec<_> = [32, 64, 128, 256].iter().map(|&cap| cmp_const(&a, &b, cap)).collect();
        let first = verdicts.iter().find(|v| matches!(v, ConstOrdering::Less | ConstOrdering::Greater));
        if let Some(&v) = first {
            let i = verdicts.iter().position(|w| *w == v).unwrap();
            assert!(verdicts[i..].iter().all(|w| *w == v), "{a} vs {b}: {verdicts:?}");
            strict += 1;
        }
    }
    assert!(strict > 900);
}
