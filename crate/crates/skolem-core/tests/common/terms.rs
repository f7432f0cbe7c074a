use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use skolem_core::skolem::Term;

/// A random term with at most `budget` nodes; literals count as `n` nodes.
pub fn random_term(rng: &mut StdRng, budget: usize) -> Term {
    if budget < 3 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Term::one(),
            1 | 2 => Term::x(),
            _ if budget >= 3 => Term::lit(2).unwrap(),
            _ => Term::x(),
        };
    }
    let left = rng.gen_range(1..budget - 1);
    let a = random_term(rng, left);
    let b = random_term(rng, budget - 1 - left);
    match rng.gen_range(0..3) {
        0 => Term::add(&a, &b),
        1 => Term::mul(&a, &b),
        _ => Term::pow(&a, &b),
    }
}

/// `n` reproducible random terms of at most `budget` nodes each.
pub fn random_terms(seed: u64, n: usize, budget: usize) -> Vec<Term> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| random_term(&mut rng, budget)).collect()
}
