//! Skolem terms: syntax, normal forms, components, regular functions and fragments.

mod classify;
mod enumerate;
mod normal;
mod term;

pub use classify::{
    classify, fragment_index, is_regular_below_xx, numerically_equal, order_type_bound, stratify, two_pow_n_x,
    two_pow_x_x, BoundSpec, Case, Classification, OrderBound, MAX_SEARCH,
};
pub use enumerate::{enumerate_terms, DEDUP_DEPTH, MAX_ENUMERATION_SIZE};
pub use normal::{
    cmp_terms, is_additively_irreducible, is_component, is_multiplicatively_irreducible, nat_term, normalize,
    prime_factors, NormalForm, Summand,
};
pub use term::{parse, shapes_of_size, Kind, Term, MAX_LITERAL};
