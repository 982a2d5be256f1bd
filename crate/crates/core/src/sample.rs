//! Seeded random elements and matrices for property checks.

use crate::algebra::{Ctx, EvenScalar, Monomial, OddMonomial, Poly, SuperElement};
use crate::nu::FormalEntry;
use crate::supermatrix::SuperMatrix;
use num_bigint::BigInt;
use rand::Rng;

fn small_rational(rng: &mut impl Rng) -> crate::algebra::Rational {
    let n: i64 = rng.gen_range(-3..=3);
    let d: i64 = rng.gen_range(1..=2);
    crate::algebra::Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Random polynomial of degree ≤ 2 in at most `p` variables.
pub fn poly(p: usize, rng: &mut impl Rng) -> Poly {
    let mut out = Poly::from_int(rng.gen_range(-3..=3));
    if p == 0 {
        return out;
    }
    for _ in 0..rng.gen_range(0..=2) {
        let mut e = vec![0u32; p];
        for _ in 0..rng.gen_range(1..=2) {
            e[rng.gen_range(0..p)] += 1;
        }
        out = out.add(&Poly::term(Monomial::from_exponents(e), small_rational(rng)));
    }
    out
}

/// Random odd monomial of the given parity on `q` generators.
pub fn odd_monomial(q: usize, parity: u8, rng: &mut impl Rng) -> Option<OddMonomial> {
    if q == 0 {
        return (parity == 0).then_some(OddMonomial::ONE);
    }
    let limit = if q >= 64 { u64::MAX } else { (1u64 << q) - 1 };
    for _ in 0..64 {
        let m = OddMonomial(rng.gen::<u64>() & limit);
        if m.parity() == parity {
            return Some(m);
        }
    }
    None
}

/// Random homogeneous element with polynomial coefficients.
pub fn element(ctx: &Ctx, parity: u8, max_terms: usize, rng: &mut impl Rng) -> SuperElement {
    let terms = (0..rng.gen_range(1..=max_terms.max(1)))
        .filter_map(|_| odd_monomial(ctx.q(), parity, rng).map(|m| (m, EvenScalar::new(poly(ctx.p(), rng), Poly::one()))))
        .collect::<Vec<_>>();
    SuperElement::from_terms(ctx, terms)
}

/// Random nilpotent element (no body) of the given parity.
pub fn nilpotent(ctx: &Ctx, parity: u8, rng: &mut impl Rng) -> SuperElement {
    element(ctx, parity, 2, rng).nilpotent_part()
}

/// Random invertible `(k|l)×(k|l)` matrix: a triangular body with nonzero constant
/// diagonal, polynomial entries above it, and nilpotent noise everywhere.
pub fn invertible_matrix(ctx: &Ctx, k: usize, l: usize, rng: &mut impl Rng) -> SuperMatrix {
    let n = k + l;
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(n);
        for c in 0..n {
            let block = u8::from(r >= k) ^ u8::from(c >= k);
            let e = if block == 1 {
                element(ctx, 1, 2, rng)
            } else {
                let body = if r == c {
                    let mut v = 0i64;
                    while v == 0 {
                        v = rng.gen_range(-3..=3);
                    }
                    SuperElement::from_int(ctx, v)
                } else if c > r {
                    SuperElement::scalar(ctx, EvenScalar::new(poly(ctx.p(), rng), Poly::one()))
                } else {
                    SuperElement::zero(ctx)
                };
                body.add(&nilpotent(ctx, 0, rng)).expect("same context")
            };
            row.push(FormalEntry::Ring(e));
        }
        rows.push(row);
    }
    // shuffle within blocks so the body is not always triangular
    let mut m = SuperMatrix::new(ctx, k, l, k, l, rows).expect("parity by construction");
    for (lo, hi) in [(0, k), (k, n)] {
        if hi - lo > 1 {
            let a = rng.gen_range(lo..hi);
            let b = rng.gen_range(lo..hi);
            m = swap_rows(&m, a, b);
        }
    }
    m
}

fn swap_rows(m: &SuperMatrix, a: usize, b: usize) -> SuperMatrix {
    let mut out = m.clone();
    for c in 0..m.cols() {
        out.set(a, c, m.get(b, c).clone());
        out.set(b, c, m.get(a, c).clone());
    }
    out
}
