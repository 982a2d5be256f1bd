//! Sparse multivariate polynomials over exact rationals.
//!
//! Monomials are exponent vectors with trailing zeros trimmed, so the derived
//! `Vec` ordering is lexicographic with variable 0 most significant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rational = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: usize, e: u32) -> Self {
        if e == 0 {
            return Monomial::one();
        }
        let mut x = vec![0; v + 1];
        x[v] = e;
        Monomial(x)
    }

    pub fn from_exponents(mut e: Vec<u32>) -> Self {
        while e.last() == Some(&0) {
            e.pop();
        }
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, v: usize) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let mut e = Vec::with_capacity(n);
        for i in 0..n {
            e.push(self.exp(i) + other.exp(i));
        }
        Monomial(e)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut e = self.0.clone();
        for (i, &b) in other.0.iter().enumerate() {
            if e[i] < b {
                return None;
            }
            e[i] -= b;
        }
        Some(Monomial::from_exponents(e))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().min(other.0.len());
        Monomial::from_exponents((0..n).map(|i| self.0[i].min(other.0[i])).collect())
    }

    fn with_exp(&self, v: usize, e: u32) -> Monomial {
        let mut x = self.0.clone();
        if x.len() <= v {
            x.resize(v + 1, 0);
        }
        x[v] = e;
        Monomial::from_exponents(x)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.num_vars()).map(|i| format!("v{i}")).collect();
        write!(f, "{}", self.display(&names))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: usize) -> Self {
        Poly::term(Monomial::var(v, 1), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Lex-leading term.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let mut r = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), cc * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.is_constant() {
            let c = d.constant_term();
            return Some(self.scale(&(Rational::one() / c)));
        }
        let (lm, lc) = {
            let (m, c) = d.leading().expect("nonzero");
            (m.clone(), c.clone())
        };
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Rescale so the lex-leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        if lc.is_one() {
            return self.clone();
        }
        self.scale(&(Rational::one() / lc))
    }

    /// Substitute `p` for variable `v`.
    pub fn subst_var(&self, v: usize, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        let mut pows: Vec<Poly> = vec![Poly::one()];
        for (m, c) in &self.terms {
            let e = m.exp(v) as usize;
            while pows.len() <= e {
                let next = pows.last().unwrap().mul(p);
                pows.push(next);
            }
            let rest = m.with_exp(v, 0);
            out = out.add(&pows[e].mul_term(&rest, c));
        }
        out
    }

    /// Coefficients of `self` as a univariate polynomial in `v`, by degree.
    pub fn to_univariate(&self, v: usize) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp(v) as usize;
            out[e].add_term(m.with_exp(v, 0), c.clone());
        }
        out
    }

    pub fn from_univariate(v: usize, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            out = out.add(&c.mul_term(&Monomial::var(v, e as u32), &Rational::one()));
        }
        out
    }

    fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let mut g = match it.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        for m in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self.num_terms() == 1 || other.num_terms() == 1 {
            let g = self.monomial_content().gcd(&other.monomial_content());
            return Poly::term(g, Rational::one());
        }
        if self == other {
            return self.monic();
        }
        // cheap divisibility checks before the full recursion
        if self.num_terms() <= other.num_terms() {
            if other.div_exact(self).is_some() {
                return self.monic();
            }
        } else if self.div_exact(other).is_some() {
            return other.monic();
        }
        let nv = self.num_vars().max(other.num_vars());
        let in_a: Vec<bool> = (0..nv).map(|v| self.uses_var(v)).collect();
        let in_b: Vec<bool> = (0..nv).map(|v| other.uses_var(v)).collect();
        for v in 0..nv {
            if in_a[v] && !in_b[v] {
                return content_in(self, v).gcd(other);
            }
            if in_b[v] && !in_a[v] {
                return self.gcd(&content_in(other, v));
            }
        }
        let v = (0..nv).find(|&v| in_a[v]).expect("non-constant");
        let ca = content_in(self, v);
        let cb = content_in(other, v);
        let pa = self.div_exact(&ca).expect("content divides");
        let pb = other.div_exact(&cb).expect("content divides");
        let c = ca.gcd(&cb);
        let g = primitive_prs(pa.to_univariate(v), pb.to_univariate(v));
        c.mul(&Poly::from_univariate(v, &g)).monic()
    }

    /// Evaluate with variable images supplied by `img`, in any ring given by the closures.
    pub fn eval_with<T: Clone>(
        &self,
        one: T,
        img: &dyn Fn(usize) -> T,
        from_rational: &dyn Fn(&Rational) -> T,
        mul: &dyn Fn(&T, &T) -> T,
        add: &dyn Fn(&T, &T) -> T,
        zero: T,
    ) -> T {
        let mut cache: BTreeMap<(usize, u32), T> = BTreeMap::new();
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = from_rational(c);
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = if let Some(p) = cache.get(&(v, e)) {
                    p.clone()
                } else {
                    let base = img(v);
                    let mut p = one.clone();
                    for _ in 0..e {
                        p = mul(&p, &base);
                    }
                    cache.insert((v, e), p.clone());
                    p
                };
                t = mul(&t, &pw);
            }
            acc = add(&acc, &t);
        }
        acc
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let n = names.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
                if e == 1 {
                    factors.push(n);
                } else {
                    factors.push(format!("{n}^{e}"));
                }
            }
            let coeff = fmt_rational(&a);
            if factors.is_empty() {
                s.push_str(&coeff);
            } else if a.is_one() {
                s.push_str(&factors.join("*"));
            } else {
                s.push_str(&coeff);
                s.push('*');
                s.push_str(&factors.join("*"));
            }
        }
        s
    }
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Content of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: usize) -> Poly {
    let coeffs = p.to_univariate(v);
    let mut g = Poly::zero();
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn uni_degree(a: &[Poly]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn uni_trim(mut a: Vec<Poly>) -> Vec<Poly> {
    while a.len() > 1 && a.last().map(|c| c.is_zero()).unwrap_or(false) {
        a.pop();
    }
    a
}

fn uni_prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = uni_degree(b).expect("nonzero divisor");
    let lb = b[db].clone();
    let mut r: Vec<Poly> = a.to_vec();
    while let Some(dr) = uni_degree(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(&lb)).collect();
        for (i, bc) in b.iter().enumerate().take(db + 1) {
            next[i + shift] = next[i + shift].sub(&bc.mul(&lr));
        }
        r = uni_trim(next);
    }
    uni_trim(r)
}

fn uni_primitive(a: Vec<Poly>) -> Vec<Poly> {
    let mut g = Poly::zero();
    for c in a.iter().filter(|c| !c.is_zero()) {
        g = g.gcd(c);
        if g.is_one() {
            return a;
        }
    }
    if g.is_zero() {
        return a;
    }
    a.into_iter()
        .map(|c| c.div_exact(&g).expect("content divides"))
        .collect()
}

/// Primitive polynomial remainder sequence; inputs must be primitive.
fn primitive_prs(a: Vec<Poly>, b: Vec<Poly>) -> Vec<Poly> {
    let (mut a, mut b) = (uni_trim(a), uni_trim(b));
    if uni_degree(&a) < uni_degree(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        match uni_degree(&b) {
            None => return uni_primitive(a),
            Some(0) => return vec![Poly::one()],
            Some(_) => {}
        }
        let r = uni_prem(&a, &b);
        if uni_degree(&r).is_none() {
            return uni_primitive(b);
        }
        a = b;
        b = uni_primitive(r);
    }
}
