//! Elements of `C(x) ⊗ ∧(e)`: finite sums of reduced rational functions times odd monomials.

use super::context::{same_ctx, Ctx};
use super::poly::{Poly, Rational};
use super::scalar::EvenScalar;
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Odd monomial `e_S`, stored as a bitmask of generator indices in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OddMonomial(pub u64);

impl OddMonomial {
    pub const ONE: OddMonomial = OddMonomial(0);

    pub fn from_indices(idx: &[usize]) -> Result<(OddMonomial, i32)> {
        let mut m = OddMonomial::ONE;
        let mut sign = 1;
        for &i in idx {
            let g = OddMonomial(1u64 << i);
            match m.mul(g) {
                Some((p, s)) => {
                    m = p;
                    sign *= s;
                }
                None => return Ok((OddMonomial::ONE, 0)),
            }
        }
        Ok((m, sign))
    }

    pub fn single(i: usize) -> OddMonomial {
        OddMonomial(1u64 << i)
    }

    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|i| self.0 >> i & 1 == 1).collect()
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn parity(self) -> u8 {
        (self.0.count_ones() % 2) as u8
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    /// Product with its sign, or `None` when a generator repeats.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: OddMonomial) -> Option<(OddMonomial, i32)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // inversions: pairs (i in self, j in other) with i > j
        let mut inv = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            let above = if j >= 63 { 0 } else { self.0 >> (j + 1) };
            inv += above.count_ones();
            b &= b - 1;
        }
        let sign = if inv.is_multiple_of(2) { 1 } else { -1 };
        Some((OddMonomial(self.0 | other.0), sign))
    }
}

/// Localization assumptions: polynomials assumed nonvanishing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssumptionSet {
    polys: BTreeSet<Poly>,
}

impl AssumptionSet {
    pub fn new() -> Self {
        AssumptionSet::default()
    }

    /// Record `p ≠ 0`; constants are dropped, zero is rejected.
    pub fn insert(&mut self, p: &Poly) -> Result<()> {
        if p.is_zero() {
            return Err(Error::NotInvertible("assumed nonzero polynomial is 0".into()));
        }
        if p.is_constant() {
            return Ok(());
        }
        self.polys.insert(p.monic());
        Ok(())
    }

    pub fn extend(&mut self, other: &AssumptionSet) {
        for p in &other.polys {
            self.polys.insert(p.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Poly> {
        self.polys.iter()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn display(&self, ctx: &Ctx) -> Vec<String> {
        self.polys
            .iter()
            .map(|p| format!("{} != 0", p.display(&ctx.even_names)))
            .collect()
    }
}

/// The relation `Σ r_α² = 1` on designated even generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionRelation {
    /// Even-generator indices of `r_1..r_t`; the last one is eliminated.
    pub vars: Vec<usize>,
}

impl PartitionRelation {
    pub fn new(vars: Vec<usize>) -> Self {
        assert!(!vars.is_empty(), "partition relation needs at least one symbol");
        PartitionRelation { vars }
    }

    /// Normal form of `p` under `r_t² ↦ 1 − Σ_{α<t} r_α²`.
    pub fn reduce(&self, p: &Poly) -> Poly {
        let rt = *self.vars.last().unwrap();
        if p.degree_in(rt) < 2 {
            return p.clone();
        }
        let mut repl = Poly::one();
        for &v in &self.vars[..self.vars.len() - 1] {
            repl = repl.sub(&Poly::var(v).pow(2));
        }
        let coeffs = p.to_univariate(rt);
        // r_t^(2a+b) = repl^a r_t^b
        let mut out = Poly::zero();
        let mut pows: Vec<Poly> = vec![Poly::one()];
        for (e, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let a = e / 2;
            while pows.len() <= a {
                let nx = pows.last().unwrap().mul(&repl);
                pows.push(nx);
            }
            let mut t = c.mul(&pows[a]);
            if e % 2 == 1 {
                t = t.mul(&Poly::var(rt));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn reduce_scalar(&self, s: &EvenScalar) -> EvenScalar {
        EvenScalar::new(self.reduce(s.numer()), self.reduce(s.denom()))
    }

    pub fn is_zero_scalar(&self, s: &EvenScalar) -> bool {
        self.reduce(s.numer()).is_zero()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SuperElement {
    ctx: Ctx,
    terms: BTreeMap<OddMonomial, EvenScalar>,
}

impl fmt::Debug for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl fmt::Display for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl SuperElement {
    pub fn zero(ctx: &Ctx) -> Self {
        SuperElement {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Ctx) -> Self {
        SuperElement::scalar(ctx, EvenScalar::one())
    }

    pub fn from_int(ctx: &Ctx, n: i64) -> Self {
        SuperElement::scalar(ctx, EvenScalar::from_int(n))
    }

    pub fn from_rational(ctx: &Ctx, r: Rational) -> Self {
        SuperElement::scalar(ctx, EvenScalar::from_rational(r))
    }

    pub fn scalar(ctx: &Ctx, s: EvenScalar) -> Self {
        SuperElement::term(ctx, OddMonomial::ONE, s)
    }

    pub fn term(ctx: &Ctx, m: OddMonomial, s: EvenScalar) -> Self {
        let mut e = SuperElement::zero(ctx);
        if !s.is_zero() {
            e.terms.insert(m, s);
        }
        e
    }

    pub fn even_gen(ctx: &Ctx, i: usize) -> Self {
        assert!(i < ctx.p(), "even generator index out of range");
        SuperElement::scalar(ctx, EvenScalar::var(i))
    }

    pub fn odd_gen(ctx: &Ctx, i: usize) -> Self {
        assert!(i < ctx.q(), "odd generator index out of range");
        SuperElement::term(ctx, OddMonomial::single(i), EvenScalar::one())
    }

    /// Generator by name.
    pub fn gen(ctx: &Ctx, name: &str) -> Result<Self> {
        match ctx.lookup(name) {
            Some((false, i)) => Ok(SuperElement::even_gen(ctx, i)),
            Some((true, i)) => Ok(SuperElement::odd_gen(ctx, i)),
            None => Err(Error::UnknownIdentifier(name.to_string())),
        }
    }

    pub fn from_terms(ctx: &Ctx, terms: impl IntoIterator<Item = (OddMonomial, EvenScalar)>) -> Self {
        let mut e = SuperElement::zero(ctx);
        for (m, s) in terms {
            e.add_term(m, s);
        }
        e
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OddMonomial, &EvenScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: OddMonomial) -> EvenScalar {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(OddMonomial::ONE).is_one()
    }

    /// `Some(0)` even, `Some(1)` odd, `None` inhomogeneous; zero counts as even.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = match it.next() {
            Some(p) => p,
            None => return Some(0),
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn has_parity(&self, p: u8) -> bool {
        self.is_zero() || self.parity() == Some(p)
    }

    /// Reduced part: every odd generator set to 0.
    pub fn body(&self) -> EvenScalar {
        self.coeff(OddMonomial::ONE)
    }

    pub fn nilpotent_part(&self) -> SuperElement {
        let mut e = self.clone();
        e.terms.remove(&OddMonomial::ONE);
        e
    }

    fn add_term(&mut self, m: OddMonomial, s: EvenScalar) {
        if s.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(s);
            }
            Entry::Occupied(mut o) => {
                let v = o.get().add(&s);
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    fn check_ctx(&self, other: &SuperElement) -> Result<()> {
        if same_ctx(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!(
                "{:?} vs {:?}",
                self.ctx.all_names().collect::<Vec<_>>(),
                other.ctx.all_names().collect::<Vec<_>>()
            )))
        }
    }

    pub fn add(&self, other: &SuperElement) -> Result<SuperElement> {
        self.check_ctx(other)?;
        let mut r = self.clone();
        for (m, s) in &other.terms {
            r.add_term(*m, s.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, other: &SuperElement) -> Result<SuperElement> {
        self.check_ctx(other)?;
        let mut r = self.clone();
        for (m, s) in &other.terms {
            r.add_term(*m, s.neg());
        }
        Ok(r)
    }

    pub fn neg(&self) -> SuperElement {
        SuperElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, s)| (*m, s.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &EvenScalar) -> SuperElement {
        if s.is_zero() {
            return SuperElement::zero(&self.ctx);
        }
        SuperElement {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.mul(s))).collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> SuperElement {
        SuperElement::from_terms(&self.ctx, self.terms.iter().map(|(m, c)| (*m, c.scale(r))))
    }

    pub fn mul(&self, other: &SuperElement) -> Result<SuperElement> {
        self.check_ctx(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &SuperElement) -> SuperElement {
        let mut r = SuperElement::zero(&self.ctx);
        if self.is_zero() || other.is_zero() {
            return r;
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, sign)) = ma.mul(*mb) {
                    let c = ca.mul(cb);
                    r.add_term(m, if sign < 0 { c.neg() } else { c });
                }
            }
        }
        r
    }

    /// Inverse of a homogeneous even element with nonzero reduced part.
    ///
    /// The numerator of the reduced part is appended to `assume`.
    pub fn invert(&self, assume: &mut AssumptionSet) -> Result<SuperElement> {
        if self.parity() != Some(0) {
            return Err(Error::NotInvertible(format!("{self} is not even")));
        }
        let a0 = self.body();
        let inv0 = a0
            .recip()
            .ok_or_else(|| Error::NotInvertible(format!("{self} has zero reduced part")))?;
        assume.insert(a0.numer())?;
        let nil = self.nilpotent_part();
        let base = SuperElement::scalar(&self.ctx, inv0.clone());
        if nil.is_zero() {
            return Ok(base);
        }
        // a⁻¹ = a₀⁻¹ Σ (−a₀⁻¹ a_nil)^i
        let step = nil.scale(&inv0.neg());
        let mut sum = SuperElement::one(&self.ctx);
        let mut pw = SuperElement::one(&self.ctx);
        loop {
            pw = pw.mul_unchecked(&step);
            if pw.is_zero() {
                break;
            }
            sum = sum.add(&pw)?;
        }
        Ok(sum.scale(&inv0))
    }

    /// Equality, optionally modulo a partition relation.
    pub fn equals(&self, other: &SuperElement, rel: Option<&PartitionRelation>) -> bool {
        if !same_ctx(&self.ctx, &other.ctx) {
            return false;
        }
        match rel {
            None => self.terms == other.terms,
            Some(r) => match self.sub(other) {
                Ok(d) => d.terms.values().all(|c| r.is_zero_scalar(c)),
                Err(_) => false,
            },
        }
    }

    /// Coefficients reduced by the partition relation.
    pub fn reduce_mod(&self, rel: &PartitionRelation) -> SuperElement {
        SuperElement::from_terms(
            &self.ctx,
            self.terms.iter().map(|(m, c)| (*m, rel.reduce_scalar(c))),
        )
    }

    /// Same terms read in another context with identical generator layout prefix.
    pub fn recontext(&self, ctx: &Ctx) -> Result<SuperElement> {
        if ctx.q() < self.ctx.q() || ctx.p() < self.ctx.p() {
            return Err(Error::ContextMismatch("target context too small".into()));
        }
        for (a, b) in self.ctx.even_names.iter().zip(ctx.even_names.iter()) {
            if a != b {
                return Err(Error::ContextMismatch(format!("{a} vs {b}")));
            }
        }
        for (a, b) in self.ctx.odd_names.iter().zip(ctx.odd_names.iter()) {
            if a != b {
                return Err(Error::ContextMismatch(format!("{a} vs {b}")));
            }
        }
        Ok(SuperElement {
            ctx: ctx.clone(),
            terms: self.terms.clone(),
        })
    }

    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (m, c) in &self.terms {
            let odd: Vec<&str> = m
                .indices()
                .into_iter()
                .map(|i| self.ctx.odd_names.get(i).map(|s| s.as_str()).unwrap_or("?"))
                .collect();
            let cs = c.display(&self.ctx.even_names);
            let s = if odd.is_empty() {
                cs
            } else if c.is_one() {
                odd.join("*")
            } else if cs == "-1" {
                format!("-{}", odd.join("*"))
            } else if c.is_polynomial() && c.numer().num_terms() == 1 {
                format!("{cs}*{}", odd.join("*"))
            } else {
                format!("({cs})*{}", odd.join("*"))
            };
            parts.push(s);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }

    /// Evaluate a polynomial in the even generators at element images.
    pub(crate) fn eval_poly(p: &Poly, target: &Ctx, even_imgs: &[SuperElement]) -> SuperElement {
        p.eval_with(
            SuperElement::one(target),
            &|v| even_imgs[v].clone(),
            &|c| SuperElement::from_rational(target, c.clone()),
            &|a, b| a.mul_unchecked(b),
            &|a, b| {
                let mut r = a.clone();
                for (m, s) in &b.terms {
                    r.add_term(*m, s.clone());
                }
                r
            },
            SuperElement::zero(target),
        )
    }
}

/// Parity-preserving algebra homomorphism given by generator images.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    pub source: Ctx,
    pub target: Ctx,
    pub even: Vec<SuperElement>,
    pub odd: Vec<SuperElement>,
}

impl Substitution {
    pub fn new(source: &Ctx, target: &Ctx, even: Vec<SuperElement>, odd: Vec<SuperElement>) -> Result<Self> {
        if even.len() != source.p() || odd.len() != source.q() {
            return Err(Error::GeneratorCount(format!(
                "expected {}|{} images, got {}|{}",
                source.p(),
                source.q(),
                even.len(),
                odd.len()
            )));
        }
        for (i, e) in even.iter().enumerate() {
            if !same_ctx(e.ctx(), target) {
                return Err(Error::ContextMismatch(format!("image of {}", source.even_names[i])));
            }
            if !e.has_parity(0) {
                return Err(Error::ParityViolation(format!(
                    "even generator {} sent to {e}",
                    source.even_names[i]
                )));
            }
        }
        for (i, e) in odd.iter().enumerate() {
            if !same_ctx(e.ctx(), target) {
                return Err(Error::ContextMismatch(format!("image of {}", source.odd_names[i])));
            }
            if !e.has_parity(1) {
                return Err(Error::ParityViolation(format!(
                    "odd generator {} sent to {e}",
                    source.odd_names[i]
                )));
            }
        }
        Ok(Substitution {
            source: source.clone(),
            target: target.clone(),
            even,
            odd,
        })
    }

    pub fn identity(ctx: &Ctx) -> Self {
        Substitution {
            source: ctx.clone(),
            target: ctx.clone(),
            even: (0..ctx.p()).map(|i| SuperElement::even_gen(ctx, i)).collect(),
            odd: (0..ctx.q()).map(|i| SuperElement::odd_gen(ctx, i)).collect(),
        }
    }

    /// Build from a name → image map; missing generators are an error.
    pub fn from_map(source: &Ctx, target: &Ctx, map: &BTreeMap<String, SuperElement>) -> Result<Self> {
        let get = |n: &String| {
            map.get(n)
                .cloned()
                .ok_or_else(|| Error::GeneratorCount(format!("no image for generator {n}")))
        };
        let even = source.even_names.iter().map(get).collect::<Result<Vec<_>>>()?;
        let odd = source.odd_names.iter().map(get).collect::<Result<Vec<_>>>()?;
        for k in map.keys() {
            if source.lookup(k).is_none() {
                return Err(Error::UnknownIdentifier(k.clone()));
            }
        }
        Substitution::new(source, target, even, odd)
    }

    pub fn image_of(&self, name: &str) -> Option<&SuperElement> {
        match self.source.lookup(name)? {
            (false, i) => Some(&self.even[i]),
            (true, i) => Some(&self.odd[i]),
        }
    }

    pub fn images(&self) -> impl Iterator<Item = (&String, &SuperElement)> {
        self.source
            .even_names
            .iter()
            .zip(self.even.iter())
            .chain(self.source.odd_names.iter().zip(self.odd.iter()))
    }

    /// Apply to an element of the source context.
    pub fn apply(&self, a: &SuperElement, assume: &mut AssumptionSet) -> Result<SuperElement> {
        if !same_ctx(a.ctx(), &self.source) {
            return Err(Error::ContextMismatch("substitution source".into()));
        }
        let mut out = SuperElement::zero(&self.target);
        let mut den_cache: BTreeMap<Poly, SuperElement> = BTreeMap::new();
        for (m, c) in &a.terms {
            let mut v = SuperElement::eval_poly(c.numer(), &self.target, &self.even);
            if v.is_zero() {
                continue;
            }
            if !c.denom().is_one() {
                let dinv = match den_cache.get(c.denom()) {
                    Some(d) => d.clone(),
                    None => {
                        let d = SuperElement::eval_poly(c.denom(), &self.target, &self.even);
                        let di = d.invert(assume)?;
                        den_cache.insert(c.denom().clone(), di.clone());
                        di
                    }
                };
                v = v.mul_unchecked(&dinv);
            }
            for i in m.indices() {
                v = v.mul_unchecked(&self.odd[i]);
                if v.is_zero() {
                    break;
                }
            }
            for (mm, cc) in v.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// `other ∘ self`: first `self`, then `other` (as algebra maps, `other.apply(self.apply(a))`).
    ///
    /// Images of the composite are `other` applied to the images of `self`.
    pub fn then(&self, other: &Substitution, assume: &mut AssumptionSet) -> Result<Substitution> {
        if !same_ctx(&self.target, &other.source) {
            return Err(Error::ContextMismatch("composition".into()));
        }
        let even = self
            .even
            .iter()
            .map(|e| other.apply(e, assume))
            .collect::<Result<Vec<_>>>()?;
        let odd = self
            .odd
            .iter()
            .map(|e| other.apply(e, assume))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            source: self.source.clone(),
            target: other.target.clone(),
            even,
            odd,
        })
    }

    /// Generators whose images differ between `self` and `other`.
    pub fn diff(&self, other: &Substitution, rel: Option<&PartitionRelation>) -> Vec<(String, SuperElement, SuperElement)> {
        self.images()
            .zip(other.images())
            .filter(|((_, a), (_, b))| !a.equals(b, rel))
            .map(|((n, a), (_, b))| (n.clone(), a.clone(), b.clone()))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        same_ctx(&self.source, &self.target) && self.diff(&Substitution::identity(&self.source), None).is_empty()
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
