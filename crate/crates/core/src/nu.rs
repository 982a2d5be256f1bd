//! The odd involution ν and the formal odd unit 1ν.

use crate::algebra::{Ctx, OddMonomial, SuperElement};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Action {
    /// `e_S ↦ e_{S △ {1}}`.
    ToggleFirst,
    /// Explicit signed pairing on all `2^q` monomials.
    Table(BTreeMap<u64, (u64, i8)>),
}

/// A C∞-linear odd involution given by a signed pairing of odd monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuInvolution {
    ctx: Ctx,
    action: Action,
}

impl NuInvolution {
    /// The default involution on `ctx`.
    pub fn toggle_first(ctx: &Ctx) -> Self {
        NuInvolution {
            ctx: ctx.clone(),
            action: Action::ToggleFirst,
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// The same action on another context with the same odd generators.
    pub fn on_context(&self, ctx: &Ctx) -> Result<Self> {
        if ctx.q() != self.ctx.q() && matches!(self.action, Action::Table(_)) {
            return Err(Error::InvalidInvolution("odd generator count changed".into()));
        }
        Ok(NuInvolution {
            ctx: ctx.clone(),
            action: self.action.clone(),
        })
    }

    /// Custom pairing for a context with `q` odd generators.
    ///
    /// `pairs` lists `(S, T, sign)` meaning `ν(e_S) = sign·e_T` and `ν(e_T) = sign·e_S`.
    pub fn from_pairs(ctx: &Ctx, pairs: &[(Vec<usize>, Vec<usize>, i8)]) -> Result<Self> {
        let q = ctx.q();
        if q == 0 || q > 16 {
            return Err(Error::InvalidInvolution(format!(
                "custom pairings need 1 <= q <= 16, got {q}"
            )));
        }
        let mut table = BTreeMap::new();
        for (s, t, sign) in pairs {
            if *sign != 1 && *sign != -1 {
                return Err(Error::InvalidInvolution(format!("sign {sign} is not ±1")));
            }
            let ms = mask(s, q)?;
            let mt = mask(t, q)?;
            for (a, b) in [(ms, mt), (mt, ms)] {
                if let Some(prev) = table.insert(a, (b, *sign)) {
                    if prev != (b, *sign) {
                        return Err(Error::InvalidInvolution(format!(
                            "monomial {a:#b} paired twice"
                        )));
                    }
                }
            }
        }
        let inv = NuInvolution {
            ctx: ctx.clone(),
            action: Action::Table(table),
        };
        inv.validate()?;
        Ok(inv)
    }

    /// Check involutivity and parity swap on every monomial of the context.
    pub fn validate(&self) -> Result<()> {
        let q = self.ctx.q();
        if q == 0 {
            return Err(Error::InvalidInvolution("no odd generators".into()));
        }
        if q > 20 {
            return Err(Error::InvalidInvolution(format!("q = {q} too large to enumerate")));
        }
        for s in 0..(1u64 << q) {
            let (t, a) = self.on_monomial(OddMonomial(s), q)?;
            if t.0 >> q != 0 {
                return Err(Error::InvalidInvolution(format!("{s:#b} leaves the context")));
            }
            if t.parity() == OddMonomial(s).parity() {
                return Err(Error::InvalidInvolution(format!("{s:#b} keeps its parity")));
            }
            let (u, b) = self.on_monomial(t, q)?;
            if u.0 != s || a * b != 1 {
                return Err(Error::InvalidInvolution(format!("not involutive at {s:#b}")));
            }
        }
        Ok(())
    }

    fn on_monomial(&self, m: OddMonomial, q: usize) -> Result<(OddMonomial, i8)> {
        if q == 0 {
            return Err(Error::InvalidInvolution("ν needs an odd generator".into()));
        }
        match &self.action {
            Action::ToggleFirst => Ok((OddMonomial(m.0 ^ 1), 1)),
            Action::Table(t) => t
                .get(&m.0)
                .map(|&(b, s)| (OddMonomial(b), s))
                .ok_or_else(|| Error::InvalidInvolution(format!("no image for {:#b}", m.0))),
        }
    }

    /// ν applied term-wise; coefficients are left untouched.
    pub fn apply(&self, a: &SuperElement) -> Result<SuperElement> {
        if !crate::algebra::context::same_ctx(a.ctx(), &self.ctx) {
            return Err(Error::ContextMismatch("ν applied outside its context".into()));
        }
        let q = a.ctx().q();
        let mut terms = Vec::with_capacity(a.num_terms());
        for (m, c) in a.terms() {
            let (t, s) = self.on_monomial(*m, q)?;
            terms.push((t, if s < 0 { c.neg() } else { c.clone() }));
        }
        Ok(SuperElement::from_terms(a.ctx(), terms))
    }
}

fn mask(idx: &[usize], q: usize) -> Result<u64> {
    let mut m = 0u64;
    for &i in idx {
        if i == 0 || i > q {
            return Err(Error::InvalidInvolution(format!("generator index {i} outside 1..={q}")));
        }
        m |= 1 << (i - 1);
    }
    Ok(m)
}

/// Supermatrix entry: a ring element or the formal odd unit 1ν.
#[derive(Clone, PartialEq)]
pub enum FormalEntry {
    Ring(SuperElement),
    NuUnit,
}

impl fmt::Debug for FormalEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FormalEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormalEntry::Ring(a) => write!(f, "{a}"),
            FormalEntry::NuUnit => write!(f, "1nu"),
        }
    }
}

impl FormalEntry {
    pub fn zero(ctx: &Ctx) -> Self {
        FormalEntry::Ring(SuperElement::zero(ctx))
    }

    pub fn one(ctx: &Ctx) -> Self {
        FormalEntry::Ring(SuperElement::one(ctx))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FormalEntry::Ring(a) if a.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, FormalEntry::Ring(a) if a.is_one())
    }

    pub fn is_nu_unit(&self) -> bool {
        matches!(self, FormalEntry::NuUnit)
    }

    pub fn ring(&self) -> Option<&SuperElement> {
        match self {
            FormalEntry::Ring(a) => Some(a),
            FormalEntry::NuUnit => None,
        }
    }

    /// `Some(0)` even, `Some(1)` odd (1ν is odd), `None` inhomogeneous.
    pub fn parity(&self) -> Option<u8> {
        match self {
            FormalEntry::Ring(a) => a.parity(),
            FormalEntry::NuUnit => Some(1),
        }
    }

    pub fn has_parity(&self, p: u8) -> bool {
        match self {
            FormalEntry::Ring(a) => a.has_parity(p),
            FormalEntry::NuUnit => p == 1,
        }
    }

    pub fn neg(&self) -> Result<FormalEntry> {
        match self {
            FormalEntry::Ring(a) => Ok(FormalEntry::Ring(a.neg())),
            FormalEntry::NuUnit => Err(Error::FormalUnitSum("-1nu is not representable".into())),
        }
    }

    pub fn equals(&self, other: &FormalEntry) -> bool {
        match (self, other) {
            (FormalEntry::NuUnit, FormalEntry::NuUnit) => true,
            (FormalEntry::Ring(a), FormalEntry::Ring(b)) => a.equals(b, None),
            _ => false,
        }
    }
}

/// Product with the collapse rules of the formal unit.
pub fn entry_mul(x: &FormalEntry, y: &FormalEntry, inv: &NuInvolution) -> Result<FormalEntry> {
    use FormalEntry::*;
    Ok(match (x, y) {
        (Ring(a), Ring(b)) => Ring(a.mul(b)?),
        (NuUnit, NuUnit) => FormalEntry::one(inv.ctx()),
        (NuUnit, Ring(l)) | (Ring(l), NuUnit) => {
            if l.is_zero() {
                Ring(l.clone())
            } else if l.is_one() {
                NuUnit
            } else {
                Ring(inv.apply(l)?)
            }
        }
    })
}

/// Sum; a bare 1ν only absorbs zero.
pub fn entry_add(x: &FormalEntry, y: &FormalEntry) -> Result<FormalEntry> {
    use FormalEntry::*;
    match (x, y) {
        (Ring(a), Ring(b)) => Ok(Ring(a.add(b)?)),
        (NuUnit, Ring(b)) | (Ring(b), NuUnit) => {
            if b.is_zero() {
                Ok(NuUnit)
            } else {
                Err(Error::FormalUnitSum(format!("1nu + {b}")))
            }
        }
        (NuUnit, NuUnit) => Err(Error::FormalUnitSum("1nu + 1nu".into())),
    }
}

/// Difference; `1ν − 1ν = 0`, otherwise as [`entry_add`].
pub fn entry_sub(ctx: &Ctx, x: &FormalEntry, y: &FormalEntry) -> Result<FormalEntry> {
    use FormalEntry::*;
    match (x, y) {
        (NuUnit, NuUnit) => Ok(FormalEntry::zero(ctx)),
        (_, Ring(b)) => entry_add(x, &Ring(b.neg())),
        (Ring(a), NuUnit) => {
            if a.is_zero() {
                Err(Error::FormalUnitSum("0 - 1nu".into()))
            } else {
                Err(Error::FormalUnitSum(format!("{a} - 1nu")))
            }
        }
    }
}
