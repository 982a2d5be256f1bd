//! Reduced rational functions in the even generators.

use super::poly::{Poly, Rational};
use num_traits::{One, Zero};
use std::fmt;

/// `num / den` with `gcd(num, den) = 1` and a den whose lex-leading coefficient is 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EvenScalar {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for EvenScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl Default for EvenScalar {
    fn default() -> Self {
        EvenScalar::zero()
    }
}

impl From<Poly> for EvenScalar {
    fn from(p: Poly) -> Self {
        EvenScalar {
            num: p,
            den: Poly::one(),
        }
    }
}

impl EvenScalar {
    pub fn zero() -> Self {
        EvenScalar::from(Poly::zero())
    }

    pub fn one() -> Self {
        EvenScalar::from(Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        EvenScalar::from(Poly::from_int(n))
    }

    pub fn from_rational(r: Rational) -> Self {
        EvenScalar::from(Poly::constant(r))
    }

    pub fn var(v: usize) -> Self {
        EvenScalar::from(Poly::var(v))
    }

    /// Build and reduce `num / den`. Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return EvenScalar::zero();
        }
        if den.is_constant() {
            let c = den.constant_term();
            return EvenScalar::from(num.scale(&(Rational::one() / c)));
        }
        let g = num.gcd(&den);
        let (n, d) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides"),
                den.div_exact(&g).expect("gcd divides"),
            )
        };
        let lc = d.leading_coeff();
        let inv = Rational::one() / lc;
        EvenScalar {
            num: n.scale(&inv),
            den: d.scale(&inv),
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn add(&self, o: &EvenScalar) -> EvenScalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return EvenScalar::from(self.num.add(&o.num));
        }
        if self.den == o.den {
            return EvenScalar::new(self.num.add(&o.num), self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = o.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&b).add(&o.num.mul(&a));
        EvenScalar::new(num, a.mul(&o.den))
    }

    pub fn neg(&self) -> EvenScalar {
        EvenScalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &EvenScalar) -> EvenScalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &EvenScalar) -> EvenScalar {
        if self.is_zero() || o.is_zero() {
            return EvenScalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return EvenScalar::from(self.num.mul(&o.num));
        }
        // cross-cancel before multiplying
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = o.den.div_exact(&g1).expect("gcd divides");
        let n2 = o.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.leading_coeff();
        let inv = Rational::one() / lc;
        EvenScalar {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn scale(&self, r: &Rational) -> EvenScalar {
        if r.is_zero() {
            return EvenScalar::zero();
        }
        EvenScalar {
            num: self.num.scale(r),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse, or `None` for zero.
    pub fn recip(&self) -> Option<EvenScalar> {
        if self.is_zero() {
            return None;
        }
        Some(EvenScalar::new(self.den.clone(), self.num.clone()))
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.display(names);
        }
        let n = self.num.display(names);
        let d = self.den.display(names);
        let n = if self.num.num_terms() > 1 {
            format!("({n})")
        } else {
            n
        };
        let d = if self.den.num_terms() > 1 || !self.den.leading_coeff().is_one() || d.contains('*') {
            format!("({d})")
        } else {
            d
        };
        format!("{n}/{d}")
    }
}
