//! Exact scalars: arbitrary-precision rationals and polynomials in ℏ with
//! exponents in ½ℤ≥0.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// The coefficient field. `BigRational` is always reduced with positive
/// denominator, which is exactly the invariant we need.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// A half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Half(pub i64);

impl Half {
    pub const ZERO: Half = Half(0);
    pub const ONE: Half = Half(2);

    pub fn from_int(n: i64) -> Half {
        Half(2 * n)
    }

    /// The value as a rational number.
    pub fn to_rational(self) -> Rational {
        rat(self.0, 2)
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A polynomial in ℏ with rational coefficients and exponents in ½ℤ≥0.
///
/// No zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScalarPoly {
    /// exponent (half-integer) → coefficient
    terms: BTreeMap<Half, Rational>,
}

impl ScalarPoly {
    pub fn zero() -> Self {
        ScalarPoly::default()
    }

    pub fn one() -> Self {
        ScalarPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Half::ZERO, c);
        }
        ScalarPoly { terms }
    }

    /// c·ℏ^e
    pub fn monomial(c: Rational, e: Half) -> Self {
        assert!(e.0 >= 0, "hbar exponent must be non-negative");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        ScalarPoly { terms }
    }

    pub fn hbar() -> Self {
        ScalarPoly::monomial(Rational::one(), Half::ONE)
    }

    pub fn hbar_pow(e: Half) -> Self {
        ScalarPoly::monomial(Rational::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Half::ZERO)
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Half, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exponent(&self) -> Option<Half> {
        self.terms.keys().next().copied()
    }

    pub fn add_term(&mut self, e: Half, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rational) -> ScalarPoly {
        if c.is_zero() {
            return ScalarPoly::zero();
        }
        ScalarPoly {
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn mul_hbar_pow(&self, e: Half) -> ScalarPoly {
        ScalarPoly {
            terms: self.terms.iter().map(|(x, c)| (*x + e, c.clone())).collect(),
        }
    }

    /// Exact division by ℏ^e; `None` if any exponent would drop below zero.
    pub fn try_div_hbar_pow(&self, e: Half) -> Option<ScalarPoly> {
        let mut terms = BTreeMap::new();
        for (x, c) in &self.terms {
            let nx = *x - e;
            if nx.0 < 0 {
                return None;
            }
            terms.insert(nx, c.clone());
        }
        Some(ScalarPoly { terms })
    }

    /// Drop all terms with exponent ≥ `order` (comparison on half-integers).
    pub fn truncate_hbar(&self, order: Half) -> ScalarPoly {
        ScalarPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.0 < order.0)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Keep only the ℏ⁰ coefficient (the symbol part).
    pub fn symbol_part(&self) -> Option<Rational> {
        self.terms.get(&Half::ZERO).cloned()
    }

    /// Evaluate at ℏ = `value`. Half-integer exponents require `value` to be a
    /// perfect square of a rational.
    pub fn specialize(&self, value: &Rational) -> Result<Rational> {
        let needs_sqrt = self.terms.keys().any(|e| !e.is_integer());
        let sqrt = if needs_sqrt {
            Some(rational_sqrt(value).ok_or_else(|| Error::IrrationalEvaluation(value.to_string()))?)
        } else {
            None
        };
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let power = if e.is_integer() {
                pow_rational(value, e.0 / 2)
            } else {
                pow_rational(sqrt.as_ref().unwrap(), e.0)
            };
            acc += c * power;
        }
        Ok(acc)
    }
}

fn pow_rational(base: &Rational, exp: i64) -> Rational {
    assert!(exp >= 0, "negative hbar exponents are not stored");
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// √r as a rational, when it exists (r ≥ 0 with square numerator and
/// denominator).
fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

impl Add for &ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, rhs: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl AddAssign<&ScalarPoly> for ScalarPoly {
    fn add_assign(&mut self, rhs: &ScalarPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl Sub for &ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, rhs: &ScalarPoly) -> ScalarPoly {
        self + &(-rhs)
    }
}

impl Neg for &ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        ScalarPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Mul for &ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, rhs: &ScalarPoly) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(*e1 + *e2, &(c1 * c2));
            }
        }
        out
    }
}

impl fmt::Display for ScalarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            let show_coeff = !mag.is_one() || e.0 == 0;
            if show_coeff {
                write!(f, "{}", mag)?;
            }
            if e.0 != 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if e.0 == 2 {
                    write!(f, "hbar")?;
                } else if e.is_integer() {
                    write!(f, "hbar^{}", e.0 / 2)?;
                } else {
                    write!(f, "hbar^({}/2)", e.0)?;
                }
            }
        }
        Ok(())
    }
}

/// Evaluate `p` at ℏ = `hbar_value` (the ℏ→1 reduction and friends).
pub fn scalar_specialize(p: &ScalarPoly, hbar_value: &Rational) -> Result<Rational> {
    p.specialize(hbar_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specialize_integer_exponents() {
        // 3ℏ² − ℏ at ℏ=1 → 2
        let mut p = ScalarPoly::monomial(rat_int(3), Half::from_int(2));
        p += &ScalarPoly::monomial(rat_int(-1), Half::ONE);
        assert_eq!(scalar_specialize(&p, &rat_int(1)).unwrap(), rat_int(2));
        assert_eq!(scalar_specialize(&p, &rat_int(2)).unwrap(), rat_int(10));
    }

    #[test]
    fn specialize_half_exponents() {
        // ℏ^{3/2} at ℏ=1 → 1; at ℏ=2 → error; at ℏ=4 → 8; at ℏ=4/9 → 8/27
        let p = ScalarPoly::hbar_pow(Half(3));
        assert_eq!(scalar_specialize(&p, &rat_int(1)).unwrap(), rat_int(1));
        assert!(matches!(
            scalar_specialize(&p, &rat_int(2)),
            Err(Error::IrrationalEvaluation(_))
        ));
        assert_eq!(scalar_specialize(&p, &rat_int(4)).unwrap(), rat_int(8));
        assert_eq!(scalar_specialize(&p, &rat(4, 9)).unwrap(), rat(8, 27));
    }

    #[test]
    fn ring_ops() {
        let a = ScalarPoly::monomial(rat(1, 2), Half(1));
        let b = ScalarPoly::monomial(rat(2, 3), Half(3));
        let ab = &a * &b;
        assert_eq!(ab, ScalarPoly::monomial(rat(1, 3), Half(4)));
        let s = &a - &a;
        assert!(s.is_zero());
    }

    #[test]
    fn div_hbar() {
        let p = ScalarPoly::monomial(rat_int(5), Half::from_int(2));
        let q = p.try_div_hbar_pow(Half::ONE).unwrap();
        assert_eq!(q, ScalarPoly::monomial(rat_int(5), Half::ONE));
        assert!(q.try_div_hbar_pow(Half::from_int(2)).is_none());
    }

    #[test]
    fn display() {
        let mut p = ScalarPoly::monomial(rat_int(-2), Half::ONE);
        p += &ScalarPoly::monomial(rat(3, 2), Half(3));
        assert_eq!(p.to_string(), "-2*hbar + 3/2*hbar^(3/2)");
    }
}
