//! Truncated exact q-series with fractional exponents of denominator 24.
//!
//! Exponents are stored in units of 1/24, which covers everything the
//! supercharacter formulas produce: η(q) = q^{1/24}∏(1−qⁿ), the q^{(N+2n)²/8}
//! lattice sums and the theta series q^{n²/2}, q^{(2n+1)²/8}.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{rat_int, Rational};
use crate::{Error, Result};

/// Exponent in units of 1/24.
pub type Exp24 = i64;

pub const DENOM: i64 = 24;

/// Convert a rational exponent to 1/24 units; panics if it needs a finer
/// denominator (by design: in-scope formulas never do).
pub fn exp24_from_rational(r: &Rational) -> Exp24 {
    let scaled = r * BigRational::from(BigInt::from(DENOM));
    assert!(
        scaled.is_integer(),
        "q-exponent {} needs denominator finer than 24",
        r
    );
    scaled.to_integer().to_i64().expect("exponent overflow")
}

pub fn exp24_to_rational(e: Exp24) -> Rational {
    BigRational::new(BigInt::from(e), BigInt::from(DENOM))
}

/// A truncated exact q-series: all stored exponents are `< truncation`,
/// no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    truncation: Exp24,
    terms: BTreeMap<Exp24, Rational>,
}

impl QSeries {
    pub fn zero(truncation: Exp24) -> Self {
        QSeries {
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(truncation: Exp24) -> Self {
        Self::monomial(Rational::one(), 0, truncation)
    }

    /// c·q^e truncated at `truncation`.
    pub fn monomial(c: Rational, e: Exp24, truncation: Exp24) -> Self {
        let mut s = QSeries::zero(truncation);
        s.add_term(e, &c);
        s
    }

    pub fn truncation(&self) -> Exp24 {
        self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exp24, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: Exp24) -> Rational {
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_exponent(&self) -> Option<Exp24> {
        self.terms.keys().next().copied()
    }

    pub fn add_term(&mut self, e: Exp24, c: &Rational) {
        if c.is_zero() || e >= self.truncation {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn truncate_to(&self, truncation: Exp24) -> QSeries {
        assert!(
            truncation <= self.truncation,
            "cannot extend a truncated series"
        );
        QSeries {
            truncation,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| **e < truncation)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &QSeries) -> QSeries {
        let trunc = self.truncation.min(rhs.truncation);
        let mut out = self.truncate_to(trunc);
        for (e, c) in rhs.terms.range(..trunc) {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, rhs: &QSeries) -> QSeries {
        self.add(&rhs.scale(&rat_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(self.truncation);
        }
        QSeries {
            truncation: self.truncation,
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn shift(&self, e: Exp24) -> QSeries {
        QSeries {
            truncation: self.truncation + e,
            terms: self.terms.iter().map(|(x, c)| (*x + e, c.clone())).collect(),
        }
    }

    /// Exact product with precision tracking: the result is truncated at the
    /// largest order to which it is fully determined by the inputs.
    pub fn mul(&self, rhs: &QSeries) -> QSeries {
        let ea = self.leading_exponent().unwrap_or(self.truncation);
        let eb = rhs.leading_exponent().unwrap_or(rhs.truncation);
        let trunc = (self.truncation + eb).min(rhs.truncation + ea);
        let mut out = QSeries::zero(trunc);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                if e1 + e2 >= trunc {
                    break;
                }
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> QSeries {
        let mut acc = QSeries::one(self.truncation);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Exact product of two series with equal truncation orders.
pub fn series_multiply(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    if a.truncation != b.truncation {
        return Err(Error::MismatchedTruncation(
            exp24_to_rational(a.truncation).to_string(),
            exp24_to_rational(b.truncation).to_string(),
        ));
    }
    Ok(a.mul(b))
}

/// The multiplicative inverse: b with a·b = 1 up to truncation. The leading
/// exponent of b is the negative of a's.
pub fn series_reciprocal(a: &QSeries) -> Result<QSeries> {
    let e0 = a.leading_exponent().ok_or(Error::ZeroLeadingTerm)?;
    let c0 = a.coeff(e0);
    // b has leading exponent −e0; relative precision matches a's.
    let rel = a.truncation - e0;
    let trunc = rel - e0;
    let mut b = QSeries::zero(trunc);
    b.add_term(-e0, &(Rational::one() / &c0));
    // Solve (a·b)[e0 + t] = [t == 0] term by term on the 1/24 grid.
    for t in 1..rel {
        let mut acc = Rational::zero();
        for (ea, ca) in a.terms.range(e0 + 1..=e0 + t) {
            let eb = -e0 + t - (ea - e0);
            let cb = b.coeff(eb);
            if !cb.is_zero() {
                acc += ca * cb;
            }
        }
        if !acc.is_zero() {
            b.add_term(-e0 + t, &(-acc / &c0));
        }
    }
    Ok(b)
}

/// ∏_{n≥1, factors below truncation} (1 − c·q^{step·n + offset}) expanded exactly.
fn product_one_minus(trunc: Exp24, step: Exp24, offset: Exp24, c: &Rational) -> QSeries {
    let mut acc = QSeries::one(trunc);
    let mut e = step + offset;
    while e < trunc {
        let mut factor = QSeries::one(trunc);
        factor.add_term(e, &(-c.clone()));
        acc = acc.mul(&factor);
        e += step;
    }
    acc
}

/// η(q) = q^{1/24} ∏_{n≥1} (1 − qⁿ), truncated at `trunc`.
pub fn eta(trunc: Exp24) -> QSeries {
    product_one_minus(trunc - 1, DENOM, 0, &Rational::one()).shift(1)
}

/// η(q^{1/2})² = q^{1/24} ∏_{n≥1} (1 − q^{n/2})².
///
/// The square root of q^{1/48} never appears alone in any in-scope formula,
/// so the squared series is the named basis element.
pub fn eta_half_squared(trunc: Exp24) -> QSeries {
    let p = product_one_minus(trunc - 1, DENOM / 2, 0, &Rational::one());
    p.pow(2).shift(1)
}

/// η(q²) = q^{1/12} ∏_{n≥1} (1 − q^{2n}).
pub fn eta_q2(trunc: Exp24) -> QSeries {
    product_one_minus(trunc - 2, 2 * DENOM, 0, &Rational::one()).shift(2)
}

/// θ₂(q) = Σ_{n∈ℤ} q^{(n+1/2)²/2} = 2 Σ_{n≥0} q^{(2n+1)²/8}.
pub fn theta2(trunc: Exp24) -> QSeries {
    let mut s = QSeries::zero(trunc);
    let mut n: i64 = 0;
    loop {
        let e = (2 * n + 1) * (2 * n + 1) * 3; // (2n+1)²/8 in 1/24 units
        if e >= trunc {
            break;
        }
        s.add_term(e, &rat_int(2));
        n += 1;
    }
    s
}

/// θ₃(q) = Σ_{n∈ℤ} q^{n²/2} = 1 + 2 Σ_{n≥1} q^{n²/2}.
pub fn theta3(trunc: Exp24) -> QSeries {
    let mut s = QSeries::one(trunc);
    let mut n: i64 = 1;
    loop {
        let e = n * n * 12; // n²/2 in 1/24 units
        if e >= trunc {
            break;
        }
        s.add_term(e, &rat_int(2));
        n += 1;
    }
    s
}

/// E₂(q) = 1 − 24 Σ_{n≥1} σ₁(n) qⁿ.
pub fn e2(trunc: Exp24) -> QSeries {
    let mut s = QSeries::one(trunc);
    let mut n: i64 = 1;
    while n * DENOM < trunc {
        let sigma: i64 = (1..=n).filter(|d| n % d == 0).sum();
        s.add_term(n * DENOM, &rat_int(-24 * sigma));
        n += 1;
    }
    s
}

impl fmt::Display for QSeries {
    /// Factored rendering: q^{e0}(1 + 3q − 4q^{3/2} + …).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 + O(q^{})", exp24_to_rational(self.truncation));
        }
        let e0 = self.leading_exponent().unwrap();
        if e0 != 0 {
            write!(f, "q^{}*(", fmt_exponent(e0))?;
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
            let rel = e - e0;
            if rel == 0 {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                if rel == DENOM {
                    write!(f, "q")?;
                } else {
                    write!(f, "q^{}", fmt_exponent(rel))?;
                }
            }
        }
        if e0 != 0 {
            write!(f, ")")?;
        }
        write!(f, " + O(q^{})", fmt_exponent(self.truncation))
    }
}

fn fmt_exponent(e: Exp24) -> String {
    let g = e.gcd(&DENOM);
    let (n, d) = (e / g, DENOM / g);
    if d == 1 {
        format!("{}", n)
    } else {
        format!("({}/{})", n, d)
    }
}

// ---------------------------------------------------------------------------
// JSON serialisation: {"truncation": "p/q", "terms": [["en/ed","cn/cd"],...]}
// sorted by exponent.
// ---------------------------------------------------------------------------

fn rational_to_frac_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_frac(s: &str) -> Result<Rational> {
    let err = || Error::ParseError {
        offset: 0,
        message: format!("invalid fraction `{}`", s),
    };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| err())?;
    let d: BigInt = d.trim().parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

impl QSeries {
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                serde_json::json!([
                    rational_to_frac_string(&exp24_to_rational(*e)),
                    rational_to_frac_string(c)
                ])
            })
            .collect();
        serde_json::json!({
            "truncation": rational_to_frac_string(&exp24_to_rational(self.truncation)),
            "terms": terms,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<QSeries> {
        let bad = |m: &str| Error::ParseError {
            offset: 0,
            message: m.to_string(),
        };
        let obj = v.as_object().ok_or_else(|| bad("expected object"))?;
        let trunc_s = obj
            .get("truncation")
            .and_then(|t| t.as_str())
            .ok_or_else(|| bad("missing truncation"))?;
        let trunc_r = parse_frac(trunc_s)?;
        if !(trunc_r.denom().to_i64().map(|d| DENOM % d == 0)).unwrap_or(false) {
            return Err(bad("truncation denominator must divide 24"));
        }
        let truncation = exp24_from_checked(&trunc_r).ok_or_else(|| bad("truncation out of range"))?;
        let mut s = QSeries::zero(truncation);
        let terms = obj
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| bad("missing terms"))?;
        let mut last: Option<Exp24> = None;
        for t in terms {
            let pair = t.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("bad term"))?;
            let e_r = parse_frac(pair[0].as_str().ok_or_else(|| bad("bad exponent"))?)?;
            let c = parse_frac(pair[1].as_str().ok_or_else(|| bad("bad coefficient"))?)?;
            let e = exp24_from_checked(&e_r).ok_or_else(|| bad("exponent denominator must divide 24"))?;
            if e >= truncation {
                return Err(bad("exponent at or beyond truncation"));
            }
            if c.is_zero() {
                return Err(bad("zero coefficient stored"));
            }
            if let Some(prev) = last {
                if e <= prev {
                    return Err(bad("terms not strictly sorted by exponent"));
                }
            }
            last = Some(e);
            s.terms.insert(e, c);
        }
        Ok(s)
    }
}

fn exp24_from_checked(r: &Rational) -> Option<Exp24> {
    let scaled = r * BigRational::from(BigInt::from(DENOM));
    if !scaled.is_integer() {
        return None;
    }
    scaled.to_integer().to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q(trunc_units: Exp24) -> QSeries {
        QSeries::monomial(Rational::one(), DENOM, trunc_units)
    }

    #[test]
    fn multiply_difference_of_squares() {
        // (1+q)(1−q) @ order 3 → 1 − q²
        let t = 3 * DENOM;
        let a = QSeries::one(t).add(&q(t));
        let b = QSeries::one(t).sub(&q(t));
        let p = series_multiply(&a, &b).unwrap();
        let mut expect = QSeries::one(t);
        expect.add_term(2 * DENOM, &rat_int(-1));
        assert_eq!(p, expect);
    }

    #[test]
    fn multiply_eta_blocks() {
        // (q^{1/24}(1−q))·(q^{1/24}(1−q²)) = q^{1/12}(1−q−q²+q³)
        let t = 4 * DENOM;
        let mut a = QSeries::monomial(Rational::one(), 1, t);
        a.add_term(1 + DENOM, &rat_int(-1));
        let mut b = QSeries::monomial(Rational::one(), 1, t);
        b.add_term(1 + 2 * DENOM, &rat_int(-1));
        let p = series_multiply(&a, &b).unwrap();
        for (e, c) in [
            (2, 1i64),
            (2 + DENOM, -1),
            (2 + 2 * DENOM, -1),
            (2 + 3 * DENOM, 1),
        ] {
            assert_eq!(p.coeff(e), rat_int(c));
        }
    }

    #[test]
    fn multiply_requires_equal_truncation() {
        let a = QSeries::one(DENOM);
        let b = QSeries::one(2 * DENOM);
        assert!(matches!(
            series_multiply(&a, &b),
            Err(Error::MismatchedTruncation(_, _))
        ));
    }

    #[test]
    fn reciprocal_geometric() {
        // 1/(1−q) @ order 4 → 1+q+q²+q³
        let t = 4 * DENOM;
        let a = QSeries::one(t).sub(&q(t));
        let b = series_reciprocal(&a).unwrap();
        for k in 0..4 {
            assert_eq!(b.coeff(k * DENOM), rat_int(1));
        }
    }

    #[test]
    fn reciprocal_monomial() {
        // 1/q^{1/8} = q^{−1/8}
        let a = QSeries::monomial(Rational::one(), 3, 3 * DENOM);
        let b = series_reciprocal(&a).unwrap();
        assert_eq!(b.leading_exponent(), Some(-3));
        assert_eq!(b.coeff(-3), rat_int(1));
        assert_eq!(b.terms().count(), 1);
    }

    /// Independent oracle: partition counts by dynamic programming.
    fn partition_counts(up_to: usize) -> Vec<i64> {
        let mut p = vec![0i64; up_to + 1];
        p[0] = 1;
        for part in 1..=up_to {
            for n in part..=up_to {
                p[n] += p[n - part];
            }
        }
        p
    }

    #[test]
    fn reciprocal_eta_is_partition_generating_function() {
        // 1/η(q) = q^{−1/24} Σ p(n) qⁿ; frozen expected values p = 1,1,2
        // cross-checked against the DP oracle.
        let t = 3 * DENOM;
        let b = series_reciprocal(&eta(t)).unwrap();
        let oracle = partition_counts(2);
        assert_eq!(&oracle[..3], &[1, 1, 2]);
        for (n, expected) in oracle.iter().enumerate().take(3) {
            assert_eq!(b.coeff(-1 + (n as i64) * DENOM), rat_int(*expected));
        }
    }

    #[test]
    fn eta_times_reciprocal_is_one_to_order_20() {
        let t = 20 * DENOM;
        let e = eta(t);
        let r = series_reciprocal(&e).unwrap();
        let p = e.mul(&r);
        assert_eq!(p.coeff(0), rat_int(1));
        assert_eq!(p.terms().count(), 1);
    }

    fn assert_eq_common(a: &QSeries, b: &QSeries) {
        let t = a.truncation().min(b.truncation());
        assert_eq!(a.truncate_to(t), b.truncate_to(t));
    }

    #[test]
    fn theta_eta_identities() {
        // θ₂ = 2η(q²)²/η(q) and θ₃ = η(q)⁵ / (η(q^{1/2})² η(q²)²), to order 10.
        let t = 10 * DENOM;
        let th2 = theta2(t);
        let rhs2 = eta_q2(t).pow(2).scale(&rat_int(2)).mul(&series_reciprocal(&eta(t)).unwrap());
        assert_eq_common(&th2, &rhs2);

        let th3 = theta3(t);
        let denom = eta_half_squared(t).mul(&eta_q2(t).pow(2));
        let rhs3 = eta(t).pow(5).mul(&series_reciprocal(&denom).unwrap());
        assert_eq_common(&th3, &rhs3);
    }

    #[test]
    fn e2_prefix() {
        let s = e2(5 * DENOM);
        assert_eq!(s.coeff(0), rat_int(1));
        assert_eq!(s.coeff(DENOM), rat_int(-24));
        assert_eq!(s.coeff(2 * DENOM), rat_int(-72));
        assert_eq!(s.coeff(3 * DENOM), rat_int(-96));
        assert_eq!(s.coeff(4 * DENOM), rat_int(-168));
    }

    #[test]
    fn json_round_trip() {
        let t = 3 * DENOM;
        let mut s = QSeries::monomial(rat(3, 8), 3, t);
        s.add_term(DENOM + 3, &rat_int(-4));
        let j = s.to_json();
        let back = QSeries::from_json(&j).unwrap();
        assert_eq!(s, back);
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            r#"{"terms":[["1/8","3/8"],["9/8","-4/1"]],"truncation":"3/1"}"#
        );
    }

    #[test]
    fn json_rejects_bad_input() {
        for bad in [
            r#"{"truncation":"1/5","terms":[]}"#,
            r#"{"truncation":"2/1","terms":[["1/16","1/1"]]}"#,
            r#"{"truncation":"2/1","terms":[["1/2","0/1"]]}"#,
            r#"{"truncation":"2/1","terms":[["1/2","1/1"],["1/2","1/1"]]}"#,
            r#"{"truncation":"2/1","terms":[["5/2","1/1"]]}"#,
        ] {
            let v: serde_json::Value = serde_json::from_str(bad).unwrap();
            assert!(QSeries::from_json(&v).is_err(), "accepted: {}", bad);
        }
    }
}
