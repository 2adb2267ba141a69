//! The supercommutative jet-symbol algebra: rational functions in mode
//! variables a_{(−n)} with canonical monomial order, Koszul signs,
//! superderivatives, the translation operator ∂ and the
//! (twt, wt, charge, parity) gradings.
//!
//! Odd variables appear with exponent ≤ 1 and every monomial is kept sorted
//! by (generator id, mode), so equality is a syntactic check. Denominators
//! are products of powers of the localizers declared by the underlying
//! [`FreeFieldSystem`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::scalar::{Half, Rational, ScalarPoly};
use crate::system::{FreeFieldSystem, GenId};
use crate::{Error, Result};

/// A creation-type mode variable a_{(−mode)}, mode ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeVar {
    pub gen: GenId,
    pub mode: u16,
}

impl ModeVar {
    pub fn new(gen: GenId, mode: u16) -> ModeVar {
        assert!(mode >= 1, "only creation modes appear in symbols");
        ModeVar { gen, mode }
    }

    pub fn is_odd(self) -> bool {
        self.gen.kind.is_odd()
    }

    /// Conformal weight: generator weight plus mode − 1.
    pub fn weight(self) -> Half {
        self.gen.kind.weight() + Half::from_int(self.mode as i64 - 1)
    }
}

impl fmt::Display for ModeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gen.kind.is_matrix() {
            write!(
                f,
                "{}_{{{}{}(-{})}}",
                self.gen.kind.name(),
                self.gen.i,
                self.gen.j,
                self.mode
            )
        } else {
            write!(
                f,
                "{}_{{{}(-{})}}",
                self.gen.kind.name(),
                self.gen.i,
                self.mode
            )
        }
    }
}

/// A sorted supermonomial: (variable, exponent) with odd exponents ≤ 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    vars: Vec<(ModeVar, u32)>,
}

impl Monomial {
    pub fn unit() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: ModeVar) -> Monomial {
        Monomial { vars: vec![(v, 1)] }
    }

    pub fn is_unit(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[(ModeVar, u32)] {
        &self.vars
    }

    pub fn degree_of(&self, v: ModeVar) -> u32 {
        self.vars
            .iter()
            .find(|(x, _)| *x == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.vars.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn is_odd(&self) -> bool {
        self.vars.iter().filter(|(v, _)| v.is_odd()).count() % 2 == 1
    }

    /// Supercommutative product. Returns `None` when an odd variable squares
    /// to zero; otherwise the Koszul sign (true = negative) and the merged
    /// monomial.
    pub fn mul(&self, other: &Monomial) -> Option<(bool, Monomial)> {
        let mut out = Vec::with_capacity(self.vars.len() + other.vars.len());
        let mut sign = false;
        // Number of odd variables remaining in self from position k on.
        let mut odd_suffix: Vec<u32> = vec![0; self.vars.len() + 1];
        for (k, (v, _)) in self.vars.iter().enumerate().rev() {
            odd_suffix[k] = odd_suffix[k + 1] + if v.is_odd() { 1 } else { 0 };
        }
        let (mut ia, mut ib) = (0, 0);
        while ia < self.vars.len() || ib < other.vars.len() {
            if ib == other.vars.len() {
                out.push(self.vars[ia]);
                ia += 1;
            } else if ia == self.vars.len() {
                out.push(other.vars[ib]);
                ib += 1;
            } else {
                let (va, ea) = self.vars[ia];
                let (vb, eb) = other.vars[ib];
                match va.cmp(&vb) {
                    std::cmp::Ordering::Less => {
                        out.push((va, ea));
                        ia += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        // vb moves left past the remaining vars of self.
                        if vb.is_odd() && odd_suffix[ia] % 2 == 1 {
                            sign = !sign;
                        }
                        out.push((vb, eb));
                        ib += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        if va.is_odd() {
                            return None;
                        }
                        out.push((va, ea + eb));
                        ia += 1;
                        ib += 1;
                    }
                }
            }
        }
        Some((sign, Monomial { vars: out }))
    }

    /// Left superderivative ∂_L/∂v: `None` if v is absent, otherwise
    /// (sign, multiplicity, reduced monomial).
    pub fn superderive_left(&self, v: ModeVar) -> Option<(bool, u32, Monomial)> {
        let pos = self.vars.iter().position(|(x, _)| *x == v)?;
        let (_, e) = self.vars[pos];
        let mut out = self.vars.clone();
        if e > 1 {
            out[pos].1 = e - 1;
        } else {
            out.remove(pos);
        }
        let sign = if v.is_odd() {
            self.vars[..pos].iter().filter(|(x, _)| x.is_odd()).count() % 2 == 1
        } else {
            false
        };
        Some((sign, e, Monomial { vars: out }))
    }

    /// Split into (even part, odd part); no sign is introduced because the
    /// even variables commute with everything.
    pub fn split_even_odd(&self) -> (Monomial, Monomial) {
        let (mut even, mut odd) = (Vec::new(), Vec::new());
        for &(v, e) in &self.vars {
            if v.is_odd() {
                odd.push((v, e));
            } else {
                even.push((v, e));
            }
        }
        (Monomial { vars: even }, Monomial { vars: odd })
    }

    /// Graded-lexicographic comparison — a genuine monomial order, used by
    /// the exact division routine (the derived `Ord` is only a container
    /// order and is not compatible with multiplication).
    pub fn cmp_deglex(&self, other: &Monomial) -> std::cmp::Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        let (mut ia, mut ib) = (0, 0);
        loop {
            match (self.vars.get(ia), other.vars.get(ib)) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    // More weight on smaller variables compares larger.
                    std::cmp::Ordering::Less => return std::cmp::Ordering::Greater,
                    std::cmp::Ordering::Greater => return std::cmp::Ordering::Less,
                    std::cmp::Ordering::Equal => match ea.cmp(&eb) {
                        std::cmp::Ordering::Equal => {
                            ia += 1;
                            ib += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }

    /// Does `other` divide `self` variable-wise?
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        let mut ia = 0;
        for &(v, e) in &other.vars {
            loop {
                match self.vars.get(ia) {
                    None => return false,
                    Some(&(va, ea)) => {
                        if va == v {
                            if ea < e {
                                return false;
                            }
                            ia += 1;
                            break;
                        } else if va < v {
                            ia += 1;
                        } else {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Quotient self / other (assumes divisibility; even context, no signs).
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let mut ib = 0;
        for &(v, e) in &self.vars {
            let mut rem = e;
            if let Some(&(vb, eb)) = other.vars.get(ib) {
                if vb == v {
                    rem = e - eb;
                    ib += 1;
                }
            }
            if rem > 0 {
                out.push((v, rem));
            }
        }
        Monomial { vars: out }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.vars {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", v)?;
            if *e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}

/// Torus weight, conformal weight, ghost charge and parity of a homogeneous
/// element. Additive under multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradingVector {
    pub twt: Half,
    pub wt: Half,
    pub charge: i64,
    pub odd: bool,
}

impl GradingVector {
    pub const ZERO: GradingVector = GradingVector {
        twt: Half(0),
        wt: Half(0),
        charge: 0,
        odd: false,
    };

    pub fn add(self, other: GradingVector) -> GradingVector {
        GradingVector {
            twt: self.twt + other.twt,
            wt: self.wt + other.wt,
            charge: self.charge + other.charge,
            odd: self.odd ^ other.odd,
        }
    }

    pub fn sub(self, other: GradingVector) -> GradingVector {
        GradingVector {
            twt: self.twt - other.twt,
            wt: self.wt - other.wt,
            charge: self.charge - other.charge,
            odd: self.odd ^ other.odd,
        }
    }

    pub fn scale(self, k: i64) -> GradingVector {
        GradingVector {
            twt: Half(self.twt.0 * k),
            wt: Half(self.wt.0 * k),
            charge: self.charge * k,
            odd: self.odd && k % 2 != 0,
        }
    }
}

impl fmt::Display for GradingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(twt {}, wt {}, charge {}, {})",
            self.twt,
            self.wt,
            self.charge,
            if self.odd { "odd" } else { "even" }
        )
    }
}

fn monomial_grading(m: &Monomial) -> GradingVector {
    let mut g = GradingVector::ZERO;
    for &(v, e) in m.vars() {
        let k = e as i64;
        g.twt = g.twt + Half(v.gen.kind.torus_weight().0 * k);
        g.wt = g.wt + Half(v.weight().0 * k);
        g.charge += v.gen.kind.charge() * k;
        if v.is_odd() && e % 2 == 1 {
            g.odd = !g.odd;
        }
    }
    g
}

/// A supercommutative polynomial in mode variables over the ℏ-scalar ring.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, ScalarPoly>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::scalar(ScalarPoly::one())
    }

    pub fn scalar(c: ScalarPoly) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::unit(), &c);
        p
    }

    pub fn var(v: ModeVar) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v), &ScalarPoly::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ScalarPoly)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: &ScalarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &ScalarPoly) -> Poly {
        let mut out = Poly::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), &(x * c));
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, &(if neg { -&c } else { c }));
                }
            }
        }
        out
    }

    /// Left superderivative ∂_L/∂v, term by term.
    pub fn superderive_left(&self, v: ModeVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((neg, mult, m2)) = m.superderive_left(v) {
                let mut c2 = c.scale(&Rational::from_integer((mult as i64).into()));
                if neg {
                    c2 = -&c2;
                }
                out.add_term(m2, &c2);
            }
        }
        out
    }

    /// The translation operator ∂, an even derivation with
    /// ∂a_{(−n)} = n·a_{(−n−1)}. In-place mode bumps never cross other
    /// variables, so no Koszul signs appear.
    pub fn translate(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (pos, &(v, e)) in m.vars().iter().enumerate() {
                let bumped = ModeVar::new(v.gen, v.mode + 1);
                let mut vars = m.vars().to_vec();
                if e > 1 {
                    vars[pos].1 = e - 1;
                    insert_sorted(&mut vars, bumped);
                } else {
                    vars[pos].0 = bumped;
                    if pos + 1 < vars.len() && vars[pos + 1].0 == bumped {
                        if bumped.is_odd() {
                            continue; // odd square
                        }
                        vars[pos].1 += vars[pos + 1].1;
                        vars.remove(pos + 1);
                    }
                }
                if vars.iter().any(|(v, e)| v.is_odd() && *e > 1) {
                    continue;
                }
                let mult = (e as i64) * (v.mode as i64);
                out.add_term(
                    Monomial { vars },
                    &c.scale(&Rational::from_integer(mult.into())),
                );
            }
        }
        out
    }

    /// Grading of a homogeneous polynomial; `Err` carries two differing
    /// gradings, `Ok(None)` means zero.
    pub fn grading_checked(&self) -> std::result::Result<Option<GradingVector>, (String, String)> {
        let mut seen: Option<GradingVector> = None;
        for (m, c) in &self.terms {
            let base = monomial_grading(m);
            for (e, _) in c.terms() {
                let g = GradingVector {
                    twt: base.twt + e,
                    ..base
                };
                match seen {
                    None => seen = Some(g),
                    Some(prev) if prev == g => {}
                    Some(prev) => return Err((prev.to_string(), g.to_string())),
                }
            }
        }
        Ok(seen)
    }

    pub fn grading(&self) -> Option<GradingVector> {
        self.grading_checked().ok().flatten()
    }

    pub fn mul_hbar_pow(&self, e: Half) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_hbar_pow(e)))
                .collect(),
        }
    }

    pub fn try_div_hbar_pow(&self, e: Half) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.clone(), c.try_div_hbar_pow(e)?);
        }
        Some(Poly { terms })
    }

    pub fn truncate_hbar(&self, order: Half) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.truncate_hbar(order));
        }
        out
    }

    /// The ℏ-coefficient slice at exponent `e` (a pure symbol polynomial).
    pub fn hbar_slice(&self, e: Half) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (x, r) in c.terms() {
                if x == e {
                    out.add_term(m.clone(), &ScalarPoly::constant(r.clone()));
                }
            }
        }
        out
    }

    pub fn hbar_exponents(&self) -> std::collections::BTreeSet<Half> {
        let mut set = std::collections::BTreeSet::new();
        for (_, c) in &self.terms {
            for (e, _) in c.terms() {
                set.insert(e);
            }
        }
        set
    }

    /// Exact division by an even polynomial with ℏ-free coefficients.
    /// Returns `None` when the division is not exact.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (dm, dc) = divisor
            .terms
            .iter()
            .max_by(|(a, _), (b, _)| a.cmp_deglex(b))?;
        let dc = dc.symbol_part()?;
        // Split by odd sector: the even coefficients form a domain, so the
        // single-divisor division algorithm decides exact divisibility.
        let mut sectors: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (even, odd) = m.split_even_odd();
            sectors
                .entry(odd)
                .or_insert_with(Poly::zero)
                .add_term(even, c);
        }
        let mut out = Poly::zero();
        for (odd, mut rem) in sectors {
            let mut quot = Poly::zero();
            while !rem.is_zero() {
                let (lm, lc) = rem
                    .terms
                    .iter()
                    .max_by(|(a, _), (b, _)| a.cmp_deglex(b))
                    .map(|(m, c)| (m.clone(), c.clone()))
                    .unwrap();
                if !lm.divisible_by(dm) {
                    return None;
                }
                let qm = lm.quotient(dm);
                let qc = lc.scale(&(Rational::one() / &dc));
                quot.add_term(qm.clone(), &qc);
                let mut piece = Poly::zero();
                piece.add_term(qm, &qc);
                rem = rem.sub(&piece.mul(divisor));
            }
            for (em, ec) in quot.terms {
                if let Some((neg, m)) = em.mul(&odd) {
                    out.add_term(m, &(if neg { -&ec } else { ec }));
                }
            }
        }
        Some(out)
    }
}

fn insert_sorted(vars: &mut Vec<(ModeVar, u32)>, v: ModeVar) {
    match vars.binary_search_by(|(x, _)| x.cmp(&v)) {
        Ok(pos) => vars[pos].1 += 1,
        Err(pos) => vars.insert(pos, (v, 1)),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            let simple = !cs.contains(' ');
            if m.is_unit() {
                write!(f, "{}", cs)?;
            } else if c.is_one() {
                write!(f, "{}", m)?;
            } else if simple {
                write!(f, "{}*{}", cs, m)?;
            } else {
                write!(f, "({})*{}", cs, m)?;
            }
        }
        Ok(())
    }
}

/// A localized symbol: numerator polynomial over a product of declared
/// localizer powers, tied to its free-field system.
#[derive(Clone)]
pub struct SymbolElement {
    sys: Arc<FreeFieldSystem>,
    num: Poly,
    den: BTreeMap<u16, u32>,
}

impl fmt::Debug for SymbolElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl SymbolElement {
    pub fn new(sys: Arc<FreeFieldSystem>, num: Poly) -> SymbolElement {
        SymbolElement {
            sys,
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn zero(sys: Arc<FreeFieldSystem>) -> SymbolElement {
        SymbolElement::new(sys, Poly::zero())
    }

    pub fn one(sys: Arc<FreeFieldSystem>) -> SymbolElement {
        SymbolElement::new(sys, Poly::one())
    }

    pub fn scalar(sys: Arc<FreeFieldSystem>, c: ScalarPoly) -> SymbolElement {
        SymbolElement::new(sys, Poly::scalar(c))
    }

    pub fn var(sys: Arc<FreeFieldSystem>, v: ModeVar) -> SymbolElement {
        SymbolElement::new(sys, Poly::var(v))
    }

    pub fn from_parts(
        sys: Arc<FreeFieldSystem>,
        num: Poly,
        den: BTreeMap<u16, u32>,
    ) -> SymbolElement {
        let mut s = SymbolElement { sys, num, den };
        s.normalize();
        s
    }

    /// Construct without attempting localizer cancellation. Used on hot
    /// paths where the fraction is already in lowest terms or where
    /// cancellation is deferred.
    pub fn from_raw_parts(
        sys: Arc<FreeFieldSystem>,
        num: Poly,
        den: BTreeMap<u16, u32>,
    ) -> SymbolElement {
        if num.is_zero() {
            return SymbolElement::zero(sys);
        }
        SymbolElement { sys, num, den }
    }

    pub fn system(&self) -> &Arc<FreeFieldSystem> {
        &self.sys
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<u16, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn same_system(&self, other: &SymbolElement) -> bool {
        self.sys.id() == other.sys.id()
    }

    fn assert_same_system(&self, other: &SymbolElement) {
        assert!(
            self.same_system(other),
            "symbol elements from different free-field systems"
        );
    }

    /// Cancel localizer factors dividing the numerator; drop zero powers.
    pub fn normalize(&mut self) {
        self.den.retain(|_, k| *k > 0);
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let idxs: Vec<u16> = self.den.keys().copied().collect();
        for idx in idxs {
            while self.den.get(&idx).copied().unwrap_or(0) > 0 {
                let loc = &self.sys.localizer(idx).poly;
                match self.num.exact_div(loc) {
                    Some(q) => {
                        self.num = q;
                        let k = self.den.get_mut(&idx).unwrap();
                        *k -= 1;
                        if *k == 0 {
                            self.den.remove(&idx);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    /// Numerator rescaled to the common denominator `target` (which must
    /// dominate the own denominator).
    fn num_at_common_den(&self, target: &BTreeMap<u16, u32>) -> Poly {
        let mut out = self.num.clone();
        for (idx, k) in target {
            let own = self.den.get(idx).copied().unwrap_or(0);
            assert!(*k >= own);
            for _ in own..*k {
                out = out.mul(&self.sys.localizer(*idx).poly);
            }
        }
        out
    }

    fn den_lcm(&self, other: &SymbolElement) -> BTreeMap<u16, u32> {
        let mut lcm = self.den.clone();
        for (idx, k) in &other.den {
            let e = lcm.entry(*idx).or_insert(0);
            *e = (*e).max(*k);
        }
        lcm
    }

    pub fn add(&self, other: &SymbolElement) -> SymbolElement {
        self.assert_same_system(other);
        let lcm = self.den_lcm(other);
        let num = self
            .num_at_common_den(&lcm)
            .add(&other.num_at_common_den(&lcm));
        SymbolElement::from_parts(self.sys.clone(), num, lcm)
    }

    pub fn sub(&self, other: &SymbolElement) -> SymbolElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SymbolElement {
        SymbolElement {
            sys: self.sys.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &SymbolElement) -> SymbolElement {
        self.assert_same_system(other);
        let mut den = self.den.clone();
        for (idx, k) in &other.den {
            *den.entry(*idx).or_insert(0) += *k;
        }
        SymbolElement::from_parts(self.sys.clone(), self.num.mul(&other.num), den)
    }

    pub fn scale(&self, c: &ScalarPoly) -> SymbolElement {
        let num = self.num.scale(c);
        let den = if num.is_zero() {
            BTreeMap::new()
        } else {
            self.den.clone()
        };
        SymbolElement {
            sys: self.sys.clone(),
            num,
            den,
        }
    }

    pub fn scale_rat(&self, c: &Rational) -> SymbolElement {
        self.scale(&ScalarPoly::constant(c.clone()))
    }

    pub fn mul_hbar_pow(&self, e: Half) -> SymbolElement {
        SymbolElement {
            sys: self.sys.clone(),
            num: self.num.mul_hbar_pow(e),
            den: self.den.clone(),
        }
    }

    pub fn try_div_hbar_pow(&self, e: Half) -> Option<SymbolElement> {
        Some(SymbolElement {
            sys: self.sys.clone(),
            num: self.num.try_div_hbar_pow(e)?,
            den: self.den.clone(),
        })
    }

    pub fn truncate_hbar(&self, order: Half) -> SymbolElement {
        let mut s = SymbolElement {
            sys: self.sys.clone(),
            num: self.num.truncate_hbar(order),
            den: self.den.clone(),
        };
        if s.num.is_zero() {
            s.den.clear();
        }
        s
    }

    /// The ℏ⁰ shadow σ₀.
    pub fn symbol_part(&self) -> SymbolElement {
        self.hbar_slice(Half::ZERO)
    }

    /// The coefficient of ℏ^e as a symbol (denominator retained).
    pub fn hbar_slice(&self, e: Half) -> SymbolElement {
        let mut s = SymbolElement {
            sys: self.sys.clone(),
            num: self.num.hbar_slice(e),
            den: self.den.clone(),
        };
        if s.num.is_zero() {
            s.den.clear();
        }
        s
    }

    pub fn hbar_exponents(&self) -> std::collections::BTreeSet<Half> {
        self.num.hbar_exponents()
    }

    /// Left superderivative; extends to denominators by the quotient rule
    /// (denominators are always even).
    pub fn superderive(&self, v: ModeVar) -> SymbolElement {
        if self.den.is_empty() {
            return SymbolElement::new(self.sys.clone(), self.num.superderive_left(v));
        }
        if v.is_odd() {
            let mut s = SymbolElement {
                sys: self.sys.clone(),
                num: self.num.superderive_left(v),
                den: self.den.clone(),
            };
            if s.num.is_zero() {
                s.den.clear();
            }
            return s;
        }
        self.quotient_rule(|p| p.superderive_left(v))
    }

    /// ∂, with the quotient rule on denominators.
    pub fn translate(&self) -> SymbolElement {
        if self.den.is_empty() {
            return SymbolElement::new(self.sys.clone(), self.num.translate());
        }
        self.quotient_rule(|p| p.translate())
    }

    pub fn translate_n(&self, n: u32) -> SymbolElement {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.translate();
        }
        out
    }

    fn quotient_rule(&self, d: impl Fn(&Poly) -> Poly) -> SymbolElement {
        // f = num / Π loc_i^{k_i}
        // d(f) = [d(num)·Π loc_i − num·Σ_i k_i·d(loc_i)·Π_{j≠i} loc_j]
        //        / Π loc_i^{k_i+1}
        let idxs: Vec<u16> = self.den.keys().copied().collect();
        let mut all = Poly::one();
        for idx in &idxs {
            all = all.mul(&self.sys.localizer(*idx).poly);
        }
        let mut num = d(&self.num).mul(&all);
        for idx in &idxs {
            let k = self.den[idx] as i64;
            let mut others =
                Poly::scalar(ScalarPoly::constant(Rational::from_integer((-k).into())));
            for jdx in &idxs {
                if jdx != idx {
                    others = others.mul(&self.sys.localizer(*jdx).poly);
                }
            }
            num = num.add(
                &self
                    .num
                    .mul(&d(&self.sys.localizer(*idx).poly))
                    .mul(&others),
            );
        }
        let mut den = self.den.clone();
        for idx in &idxs {
            *den.get_mut(idx).unwrap() += 1;
        }
        SymbolElement::from_parts(self.sys.clone(), num, den)
    }

    /// Grading of a homogeneous element.
    pub fn grading(&self) -> Result<GradingVector> {
        let g = self
            .num
            .grading_checked()
            .map_err(|(a, b)| Error::Inhomogeneous(a, b))?;
        let mut g = match g {
            Some(g) => g,
            None => return Ok(GradingVector::ZERO),
        };
        for (idx, k) in &self.den {
            g = g.sub(self.sys.localizer(*idx).grading.scale(*k as i64));
        }
        Ok(g)
    }

    pub fn parity(&self) -> Result<bool> {
        Ok(self.grading()?.odd)
    }

    /// Multiplicative inverse of an ℏ-free symbol whose numerator is, up to a
    /// rational constant, a product of declared localizers.
    pub fn invert_symbol(&self) -> Result<SymbolElement> {
        let fail = || Error::NonInvertibleSymbol(self.to_string());
        if self.is_zero() {
            return Err(fail());
        }
        let mut rem = self.num.clone();
        let mut num_den: BTreeMap<u16, u32> = BTreeMap::new();
        'outer: loop {
            if rem.num_terms() == 1 {
                if let Some((m, c)) = rem.terms().next() {
                    if m.is_unit() {
                        let c = c.symbol_part().ok_or_else(fail)?;
                        if c.is_zero() {
                            return Err(fail());
                        }
                        let mut num = Poly::scalar(ScalarPoly::constant(Rational::one() / c));
                        for (idx, k) in &self.den {
                            for _ in 0..*k {
                                num = num.mul(&self.sys.localizer(*idx).poly);
                            }
                        }
                        return Ok(SymbolElement::from_parts(self.sys.clone(), num, num_den));
                    }
                }
            }
            for idx in 0..self.sys.localizers().len() as u16 {
                if let Some(q) = rem.exact_div(&self.sys.localizer(idx).poly) {
                    rem = q;
                    *num_den.entry(idx).or_insert(0) += 1;
                    continue 'outer;
                }
            }
            return Err(fail());
        }
    }
}

impl PartialEq for SymbolElement {
    fn eq(&self, other: &SymbolElement) -> bool {
        if !self.same_system(other) {
            return false;
        }
        let lcm = self.den_lcm(other);
        self.num_at_common_den(&lcm) == other.num_at_common_den(&lcm)
    }
}

impl Eq for SymbolElement {}

impl fmt::Display for SymbolElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / (", self.num)?;
        let mut first = true;
        for (idx, k) in &self.den {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", self.sys.localizer(*idx).name)?;
            if *k > 1 {
                write!(f, "^{}", k)?;
            }
        }
        write!(f, ")")
    }
}

/// Supercommutative product with the spec-facing system check.
pub fn multiply(f: &SymbolElement, g: &SymbolElement) -> Result<SymbolElement> {
    if !f.same_system(g) {
        return Err(Error::SystemMismatch);
    }
    Ok(f.mul(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use crate::system::{brst_builder, GenKind};

    fn sys2() -> Arc<FreeFieldSystem> {
        brst_builder(2).build()
    }

    fn v(
        sys: &Arc<FreeFieldSystem>,
        kind: GenKind,
        i: usize,
        j: usize,
        mode: u16,
    ) -> SymbolElement {
        let gen = if kind.is_matrix() {
            GenId::matrix(kind, i, j)
        } else {
            GenId::vector(kind, i)
        };
        SymbolElement::var(sys.clone(), ModeVar::new(gen, mode))
    }

    #[test]
    fn odd_anticommute_and_square() {
        let s = sys2();
        let psi = v(&s, GenKind::Psi, 1, 0, 1);
        let phi = v(&s, GenKind::Phi, 1, 0, 1);
        let a = psi.mul(&phi);
        let b = phi.mul(&psi);
        assert_eq!(a, b.neg());
        assert!(psi.mul(&psi).is_zero());
    }

    #[test]
    fn left_superderivative_sign() {
        // ∂(ψ₁φ₁)/∂φ₁ = −ψ₁ in the left convention.
        let s = sys2();
        let psi = v(&s, GenKind::Psi, 1, 0, 1);
        let phi_var = ModeVar::new(GenId::vector(GenKind::Phi, 1), 1);
        let prod = psi.mul(&SymbolElement::var(s.clone(), phi_var));
        let d = prod.superderive(phi_var);
        assert_eq!(d, psi.neg());
    }

    #[test]
    fn even_derivative_power_rule() {
        let s = sys2();
        let xv = ModeVar::new(GenId::matrix(GenKind::X, 1, 1), 1);
        let x = SymbolElement::var(s.clone(), xv);
        let d = x.mul(&x).superderive(xv);
        assert_eq!(d, x.scale_rat(&rat_int(2)));
    }

    #[test]
    fn translate_modes() {
        let s = sys2();
        let x1 = v(&s, GenKind::X, 1, 1, 1);
        let x2 = v(&s, GenKind::X, 1, 1, 2);
        let x3 = v(&s, GenKind::X, 1, 1, 3);
        assert_eq!(x1.translate(), x2);
        assert_eq!(x2.translate(), x3.scale_rat(&rat_int(2)));
        let y = v(&s, GenKind::Y, 2, 1, 1);
        let f = x1.mul(&y);
        let lhs = f.translate();
        let rhs = x1.translate().mul(&y).add(&x1.mul(&y.translate()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn translate_odd_square_drops() {
        let s = sys2();
        let psi1 = v(&s, GenKind::Psi, 1, 0, 1);
        let psi2 = v(&s, GenKind::Psi, 1, 0, 2);
        // ∂(ψ₁(−1)ψ₁(−2)) = 2ψ₁(−1)ψ₁(−3); the ψ₁(−2)² term drops.
        let f = psi1.mul(&psi2);
        let expect = psi1
            .mul(&v(&s, GenKind::Psi, 1, 0, 3))
            .scale_rat(&rat_int(2));
        assert_eq!(f.translate(), expect);
    }

    #[test]
    fn grading_examples() {
        let s = sys2();
        let x = v(&s, GenKind::X, 1, 1, 1);
        let g = x.mul_hbar_pow(Half::ONE).grading().unwrap();
        assert_eq!(
            g,
            GradingVector {
                twt: Half(3),
                wt: Half(1),
                charge: 0,
                odd: false
            }
        );
        let gp = v(&s, GenKind::GhostPsi, 1, 1, 2).grading().unwrap();
        assert_eq!(
            gp,
            GradingVector {
                twt: Half(0),
                wt: Half(2),
                charge: 1,
                odd: true
            }
        );
    }

    #[test]
    fn inhomogeneous_reports_both() {
        let s = sys2();
        let x = v(&s, GenKind::X, 1, 1, 1);
        let f = x.add(&x.mul(&x));
        assert!(matches!(f.grading(), Err(Error::Inhomogeneous(_, _))));
    }

    #[test]
    fn exact_division_and_localizers() {
        // System with a single-variable localizer x_{11(-1)}.
        let mut b = brst_builder(1);
        let xv = ModeVar::new(GenId::matrix(GenKind::X, 1, 1), 1);
        let loc = b.localizer("x11", Poly::var(xv));
        let s = b.build();
        let x = SymbolElement::var(s.clone(), xv);
        let mut den = BTreeMap::new();
        den.insert(loc, 1);
        let inv = SymbolElement::from_parts(s.clone(), Poly::one(), den);
        // x·(1/x)·x = x
        let prod = x.mul(&inv).mul(&x);
        assert_eq!(prod, x);
        // quotient rule: ∂(1/x)/∂x = −1/x²
        let d = inv.superderive(xv);
        let mut den2 = BTreeMap::new();
        den2.insert(loc, 2);
        let expect = SymbolElement::from_parts(s.clone(), Poly::one(), den2).neg();
        assert_eq!(d, expect);
        // invert_symbol round trips
        let inv2 = x.invert_symbol().unwrap();
        assert_eq!(inv2, inv);
        assert_eq!(inv.invert_symbol().unwrap(), x);
    }

    #[test]
    fn multiply_checks_system() {
        let s1 = sys2();
        let s2 = sys2();
        let a = v(&s1, GenKind::X, 1, 1, 1);
        let b = SymbolElement::var(s2, ModeVar::new(GenId::matrix(GenKind::X, 1, 1), 1));
        assert!(matches!(multiply(&a, &b), Err(Error::SystemMismatch)));
    }

    #[test]
    fn supercommutativity_sample() {
        // fg = (−1)^{p(f)p(g)} gf over a sample of homogeneous elements.
        let s = sys2();
        let gens = [
            v(&s, GenKind::X, 1, 2, 1),
            v(&s, GenKind::Psi, 1, 0, 1),
            v(&s, GenKind::Phi, 2, 0, 1),
            v(&s, GenKind::GhostPsi, 2, 1, 3),
            v(&s, GenKind::Beta, 1, 0, 2),
        ];
        for f in &gens {
            for g in &gens {
                let fg = f.mul(g);
                let gf = g.mul(f);
                let sign = f.grading().unwrap().odd && g.grading().unwrap().odd;
                assert_eq!(fg, if sign { gf.neg() } else { gf });
            }
        }
    }

    #[test]
    fn canonical_form_idempotent() {
        let s = sys2();
        let f = v(&s, GenKind::Phi, 1, 0, 1)
            .mul(&v(&s, GenKind::Psi, 2, 0, 1))
            .mul(&v(&s, GenKind::X, 1, 1, 2))
            .add(&v(&s, GenKind::Beta, 2, 0, 1).mul(&v(&s, GenKind::Gamma, 1, 0, 1)));
        let mut g = f.clone();
        g.normalize();
        assert_eq!(f, g);
        assert_eq!(format!("{}", f), format!("{}", g));
    }
}
