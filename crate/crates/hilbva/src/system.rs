//! Free-field systems: generator tables, contraction tables and declared
//! localizers.
//!
//! A system lists finitely many generators (with parity, conformal weight,
//! torus weight and ghost charge determined by their kind), a table of
//! ordered contractions A(z)B(w) ∼ c·ℏ^s/(z−w)^p, and the even polynomials
//! that may appear in denominators of localized sections.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::scalar::{Half, Rational};
use crate::symbol::{GradingVector, Poly};

/// Generator kinds of the BRST free-field algebra. The declaration order
/// fixes the canonical monomial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    /// matrix boson x_{ij}
    X,
    /// matrix boson y_{ij} (dual to x via the trace pairing)
    Y,
    /// vector boson γ_i
    Gamma,
    /// dual vector boson β_i
    Beta,
    /// matter fermion ψ_i
    Psi,
    /// matter fermion φ_i (dual to ψ)
    Phi,
    /// ghost Ψ_{ij} (charge +1)
    GhostPsi,
    /// anti-ghost Φ_{ij} (charge −1)
    GhostPhi,
}

impl GenKind {
    pub fn is_odd(self) -> bool {
        matches!(
            self,
            GenKind::Psi | GenKind::Phi | GenKind::GhostPsi | GenKind::GhostPhi
        )
    }

    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            GenKind::X | GenKind::Y | GenKind::GhostPsi | GenKind::GhostPhi
        )
    }

    /// Conformal weight of the (−1)-mode generator.
    pub fn weight(self) -> Half {
        match self {
            GenKind::GhostPsi => Half::ZERO,
            GenKind::GhostPhi => Half::ONE,
            _ => Half(1),
        }
    }

    /// Torus weight (mode independent).
    pub fn torus_weight(self) -> Half {
        match self {
            GenKind::GhostPsi => Half::ZERO,
            GenKind::GhostPhi => Half::ONE,
            _ => Half(1),
        }
    }

    pub fn charge(self) -> i64 {
        match self {
            GenKind::GhostPsi => 1,
            GenKind::GhostPhi => -1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GenKind::X => "x",
            GenKind::Y => "y",
            GenKind::Gamma => "gamma",
            GenKind::Beta => "beta",
            GenKind::Psi => "psi",
            GenKind::Phi => "phi",
            GenKind::GhostPsi => "Psi",
            GenKind::GhostPhi => "Phi",
        }
    }
}

/// A generator id: kind plus 1-based indices (vector kinds use `j = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenId {
    pub kind: GenKind,
    pub i: u8,
    pub j: u8,
}

impl GenId {
    pub fn matrix(kind: GenKind, i: usize, j: usize) -> GenId {
        GenId {
            kind,
            i: i as u8,
            j: j as u8,
        }
    }

    pub fn vector(kind: GenKind, i: usize) -> GenId {
        GenId {
            kind,
            i: i as u8,
            j: 0,
        }
    }
}

impl fmt::Display for GenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_matrix() {
            write!(f, "{}_{{{}{}}}", self.kind.name(), self.i, self.j)
        } else {
            write!(f, "{}_{{{}}}", self.kind.name(), self.i)
        }
    }
}

/// An ordered contraction A(z)B(w) ∼ coeff·ℏ^hbar/(z−w)^pole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    pub pole: u32,
    pub coeff: Rational,
    pub hbar: Half,
}

pub struct Localizer {
    pub name: String,
    pub poly: Poly,
    pub grading: GradingVector,
}

/// Generator table, contraction table and localizing set.
pub struct FreeFieldSystem {
    id: u64,
    pub n: usize,
    gens: Vec<GenId>,
    contractions: std::collections::BTreeMap<(GenId, GenId), Contraction>,
    localizers: Vec<Localizer>,
}

static NEXT_SYSTEM_ID: AtomicU64 = AtomicU64::new(1);

impl FreeFieldSystem {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn generators(&self) -> &[GenId] {
        &self.gens
    }

    pub fn contraction(&self, a: GenId, b: GenId) -> Option<&Contraction> {
        self.contractions.get(&(a, b))
    }

    pub fn contractions(&self) -> impl Iterator<Item = (&(GenId, GenId), &Contraction)> {
        self.contractions.iter()
    }

    pub fn localizers(&self) -> &[Localizer] {
        &self.localizers
    }

    pub fn localizer(&self, idx: u16) -> &Localizer {
        &self.localizers[idx as usize]
    }
}

impl fmt::Debug for FreeFieldSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FreeFieldSystem(id={}, N={}, {} generators, {} contractions, {} localizers)",
            self.id,
            self.n,
            self.gens.len(),
            self.contractions.len(),
            self.localizers.len()
        )
    }
}

pub struct SystemBuilder {
    n: usize,
    gens: Vec<GenId>,
    contractions: std::collections::BTreeMap<(GenId, GenId), Contraction>,
    localizers: Vec<Localizer>,
}

impl SystemBuilder {
    pub fn new(n: usize) -> SystemBuilder {
        SystemBuilder {
            n,
            gens: Vec::new(),
            contractions: std::collections::BTreeMap::new(),
            localizers: Vec::new(),
        }
    }

    pub fn generator(&mut self, id: GenId) -> &mut Self {
        self.gens.push(id);
        self
    }

    /// Declare A(z)B(w) ∼ coeff·ℏ^hbar/(z−w) together with the skew-symmetric
    /// partner entry: B(z)A(w) ∼ −(−1)^{p(A)p(B)}·coeff·ℏ^hbar/(z−w).
    pub fn contraction_pair(
        &mut self,
        a: GenId,
        b: GenId,
        coeff: Rational,
        hbar: Half,
    ) -> &mut Self {
        let sign: Rational = if a.kind.is_odd() && b.kind.is_odd() {
            Rational::from_integer(1.into())
        } else {
            Rational::from_integer((-1).into())
        };
        let back = &coeff * sign;
        self.contractions.insert(
            (a, b),
            Contraction {
                pole: 1,
                coeff,
                hbar,
            },
        );
        self.contractions.insert(
            (b, a),
            Contraction {
                pole: 1,
                coeff: back,
                hbar,
            },
        );
        self
    }

    /// Declare an even, homogeneous localizer polynomial with ℏ-free
    /// coefficients. Returns its index for use in denominators.
    pub fn localizer(&mut self, name: &str, poly: Poly) -> u16 {
        let grading = poly
            .grading()
            .expect("localizer polynomial must be homogeneous");
        assert!(!grading.odd, "localizer must be even");
        assert!(
            poly.terms()
                .all(|(_, c)| c.terms().all(|(e, _)| e == Half::ZERO)),
            "localizer coefficients must be hbar-free"
        );
        self.localizers.push(Localizer {
            name: name.to_string(),
            poly,
            grading,
        });
        (self.localizers.len() - 1) as u16
    }

    pub fn build(self) -> Arc<FreeFieldSystem> {
        Arc::new(FreeFieldSystem {
            id: NEXT_SYSTEM_ID.fetch_add(1, Ordering::Relaxed),
            n: self.n,
            gens: self.gens,
            contractions: self.contractions,
            localizers: self.localizers,
        })
    }
}

/// The standard free-field system of the gl_N BRST complex: matter fields
/// x_{ij}, y_{ij}, γ_i, β_i, ψ_i, φ_i and ghosts Ψ_{ij}, Φ_{ij}, with the
/// contraction table
///
/// ```text
///   x_{ij}(z) y_{kl}(w)  ∼ −δ_{il}δ_{jk} ℏ/(z−w)     (trace pairing)
///   γ_i(z) β_j(w)        ∼ −δ_{ij} ℏ/(z−w)
///   ψ_i(z) φ_j(w)        ∼ +δ_{ij} ℏ/(z−w)
///   Ψ_{ij}(z) Φ_{kl}(w)  ∼ +δ_{ik}δ_{jl} ℏ/(z−w)
/// ```
pub fn brst_builder(n: usize) -> SystemBuilder {
    let mut b = SystemBuilder::new(n);
    let one = Rational::from_integer(1.into());
    for kind in [GenKind::X, GenKind::Y, GenKind::GhostPsi, GenKind::GhostPhi] {
        for i in 1..=n {
            for j in 1..=n {
                b.generator(GenId::matrix(kind, i, j));
            }
        }
    }
    for kind in [GenKind::Gamma, GenKind::Beta, GenKind::Psi, GenKind::Phi] {
        for i in 1..=n {
            b.generator(GenId::vector(kind, i));
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            b.contraction_pair(
                GenId::matrix(GenKind::X, i, j),
                GenId::matrix(GenKind::Y, j, i),
                -one.clone(),
                Half::ONE,
            );
            b.contraction_pair(
                GenId::matrix(GenKind::GhostPsi, i, j),
                GenId::matrix(GenKind::GhostPhi, i, j),
                one.clone(),
                Half::ONE,
            );
        }
        b.contraction_pair(
            GenId::vector(GenKind::Gamma, i),
            GenId::vector(GenKind::Beta, i),
            -one.clone(),
            Half::ONE,
        );
        b.contraction_pair(
            GenId::vector(GenKind::Psi, i),
            GenId::vector(GenKind::Phi, i),
            one.clone(),
            Half::ONE,
        );
    }
    b
}
