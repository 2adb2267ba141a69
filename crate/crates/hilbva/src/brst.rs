//! The BRST complex of the gl_N reduction: matter fields and ghosts, the
//! chiral comoment map, ghost currents, the charge Q, the differential
//! d = ℏ⁻¹Q₍₀₎ and its bigraded split, plus the nilpotency and relative
//! condition checks.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ope::{nth_product, ope};
use crate::report::{bool_check, eq_check, CheckStatus, RunReport};
use crate::scalar::{rat_int, Half, Rational, ScalarPoly};
use crate::symbol::{ModeVar, Poly, SymbolElement};
use crate::system::{brst_builder, FreeFieldSystem, GenId, GenKind};
use crate::{Error, Result};

/// Hard cap on N guarding combinatorial blowup; configuration, not
/// architecture.
pub const DEFAULT_N_CAP: usize = 4;

/// The free-field system of the gl_N BRST complex for a fixed N, together
/// with the chart localizers when requested.
pub struct BrstContext {
    pub n: usize,
    sys: Arc<FreeFieldSystem>,
    /// Localizer index of det B_{(N)} = det(γ, Xγ, …, X^{N−1}γ), if declared.
    pub loc_det_b: Option<u16>,
    /// Localizer index of det B_{(1²)} = det(γ, Yγ) (N = 2 only).
    pub loc_det_b_dual: Option<u16>,
    charge: OnceLock<SymbolElement>,
}

impl BrstContext {
    pub fn new(n: usize) -> Result<BrstContext> {
        BrstContext::with_cap(n, DEFAULT_N_CAP, false)
    }

    /// A context whose system also declares the chart localizers det B_{(N)}
    /// (and det B_{(1²)} for N = 2).
    pub fn with_charts(n: usize) -> Result<BrstContext> {
        BrstContext::with_cap(n, DEFAULT_N_CAP, true)
    }

    pub fn with_cap(n: usize, cap: usize, charts: bool) -> Result<BrstContext> {
        if n < 1 || n > cap {
            return Err(Error::UnsupportedN(
                n,
                format!("N must satisfy 1 ≤ N ≤ cap ({})", cap),
            ));
        }
        let mut b = brst_builder(n);
        let mut loc_det_b = None;
        let mut loc_det_b_dual = None;
        if charts {
            loc_det_b = Some(b.localizer("detB", det_b_poly(n, GenKind::X)));
            if n == 2 {
                loc_det_b_dual = Some(b.localizer("detBdual", det_b_poly(n, GenKind::Y)));
            }
        }
        Ok(BrstContext {
            n,
            sys: b.build(),
            loc_det_b,
            loc_det_b_dual,
            charge: OnceLock::new(),
        })
    }

    pub fn system(&self) -> &Arc<FreeFieldSystem> {
        &self.sys
    }

    pub fn zero(&self) -> SymbolElement {
        SymbolElement::zero(self.sys.clone())
    }

    pub fn one(&self) -> SymbolElement {
        SymbolElement::one(self.sys.clone())
    }

    pub fn scalar(&self, c: ScalarPoly) -> SymbolElement {
        SymbolElement::scalar(self.sys.clone(), c)
    }

    pub fn hbar(&self, e: Half) -> SymbolElement {
        self.scalar(ScalarPoly::hbar_pow(e))
    }

    pub fn var(&self, kind: GenKind, i: usize, j: usize, mode: u16) -> SymbolElement {
        let gen = if kind.is_matrix() {
            GenId::matrix(kind, i, j)
        } else {
            GenId::vector(kind, i)
        };
        SymbolElement::var(self.sys.clone(), ModeVar::new(gen, mode))
    }

    /// The N×N matrix of (−mode) variables of a matrix kind.
    pub fn matrix(&self, kind: GenKind, mode: u16) -> SymMat {
        (1..=self.n)
            .map(|i| (1..=self.n).map(|j| self.var(kind, i, j, mode)).collect())
            .collect()
    }

    /// Column vector of a vector kind.
    pub fn vector(&self, kind: GenKind, mode: u16) -> Vec<SymbolElement> {
        (1..=self.n).map(|i| self.var(kind, i, 0, mode)).collect()
    }
}

pub type SymMat = Vec<Vec<SymbolElement>>;

pub fn mat_mul(a: &SymMat, b: &SymMat) -> SymMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = a[i][0].mul(&b[0][j]);
                    for k in 1..n {
                        acc = acc.add(&a[i][k].mul(&b[k][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &SymMat, v: &[SymbolElement]) -> Vec<SymbolElement> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let mut acc = a[i][0].mul(&v[0]);
            for k in 1..n {
                acc = acc.add(&a[i][k].mul(&v[k]));
            }
            acc
        })
        .collect()
}

pub fn mat_trace(a: &SymMat) -> SymbolElement {
    let mut acc = a[0][0].clone();
    for i in 1..a.len() {
        acc = acc.add(&a[i][i]);
    }
    acc
}

/// Matrix power word: X^k as symbol matrix.
pub fn mat_pow(a: &SymMat, k: u32) -> SymMat {
    let n = a.len();
    let sys = a[0][0].system().clone();
    let mut acc: SymMat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        SymbolElement::one(sys.clone())
                    } else {
                        SymbolElement::zero(sys.clone())
                    }
                })
                .collect()
        })
        .collect();
    for _ in 0..k {
        acc = mat_mul(&acc, a);
    }
    acc
}

/// det of a Poly matrix of even entries (Leibniz; N ≤ 4).
fn det_poly_mat(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    let mut acc = Poly::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p, neg| {
        let mut term = Poly::one();
        for (i, &pi) in p.iter().enumerate() {
            term = term.mul(&m[i][pi]);
        }
        acc = acc.add(&(if neg { term.neg() } else { term }));
    });
    acc
}

fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
    let n = perm.len();
    if k == n {
        let mut neg = false;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    neg = !neg;
                }
            }
        }
        f(perm, neg);
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// det B_{(N)} = det(γ, Aγ, …, A^{N−1}γ) as a polynomial, for A = X (the
/// U_{(N)} chart) or A = Y (the dual N=2 chart U_{(1²)}).
pub fn det_b_poly(n: usize, kind: GenKind) -> Poly {
    // Build entries as ℏ-free polynomials.
    let x: Vec<Vec<Poly>> = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| Poly::var(ModeVar::new(GenId::matrix(kind, i, j), 1)))
                .collect()
        })
        .collect();
    let gamma: Vec<Poly> = (1..=n)
        .map(|i| Poly::var(ModeVar::new(GenId::vector(GenKind::Gamma, i), 1)))
        .collect();
    let mut cols: Vec<Vec<Poly>> = vec![gamma.clone()];
    for _ in 1..n {
        let prev = cols.last().unwrap();
        let next: Vec<Poly> = (0..n)
            .map(|i| {
                let mut acc = Poly::zero();
                for k in 0..n {
                    acc = acc.add(&x[i][k].mul(&prev[k]));
                }
                acc
            })
            .collect();
        cols.push(next);
    }
    // B[i][j] = cols[j][i]
    let b: Vec<Vec<Poly>> = (0..n)
        .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
        .collect();
    det_poly_mat(&b)
}

/// Structure constants of gl_N: [E_ij, E_kl] = δ_jk E_il − δ_li E_kj.
pub fn structure_constant(
    (i, j): (usize, usize),
    (k, l): (usize, usize),
    (p, q): (usize, usize),
) -> i64 {
    let mut c = 0;
    if j == k && p == i && q == l {
        c += 1;
    }
    if l == i && p == k && q == j {
        c -= 1;
    }
    c
}

/// The chiral comoment section
/// μ̃_ch(E_ij) = Σ_p (x_{ip(−1)}y_{pj} − x_{pj(−1)}y_{ip}) + γ_{i(−1)}β_j + ψ_{i(−1)}φ_j.
pub fn mu_ch(ctx: &BrstContext, i: usize, j: usize) -> Result<SymbolElement> {
    if i < 1 || i > ctx.n || j < 1 || j > ctx.n {
        return Err(Error::IndexOutOfRange(ctx.n));
    }
    let mut acc = ctx.zero();
    for p in 1..=ctx.n {
        acc = acc.add(
            &ctx.var(GenKind::X, i, p, 1)
                .mul(&ctx.var(GenKind::Y, p, j, 1)),
        );
        acc = acc.sub(
            &ctx.var(GenKind::X, p, j, 1)
                .mul(&ctx.var(GenKind::Y, i, p, 1)),
        );
    }
    acc = acc.add(
        &ctx.var(GenKind::Gamma, i, 0, 1)
            .mul(&ctx.var(GenKind::Beta, j, 0, 1)),
    );
    acc = acc.add(
        &ctx.var(GenKind::Psi, i, 0, 1)
            .mul(&ctx.var(GenKind::Phi, j, 0, 1)),
    );
    Ok(acc)
}

/// The ghost current J(E_ij) = −Σ c^{pq}_{ijkl} Ψ_{kl}Φ_{pq}
/// = −Σ_l Ψ_{jl}Φ_{il} + Σ_k Ψ_{ki}Φ_{kj}.
pub fn ghost_current(ctx: &BrstContext, i: usize, j: usize) -> Result<SymbolElement> {
    if i < 1 || i > ctx.n || j < 1 || j > ctx.n {
        return Err(Error::IndexOutOfRange(ctx.n));
    }
    let mut acc = ctx.zero();
    for l in 1..=ctx.n {
        acc = acc.sub(
            &ctx.var(GenKind::GhostPsi, j, l, 1)
                .mul(&ctx.var(GenKind::GhostPhi, i, l, 1)),
        );
        acc = acc.add(
            &ctx.var(GenKind::GhostPsi, l, i, 1)
                .mul(&ctx.var(GenKind::GhostPhi, l, j, 1)),
        );
    }
    Ok(acc)
}

/// Ẽ_ij = μ̃_ch(E_ij) + J(E_ij); satisfies ℏ·Ẽ_ij = Q₍₀₎Φ_ij,
/// i.e. Ẽ_ij = d(Φ_ij).
pub fn e_tilde(ctx: &BrstContext, i: usize, j: usize) -> Result<SymbolElement> {
    Ok(mu_ch(ctx, i, j)?.add(&ghost_current(ctx, i, j)?))
}

/// The BRST charge Q = Σ_ij (μ̃_ch(E_ij) + ½J(E_ij))₍₋₁₎ Ψ_ij.
pub fn brst_charge(ctx: &BrstContext) -> SymbolElement {
    ctx.charge
        .get_or_init(|| {
            let mut acc = ctx.zero();
            for i in 1..=ctx.n {
                for j in 1..=ctx.n {
                    let current = mu_ch(ctx, i, j)
                        .unwrap()
                        .add(&ghost_current(ctx, i, j).unwrap().scale_rat(&Rational::new(
                            1.into(),
                            2.into(),
                        )));
                    let psi = ctx.var(GenKind::GhostPsi, i, j, 1);
                    acc = acc.add(&nth_product(&current, -1, &psi).unwrap());
                }
            }
            acc
        })
        .clone()
}

/// The differential d = ℏ⁻¹ Q₍₀₎.
pub fn differential(ctx: &BrstContext, f: &SymbolElement) -> Result<SymbolElement> {
    let q = brst_charge(ctx);
    let qf = nth_product(&q, 0, f)?;
    qf.try_div_hbar_pow(Half::ONE)
        .ok_or_else(|| Error::DivergentWickSum("Q_(0)f is not divisible by hbar".into()))
}

/// The relative condition: Ẽ_{ij(0)} f = Φ_{ij(0)} f = 0 for all i, j.
pub fn relative_check(ctx: &BrstContext, f: &SymbolElement) -> Result<bool> {
    for i in 1..=ctx.n {
        for j in 1..=ctx.n {
            let et = e_tilde(ctx, i, j)?;
            if !nth_product(&et, 0, f)?.is_zero() {
                return Ok(false);
            }
            let phi = ctx.var(GenKind::GhostPhi, i, j, 1);
            if !nth_product(&phi, 0, f)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Ghost bidegree (p, q) = (#Ψ, −#Φ) of a monomial-level component.
fn bigrade_components(f: &SymbolElement) -> BTreeMap<(i64, i64), SymbolElement> {
    let mut out: BTreeMap<(i64, i64), SymbolElement> = BTreeMap::new();
    let sys = f.system().clone();
    for (m, c) in f.num().terms() {
        let mut p = 0i64;
        let mut q = 0i64;
        for &(v, e) in m.vars() {
            match v.gen.kind {
                GenKind::GhostPsi => p += e as i64,
                GenKind::GhostPhi => q -= e as i64,
                _ => {}
            }
        }
        let mut poly = Poly::zero();
        poly.add_term(m.clone(), c);
        let piece = SymbolElement::from_raw_parts(sys.clone(), poly, f.den().clone());
        out.entry((p, q))
            .and_modify(|s| *s = s.add(&piece))
            .or_insert(piece);
    }
    out
}

/// The bigraded split d = d⁺ + d⁻: for a component of bidegree (p, q), d⁺ is
/// the projection of d onto (p+1, q) and d⁻ onto (p, q+1). The projection
/// residual is empty for the gl_N charge (asserted).
pub fn split_differential(
    ctx: &BrstContext,
    f: &SymbolElement,
) -> Result<(SymbolElement, SymbolElement)> {
    let mut d_plus = ctx.zero();
    let mut d_minus = ctx.zero();
    for ((p, q), piece) in bigrade_components(f) {
        let df = differential(ctx, &piece)?;
        let comps = bigrade_components(&df);
        let mut seen = ctx.zero();
        for ((cp, cq), part) in comps {
            if (cp, cq) == (p + 1, q) {
                d_plus = d_plus.add(&part);
                seen = seen.add(&part);
            } else if (cp, cq) == (p, q + 1) {
                d_minus = d_minus.add(&part);
                seen = seen.add(&part);
            }
        }
        debug_assert!(
            seen == df,
            "differential left the (p+1,q)/(p,q+1) bigrade cells"
        );
    }
    Ok((d_plus, d_minus))
}

// ---------------------------------------------------------------------------
// Random section samplers for the property suites.
// ---------------------------------------------------------------------------

/// Random homogeneous monomial sections of weight ≤ max_wt (in half-units).
pub fn sample_sections(
    ctx: &BrstContext,
    rng: &mut StdRng,
    count: usize,
    max_wt: Half,
    ghost_free: bool,
) -> Vec<SymbolElement> {
    let mut pool: Vec<ModeVar> = Vec::new();
    let kinds: &[GenKind] = if ghost_free {
        &[
            GenKind::X,
            GenKind::Y,
            GenKind::Gamma,
            GenKind::Beta,
            GenKind::Psi,
            GenKind::Phi,
        ]
    } else {
        &[
            GenKind::X,
            GenKind::Y,
            GenKind::Gamma,
            GenKind::Beta,
            GenKind::Psi,
            GenKind::Phi,
            GenKind::GhostPsi,
            GenKind::GhostPhi,
        ]
    };
    for &kind in kinds {
        for i in 1..=ctx.n {
            let js: Vec<usize> = if kind.is_matrix() {
                (1..=ctx.n).collect()
            } else {
                vec![0]
            };
            for j in js {
                for mode in 1..=2u16 {
                    let gen = if kind.is_matrix() {
                        GenId::matrix(kind, i, j)
                    } else {
                        GenId::vector(kind, i)
                    };
                    pool.push(ModeVar::new(gen, mode));
                }
            }
        }
    }
    let mut out = Vec::new();
    while out.len() < count {
        let mut term = ctx.one();
        let mut wt = Half::ZERO;
        let len = rng.gen_range(1..=3);
        for _ in 0..len {
            let v = pool[rng.gen_range(0..pool.len())];
            if (wt + v.weight()).0 > max_wt.0 {
                continue;
            }
            let next = term.mul(&SymbolElement::var(ctx.system().clone(), v));
            if next.is_zero() {
                continue;
            }
            wt = wt + v.weight();
            term = next;
        }
        if term.num().num_terms() == 0 {
            continue;
        }
        let c = rat_int(rng.gen_range(-3..=3i64));
        if c == rat_int(0) {
            continue;
        }
        out.push(term.scale_rat(&c));
    }
    out
}

/// Invariant letters for relative (gl_N-invariant) trace words.
#[derive(Clone, Copy, Debug)]
pub enum InvariantLetter {
    X,
    Y,
    /// the rank-one matrix (γβ)_{ij} = γ_i β_j
    GammaBeta,
    /// the rank-one matrix (ψφ)_{ij} = ψ_i φ_j
    PsiPhi,
    /// the anti-ghost matrix Φ
    GhostPhi,
    /// the transposed derived ghost matrix (∂Ψ)ᵗ; Ψ pairs with Φ by direct
    /// index contraction, so the adjoint-transforming matrix is ᵗΨ
    DGhostPsi,
}

pub fn letter_matrix(ctx: &BrstContext, letter: InvariantLetter) -> SymMat {
    match letter {
        InvariantLetter::X => ctx.matrix(GenKind::X, 1),
        InvariantLetter::Y => ctx.matrix(GenKind::Y, 1),
        InvariantLetter::GhostPhi => ctx.matrix(GenKind::GhostPhi, 1),
        InvariantLetter::DGhostPsi => {
            let m = ctx.matrix(GenKind::GhostPsi, 2);
            (0..ctx.n)
                .map(|i| (0..ctx.n).map(|j| m[j][i].clone()).collect())
                .collect()
        }
        InvariantLetter::GammaBeta => (1..=ctx.n)
            .map(|i| {
                (1..=ctx.n)
                    .map(|j| {
                        ctx.var(GenKind::Gamma, i, 0, 1)
                            .mul(&ctx.var(GenKind::Beta, j, 0, 1))
                    })
                    .collect()
            })
            .collect(),
        InvariantLetter::PsiPhi => (1..=ctx.n)
            .map(|i| {
                (1..=ctx.n)
                    .map(|j| {
                        ctx.var(GenKind::Psi, i, 0, 1)
                            .mul(&ctx.var(GenKind::Phi, j, 0, 1))
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Trace of a word of invariant letters.
pub fn trace_word(ctx: &BrstContext, word: &[InvariantLetter]) -> SymbolElement {
    let mut m = letter_matrix(ctx, word[0]);
    for &l in &word[1..] {
        m = mat_mul(&m, &letter_matrix(ctx, l));
    }
    mat_trace(&m)
}

/// Random sections of the relative subcomplex: products of invariant trace
/// words in {X, Y, γβ, ψφ, Φ, ∂Ψ} of weight ≤ max_wt.
pub fn sample_relative_sections(
    ctx: &BrstContext,
    rng: &mut StdRng,
    count: usize,
    max_wt: Half,
) -> Vec<SymbolElement> {
    use InvariantLetter::*;
    let letters = [X, Y, GammaBeta, PsiPhi, GhostPhi, DGhostPsi];
    let mut out = Vec::new();
    let mut guard = 0;
    while out.len() < count && guard < count * 100 {
        guard += 1;
        let len = rng.gen_range(1..=3);
        let word: Vec<InvariantLetter> =
            (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect();
        let f = trace_word(ctx, &word);
        if f.is_zero() {
            continue;
        }
        let g = match f.grading() {
            Ok(g) => g,
            Err(_) => continue,
        };
        if g.wt.0 > max_wt.0 {
            continue;
        }
        out.push(f);
    }
    out
}

// ---------------------------------------------------------------------------
// Verification suite.
// ---------------------------------------------------------------------------

fn status_of(r: Result<CheckStatus>) -> CheckStatus {
    r.unwrap_or_else(|e| CheckStatus::Error {
        message: e.to_string(),
    })
}

/// All BRST-level checks for the given N: gradings of Q, nilpotency, the
/// comoment/ghost homomorphism levels, the relative condition and the
/// bigraded split.
pub fn verify_brst(ctx: &BrstContext, seed: u64) -> RunReport {
    let n = ctx.n;
    let mut report = RunReport::new(n, &format!("verify brst --N {}", n));
    // Precompute the charge once; all jobs share the context.
    let _ = brst_charge(ctx);
    let mut jobs: Vec<(String, Box<dyn Fn() -> CheckStatus + Send + Sync + '_>)> = Vec::new();

    jobs.push((
        "brst/charge/grading".into(),
        Box::new(move || {
            let q = brst_charge(ctx);
            status_of(q.grading().map(|g| {
                bool_check(
                    g.twt == Half(2) && g.wt == Half(2) && g.charge == 1 && g.odd,
                    &format!("grading(Q) = {}", g),
                )
            }))
        }),
    ));

    jobs.push((
        "brst/charge/nilpotency".into(),
        Box::new(move || {
            let q = brst_charge(ctx);
            status_of(nth_product(&q, 0, &q).map(|qq| {
                if qq.is_zero() {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail {
                        lhs: qq.to_string(),
                        rhs: "0".into(),
                    }
                }
            }))
        }),
    ));

    for i in 1..=n {
        for j in 1..=n {
            jobs.push((
                format!("brst/e_tilde/d_phi_{}{}", i, j),
                Box::new(move || {
                    status_of((|| {
                        let lhs = differential(ctx, &ctx.var(GenKind::GhostPhi, i, j, 1))?;
                        let rhs = e_tilde(ctx, i, j)?;
                        Ok(eq_check(&lhs, &rhs))
                    })())
                }),
            ));
        }
    }

    // Homomorphism levels: μ̃ at κ_{−2N}, J at κ_{+2N}, Ẽ at level 0.
    for (name, sign, builder) in [
        ("mu", -1i64, mu_ch as fn(&BrstContext, usize, usize) -> Result<SymbolElement>),
        ("ghost", 1i64, ghost_current as fn(&BrstContext, usize, usize) -> Result<SymbolElement>),
    ] {
        jobs.push((
            format!("brst/{}/affine_levels", name),
            Box::new(move || {
                status_of((|| {
                    for i in 1..=n {
                        for j in 1..=n {
                            for k in 1..=n {
                                for l in 1..=n {
                                    let a = builder(&ctx, i, j)?;
                                    let b = builder(&ctx, k, l)?;
                                    // κ_{±2N}(E_ij, E_kl) = ±2N δ_jk δ_li ∓ 2 δ_ij δ_kl
                                    let mut kappa = 0i64;
                                    if j == k && l == i {
                                        kappa += sign * 2 * n as i64;
                                    }
                                    if i == j && k == l {
                                        kappa -= sign * 2;
                                    }
                                    let lvl = nth_product(&a, 1, &b)?;
                                    let expect = ctx
                                        .hbar(Half::from_int(2))
                                        .scale_rat(&rat_int(kappa));
                                    if lvl != expect {
                                        return Ok(CheckStatus::Fail {
                                            lhs: lvl.to_string(),
                                            rhs: expect.to_string(),
                                        });
                                    }
                                    // 0-mode: ℏ·(image of the bracket)
                                    let zero_mode = nth_product(&a, 0, &b)?;
                                    let mut bracket = ctx.zero();
                                    for p in 1..=n {
                                        for q in 1..=n {
                                            let c = structure_constant((i, j), (k, l), (p, q));
                                            if c != 0 {
                                                bracket = bracket.add(
                                                    &builder(&ctx, p, q)?.scale_rat(&rat_int(c)),
                                                );
                                            }
                                        }
                                    }
                                    let expect0 = bracket.mul_hbar_pow(Half::ONE);
                                    if zero_mode != expect0 {
                                        return Ok(CheckStatus::Fail {
                                            lhs: zero_mode.to_string(),
                                            rhs: expect0.to_string(),
                                        });
                                    }
                                    // Higher products vanish.
                                    if !nth_product(&a, 2, &b)?.is_zero() {
                                        return Ok(CheckStatus::Fail {
                                            lhs: "nonzero 2-product".into(),
                                            rhs: "0".into(),
                                        });
                                    }
                                }
                            }
                        }
                    }
                    Ok(CheckStatus::Pass)
                })())
            }),
        ));
    }

    // μ_ch(E_ij)_(m) Tr(X^m) = 0 (cocycle input for the N=4 generators).
    jobs.push((
        "brst/mu/annihilates_trace_powers".into(),
        Box::new(move || {
            status_of((|| {
                for m in 1..=3u32 {
                    let tx = mat_trace(&mat_pow(&ctx.matrix(GenKind::X, 1), m));
                    for i in 1..=n {
                        for j in 1..=n {
                            let mu = mu_ch(ctx, i, j)?;
                            let r = ope(&mu, &tx)?;
                            if !r.is_trivial() {
                                return Ok(CheckStatus::Fail {
                                    lhs: format!("mu_ch(E_{}{}) on Tr(X^{}): {}", i, j, m, r),
                                    rhs: "{}".into(),
                                });
                            }
                        }
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    // d² = 0 on random sections (ghost-carrying and ghost-free).
    jobs.push((
        "brst/differential/squares_to_zero".into(),
        Box::new(move || {
            let mut rng = StdRng::seed_from_u64(seed);
            status_of((|| {
                let count = if n >= 3 { 6 } else { 15 };
                let sections = sample_sections(ctx, &mut rng, count, Half(5), false);
                for f in &sections {
                    let ddf = differential(ctx, &differential(ctx, f)?)?;
                    if !ddf.is_zero() {
                        return Ok(CheckStatus::Fail {
                            lhs: format!("d(d({})) = {}", f, ddf),
                            rhs: "0".into(),
                        });
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    // Relative condition spot checks.
    jobs.push((
        "brst/relative/ghost_psi_fails".into(),
        Box::new(move || {
            status_of((|| {
                let psi = ctx.var(GenKind::GhostPsi, 1, 1, 1);
                let ok = !relative_check(ctx, &psi)?;
                // Φ_{11(0)}Ψ_{11} = ℏ𝟏
                let phi = ctx.var(GenKind::GhostPhi, 1, 1, 1);
                let c = nth_product(&phi, 0, &psi)?;
                Ok(bool_check(
                    ok && c == ctx.hbar(Half::ONE),
                    "relative_check(Ψ_{11}) must fail with Φ_{(0)}Ψ = ℏ",
                ))
            })())
        }),
    ));

    jobs.push((
        "brst/relative/invariant_traces_pass".into(),
        Box::new(move || {
            let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
            status_of((|| {
                let sections = sample_relative_sections(ctx, &mut rng, 5, Half(5));
                for f in &sections {
                    if !relative_check(ctx, f)? {
                        return Ok(CheckStatus::Fail {
                            lhs: format!("relative_check({})", f),
                            rhs: "true".into(),
                        });
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    // Bigraded split: d = d⁺ + d⁻ and d⁺d⁻ + d⁻d⁺ = 0 on relative sections.
    jobs.push((
        "brst/split/anticommute".into(),
        Box::new(move || {
            let mut rng = StdRng::seed_from_u64(seed ^ 0xd1f);
            status_of((|| {
                let count = if n >= 3 { 4 } else { 10 };
                let sections = sample_relative_sections(ctx, &mut rng, count, Half(5));
                for f in &sections {
                    let (dp, dm) = split_differential(ctx, f)?;
                    let df = differential(ctx, f)?;
                    if dp.add(&dm) != df {
                        return Ok(CheckStatus::Fail {
                            lhs: "d⁺f + d⁻f".into(),
                            rhs: "df".into(),
                        });
                    }
                    let (dpp, dpm) = split_differential(ctx, &dp)?;
                    let (dmp, dmm) = split_differential(ctx, &dm)?;
                    if !dpp.is_zero() || !dmm.is_zero() {
                        return Ok(CheckStatus::Fail {
                            lhs: "d⁺d⁺f or d⁻d⁻f".into(),
                            rhs: "0".into(),
                        });
                    }
                    if !dpm.add(&dmp).is_zero() {
                        return Ok(CheckStatus::Fail {
                            lhs: format!("(d⁺d⁻ + d⁻d⁺)({})", f),
                            rhs: "0".into(),
                        });
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    // gl_N commutator of the Ẽ zero-modes on random sections.
    jobs.push((
        "brst/e_tilde/gl_commutator".into(),
        Box::new(move || {
            let mut rng = StdRng::seed_from_u64(seed ^ 0x91);
            status_of((|| {
                let sections = sample_sections(ctx, &mut rng, 4, Half(4), false);
                let pairs = [((1, 1), (1, 2)), ((1, 2), (2, 1))];
                for f in &sections {
                    for ((i, j), (k, l)) in pairs {
                        if k > n || l > n || j > n {
                            continue;
                        }
                        let a = e_tilde(ctx, i, j)?;
                        let b = e_tilde(ctx, k, l)?;
                        let bf = nth_product(&b, 0, f)?;
                        let af = nth_product(&a, 0, f)?;
                        let lhs = nth_product(&a, 0, &bf)?
                            .sub(&nth_product(&b, 0, &af)?)
                            .try_div_hbar_pow(Half::from_int(2))
                            .ok_or_else(|| {
                                Error::DivergentWickSum("commutator not divisible by hbar^2".into())
                            })?;
                        let mut rhs = ctx.zero();
                        for p in 1..=n {
                            for q in 1..=n {
                                let c = structure_constant((i, j), (k, l), (p, q));
                                if c != 0 {
                                    let epq = e_tilde(ctx, p, q)?;
                                    rhs = rhs.add(
                                        &nth_product(&epq, 0, f)?.scale_rat(&rat_int(c)),
                                    );
                                }
                            }
                        }
                        let rhs = rhs.try_div_hbar_pow(Half::ONE).ok_or_else(|| {
                            Error::DivergentWickSum("action not divisible by hbar".into())
                        })?;
                        if lhs != rhs {
                            return Ok(CheckStatus::Fail {
                                lhs: lhs.to_string(),
                                rhs: rhs.to_string(),
                            });
                        }
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    // d preserves twt and wt, raises charge by one.
    jobs.push((
        "brst/differential/grading_shift".into(),
        Box::new(move || {
            let mut rng = StdRng::seed_from_u64(seed ^ 0x44);
            status_of((|| {
                let sections = sample_sections(ctx, &mut rng, 8, Half(4), false);
                for f in &sections {
                    let df = differential(ctx, f)?;
                    if df.is_zero() {
                        continue;
                    }
                    let gf = f.grading()?;
                    let gd = df.grading()?;
                    if gd.twt != gf.twt || gd.wt != gf.wt || gd.charge != gf.charge + 1 {
                        return Ok(CheckStatus::Fail {
                            lhs: format!("grading(df) = {}", gd),
                            rhs: format!("grading(f) + (0,0,+1,·) = {}", gf),
                        });
                    }
                }
                Ok(CheckStatus::Pass)
            })())
        }),
    ));

    report.run_all(jobs);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_charge_formula() {
        // Q at N=1 is (γβ + ψφ)₍₋₁₎Ψ₁₁ = ι((γβ + ψφ)Ψ₁₁).
        let ctx = BrstContext::new(1).unwrap();
        let q = brst_charge(&ctx);
        let mu = mu_ch(&ctx, 1, 1).unwrap();
        let expect = mu.mul(&ctx.var(GenKind::GhostPsi, 1, 1, 1));
        assert_eq!(q, expect);
        // xy terms cancel at N=1: μ = γβ + ψφ
        let manual = ctx
            .var(GenKind::Gamma, 1, 0, 1)
            .mul(&ctx.var(GenKind::Beta, 1, 0, 1))
            .add(
                &ctx.var(GenKind::Psi, 1, 0, 1)
                    .mul(&ctx.var(GenKind::Phi, 1, 0, 1)),
            );
        assert_eq!(mu, manual);
    }

    #[test]
    fn nilpotency_n1_n2() {
        for n in 1..=2 {
            let ctx = BrstContext::new(n).unwrap();
            let q = brst_charge(&ctx);
            assert!(nth_product(&q, 0, &q).unwrap().is_zero(), "N = {}", n);
        }
    }

    #[test]
    fn ghost_current_vanishes_at_n1() {
        let ctx = BrstContext::new(1).unwrap();
        assert!(ghost_current(&ctx, 1, 1).unwrap().is_zero());
    }

    #[test]
    fn e_tilde_is_d_phi() {
        let ctx = BrstContext::new(2).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                let lhs = differential(&ctx, &ctx.var(GenKind::GhostPhi, i, j, 1)).unwrap();
                assert_eq!(lhs, e_tilde(&ctx, i, j).unwrap());
            }
        }
    }

    #[test]
    fn d_of_trace_phi_words() {
        // d(Tr(X^m Φ)) = βX^mγ − φX^mψ at N = 2, m = 0, 1, 2.
        let ctx = BrstContext::new(2).unwrap();
        let x = ctx.matrix(GenKind::X, 1);
        let phi_gh = ctx.matrix(GenKind::GhostPhi, 1);
        for m in 0..=2u32 {
            let xm = mat_pow(&x, m);
            let w = mat_trace(&mat_mul(&xm, &phi_gh));
            let dw = differential(&ctx, &w).unwrap();
            // βX^mγ − φX^mψ
            let beta = ctx.vector(GenKind::Beta, 1);
            let gamma = ctx.vector(GenKind::Gamma, 1);
            let phiv = ctx.vector(GenKind::Phi, 1);
            let psiv = ctx.vector(GenKind::Psi, 1);
            let mut expect = ctx.zero();
            let xmg = mat_vec(&xm, &gamma);
            let xmp = mat_vec(&xm, &psiv);
            for i in 0..2 {
                expect = expect.add(&beta[i].mul(&xmg[i]));
                expect = expect.sub(&phiv[i].mul(&xmp[i]));
            }
            assert_eq!(dw, expect, "m = {}", m);
        }
    }

    #[test]
    fn relative_condition_spot() {
        let ctx = BrstContext::new(2).unwrap();
        let psi = ctx.var(GenKind::GhostPsi, 1, 1, 1);
        assert!(!relative_check(&ctx, &psi).unwrap());
        let tx2 = mat_trace(&mat_pow(&ctx.matrix(GenKind::X, 1), 2));
        assert!(relative_check(&ctx, &tx2).unwrap());
    }

    #[test]
    fn suite_n1() {
        let ctx = BrstContext::new(1).unwrap();
        let r = verify_brst(&ctx, 7);
        assert!(r.all_passed(), "{}", r.to_text());
    }
}
