//! Localized chart sections over U_{(N)} and the two N=2 charts, the
//! rank-(N−1) βγbc free-field realisation and the ℙ¹ transition identities.
//!
//! The matrix B = (γ, Xγ, …, X^{N−1}γ) is inverted at the symbol level via
//! adjugate/determinant (the (−1)-product inverse is used only where the
//! transition identities write (1/x)₍₋₁₎ explicitly).

use crate::brst::{
    differential, mat_mul, mat_pow, mat_trace, mat_vec, relative_check, BrstContext, SymMat,
};
use crate::n4::{build_section, tr_pow, SectionName};
use crate::ope::{no_inverse, nth_product, nth_product_trunc, ope, OpeResult};
use crate::report::{bool_check, eq_check, CheckStatus, RunReport};
use crate::scalar::{rat, rat_int, Half, ScalarPoly};
use crate::symbol::SymbolElement;
use crate::system::GenKind;
use crate::{Error, Result};

/// Charts with materialised section algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// U_{(N)}: γ, Xγ, …, X^{N−1}γ span.
    UN,
    /// U_0 = U_{(2)} for N = 2 (same chart as `UN`).
    UZero,
    /// U_∞ = U_{(1²)} for N = 2: γ, Yγ span; the roles of X and Y swap.
    UInfinity,
}

pub struct ChartAlgebra {
    pub chart: Chart,
    /// Localizer index of det B for this chart.
    pub localizer: u16,
    /// The letter generating the B-matrix columns (X or Y).
    pub letter: GenKind,
}

#[derive(Debug, Clone)]
pub struct ChartSection {
    pub name: String,
    pub value: SymbolElement,
}

pub fn chart_algebra(ctx: &BrstContext, chart: Chart) -> Result<ChartAlgebra> {
    match chart {
        Chart::UN | Chart::UZero => {
            if chart == Chart::UZero && ctx.n != 2 {
                return Err(Error::UnsupportedChart(
                    "U_0 is the N = 2 chart U_{(2)}".into(),
                ));
            }
            let localizer = ctx.loc_det_b.ok_or_else(|| {
                Error::UnsupportedChart("context built without chart localizers".into())
            })?;
            Ok(ChartAlgebra {
                chart,
                localizer,
                letter: GenKind::X,
            })
        }
        Chart::UInfinity => {
            if ctx.n != 2 {
                return Err(Error::UnsupportedChart(
                    "U_∞ = U_{(1²)} is only materialised for N = 2".into(),
                ));
            }
            let localizer = ctx.loc_det_b_dual.ok_or_else(|| {
                Error::UnsupportedChart("context built without chart localizers".into())
            })?;
            Ok(ChartAlgebra {
                chart,
                localizer,
                letter: GenKind::Y,
            })
        }
    }
}

/// B = (γ, Aγ, …, A^{N−1}γ) as a symbol matrix.
pub fn b_matrix(ctx: &BrstContext, letter: GenKind) -> SymMat {
    let a = ctx.matrix(letter, 1);
    let gamma = ctx.vector(GenKind::Gamma, 1);
    let mut cols: Vec<Vec<SymbolElement>> = vec![gamma.clone()];
    for _ in 1..ctx.n {
        cols.push(mat_vec(&a, cols.last().unwrap()));
    }
    (0..ctx.n)
        .map(|i| (0..ctx.n).map(|j| cols[j][i].clone()).collect())
        .collect()
}

/// Determinant of a symbol matrix with even entries (Leibniz, N ≤ 4).
pub fn sym_det(m: &SymMat) -> SymbolElement {
    let n = m.len();
    let sys = m[0][0].system().clone();
    let mut acc = SymbolElement::zero(sys);
    let mut perm: Vec<usize> = (0..n).collect();
    permute_sign(&mut perm, 0, &mut |p, neg| {
        let mut term = m[0][p[0]].clone();
        for (i, &pi) in p.iter().enumerate().skip(1) {
            term = term.mul(&m[i][pi]);
        }
        acc = acc.add(&(if neg { term.neg() } else { term }));
    });
    acc
}

fn permute_sign(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
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
        permute_sign(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// Adjugate (cofactor transpose) of a symbol matrix with even entries.
pub fn sym_adjugate(m: &SymMat) -> SymMat {
    let n = m.len();
    let sys = m[0][0].system().clone();
    if n == 1 {
        return vec![vec![SymbolElement::one(sys)]];
    }
    let minor = |r: usize, c: usize| -> SymbolElement {
        let sub: SymMat = (0..n)
            .filter(|&i| i != r)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != c)
                    .map(|j| m[i][j].clone())
                    .collect()
            })
            .collect();
        sym_det(&sub)
    };
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let v = minor(i, j);
                    if (i + j) % 2 == 1 {
                        v.neg()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// (B⁻¹ v)_{k+1} for the chart's B, as a localized symbol.
fn b_inverse_apply(
    ctx: &BrstContext,
    alg: &ChartAlgebra,
    v: &[SymbolElement],
) -> Vec<SymbolElement> {
    let b = b_matrix(ctx, alg.letter);
    let adj = sym_adjugate(&b);
    let num = mat_vec(&adj, v);
    num.into_iter()
        .map(|x| {
            let mut den = std::collections::BTreeMap::new();
            den.insert(alg.localizer, 1);
            SymbolElement::from_parts(ctx.system().clone(), x.num().clone(), den)
        })
        .collect()
}

/// [A^N : A^i] for i = 0..N−1 (the chart letter A is X over U_{(N)}).
pub fn bracket_top(ctx: &BrstContext, alg: &ChartAlgebra, i: usize) -> SymbolElement {
    let a = ctx.matrix(alg.letter, 1);
    let gamma = ctx.vector(GenKind::Gamma, 1);
    let top = mat_vec(&mat_pow(&a, ctx.n as u32), &gamma);
    b_inverse_apply(ctx, alg, &top)[i].clone()
}

/// [B : A^i] where B is the conjugate letter (Y over U_{(N)}, X over U_∞).
pub fn bracket_dual(ctx: &BrstContext, alg: &ChartAlgebra, i: usize) -> SymbolElement {
    let dual = if alg.letter == GenKind::X {
        GenKind::Y
    } else {
        GenKind::X
    };
    let b = ctx.matrix(dual, 1);
    let gamma = ctx.vector(GenKind::Gamma, 1);
    let v = mat_vec(&b, &gamma);
    b_inverse_apply(ctx, alg, &v)[i].clone()
}

/// {ψ : A^i γ} for i = 0..N−1.
pub fn brace_psi(ctx: &BrstContext, alg: &ChartAlgebra, i: usize) -> SymbolElement {
    let psi = ctx.vector(GenKind::Psi, 1);
    b_inverse_apply(ctx, alg, &psi)[i].clone()
}

/// φ A^i γ.
pub fn phi_pow_gamma(ctx: &BrstContext, letter: GenKind, i: u32) -> SymbolElement {
    let a = mat_pow(&ctx.matrix(letter, 1), i);
    let phi = ctx.vector(GenKind::Phi, 1);
    let gamma = ctx.vector(GenKind::Gamma, 1);
    let ag = mat_vec(&a, &gamma);
    let mut acc = ctx.zero();
    for k in 0..ctx.n {
        acc = acc.add(&phi[k].mul(&ag[k]));
    }
    acc
}

/// All chart sections of the spec for the given chart.
pub fn chart_sections(ctx: &BrstContext, chart: Chart) -> Result<Vec<ChartSection>> {
    let alg = chart_algebra(ctx, chart)?;
    let letter_name = if alg.letter == GenKind::X { "X" } else { "Y" };
    let dual_name = if alg.letter == GenKind::X { "Y" } else { "X" };
    let mut out = Vec::new();
    for i in 0..ctx.n {
        out.push(ChartSection {
            name: format!("[{}^{} : {}^{}]", letter_name, ctx.n, letter_name, i),
            value: bracket_top(ctx, &alg, i),
        });
        out.push(ChartSection {
            name: format!("[{} : {}^{}]", dual_name, letter_name, i),
            value: bracket_dual(ctx, &alg, i),
        });
        out.push(ChartSection {
            name: format!("{{psi : {}^{} gamma}}", letter_name, i),
            value: brace_psi(ctx, &alg, i),
        });
        out.push(ChartSection {
            name: format!("phi {}^{} gamma", letter_name, i),
            value: phi_pow_gamma(ctx, alg.letter, i as u32),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tilde generators of the rank-(N−1) βγbc system over U_{(N)}.
// ---------------------------------------------------------------------------

fn inv_n_pow(ctx: &BrstContext, k: i64) -> crate::scalar::Rational {
    let n = ctx.n as i64;
    let mut acc = rat_int(1);
    for _ in 0..k {
        acc /= rat_int(n);
    }
    acc
}

fn binom_i(n: i64, k: i64) -> crate::scalar::Rational {
    crate::ope::binomial(n, k)
}

/// b̃_m = Σ_{k=1}^{m} (−1/N)^{m−k} binom(m,k) Tr(X)^{m−k} (φX^kγ − (1/N)Tr(X^k)φγ).
pub fn btilde(ctx: &BrstContext, m: usize) -> SymbolElement {
    let n = ctx.n as i64;
    let tx = tr_pow(ctx, GenKind::X, 1);
    let mut acc = ctx.zero();
    for k in 1..=m {
        let mut coeff = inv_n_pow(ctx, (m - k) as i64) * binom_i(m as i64, k as i64);
        if (m - k) % 2 == 1 {
            coeff = -coeff;
        }
        let mut inner = phi_pow_gamma(ctx, GenKind::X, k as u32);
        inner = inner.sub(
            &tr_pow(ctx, GenKind::X, k as u32)
                .mul(&phi_pow_gamma(ctx, GenKind::X, 0))
                .scale_rat(&rat(1, n)),
        );
        let mut term = inner;
        for _ in 0..(m - k) {
            term = term.mul(&tx);
        }
        acc = acc.add(&term.scale_rat(&coeff));
    }
    acc
}

/// c̃_m = Σ_{k=m}^{N−1} (1/N)^{k−m} binom(k,m) Tr(X)^{k−m} {ψ:X^kγ}.
///
/// The printed exponent is (1/N)^{m−k}, i.e. positive powers of N; only the
/// reading with non-negative powers of 1/N (mirroring the γ̃ display) makes
/// the rank-(N−1) pairing diagonal, and it is pinned here by the
/// verification suite at N = 3.
pub fn ctilde(ctx: &BrstContext, alg: &ChartAlgebra, m: usize) -> SymbolElement {
    let tx = tr_pow(ctx, GenKind::X, 1);
    let mut acc = ctx.zero();
    for k in m..=(ctx.n - 1) {
        let coeff = inv_n_pow(ctx, (k - m) as i64) * binom_i(k as i64, m as i64);
        let mut term = brace_psi(ctx, alg, k);
        for _ in 0..(k - m) {
            term = term.mul(&tx);
        }
        acc = acc.add(&term.scale_rat(&coeff));
    }
    acc
}

/// β̃_m = (1/(m+1))(Σ_{k=2}^{m+1} (−1/N)^{m−k+1} binom(m+1,k) Tr(X)^{m−k+1} Tr(X^k)
///         + m(−1/N)^m Tr(X)^{m+1}).
pub fn betatilde(ctx: &BrstContext, m: usize) -> SymbolElement {
    let tx = tr_pow(ctx, GenKind::X, 1);
    let mut acc = ctx.zero();
    for k in 2..=(m + 1) {
        let mut coeff = inv_n_pow(ctx, (m + 1 - k) as i64) * binom_i(m as i64 + 1, k as i64);
        if (m + 1 - k) % 2 == 1 {
            coeff = -coeff;
        }
        let mut term = tr_pow(ctx, GenKind::X, k as u32);
        for _ in 0..(m + 1 - k) {
            term = term.mul(&tx);
        }
        acc = acc.add(&term.scale_rat(&coeff));
    }
    let mut last = ctx.one();
    for _ in 0..(m + 1) {
        last = last.mul(&tx);
    }
    let mut lc = inv_n_pow(ctx, m as i64) * rat_int(m as i64);
    if m % 2 == 1 {
        lc = -lc;
    }
    acc = acc.add(&last.scale_rat(&lc));
    acc.scale_rat(&rat(1, m as i64 + 1))
}

/// γ̃_m = Σ_{k=m}^{N−1} (1/N)^{k−m} binom(k,m) Tr(X)^{k−m} [Y:X^k]
///        − Σ_{j=1}^{N−m−2} b̃_j ₍₋₁₎ c̃_{m+j+1}
///        − Σ_{j=1}^{N−m−3} ((j+1)/N) β̃_j φγ c̃_{m+j+2}
///        − ((N−m−1)/N) φγ c̃_{m+1}.
///
/// The b̃c̃ term is read as a (−1)-product (it first activates at N = 4);
/// the remaining products are symbol products.
pub fn gammatilde(ctx: &BrstContext, alg: &ChartAlgebra, m: usize) -> Result<SymbolElement> {
    let n = ctx.n;
    let tx = tr_pow(ctx, GenKind::X, 1);
    let phigamma = phi_pow_gamma(ctx, GenKind::X, 0);
    let mut acc = ctx.zero();
    for k in m..=(n - 1) {
        let coeff = inv_n_pow(ctx, (k - m) as i64) * binom_i(k as i64, m as i64);
        let mut term = bracket_dual(ctx, alg, k);
        for _ in 0..(k - m) {
            term = term.mul(&tx);
        }
        acc = acc.add(&term.scale_rat(&coeff));
    }
    if n >= m + 3 {
        for j in 1..=(n - m - 2) {
            let b = btilde(ctx, j);
            let c = ctilde(ctx, alg, m + j + 1);
            acc = acc.sub(&nth_product(&b, -1, &c)?);
        }
    }
    if n >= m + 4 {
        for j in 1..=(n - m - 3) {
            let term = betatilde(ctx, j)
                .mul(&phigamma)
                .mul(&ctilde(ctx, alg, m + j + 2))
                .scale_rat(&rat((j as i64) + 1, n as i64));
            acc = acc.sub(&term);
        }
    }
    if n >= m + 2 {
        let term = phigamma
            .mul(&ctilde(ctx, alg, m + 1))
            .scale_rat(&rat((n - m - 1) as i64, n as i64));
        acc = acc.sub(&term);
    }
    Ok(acc)
}

/// The 4(N−1) tilde sections.
pub fn tilde_generators(ctx: &BrstContext) -> Result<Vec<ChartSection>> {
    if ctx.n < 2 {
        return Err(Error::UnsupportedN(ctx.n, "tilde generators need N ≥ 2".into()));
    }
    let alg = chart_algebra(ctx, Chart::UN)?;
    let mut out = Vec::new();
    for m in 1..ctx.n {
        out.push(ChartSection {
            name: format!("betatilde_{}", m),
            value: betatilde(ctx, m),
        });
        out.push(ChartSection {
            name: format!("gammatilde_{}", m),
            value: gammatilde(ctx, &alg, m)?,
        });
        out.push(ChartSection {
            name: format!("btilde_{}", m),
            value: btilde(ctx, m),
        });
        out.push(ChartSection {
            name: format!("ctilde_{}", m),
            value: ctilde(ctx, &alg, m),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Verification suites.
// ---------------------------------------------------------------------------

type ExpectedOpe = Vec<(u32, SymbolElement)>;

type Job<'a> = (String, Box<dyn Fn() -> CheckStatus + Send + Sync + 'a>);

fn ope_against<'a>(
    id: String,
    f: SymbolElement,
    g: SymbolElement,
    expected: ExpectedOpe,
) -> Job<'a> {
    let id2 = id.clone();
    (
        id,
        Box::new(move || match ope(&f, &g) {
            Ok(actual) => {
                let mut exp = OpeResult::default();
                let mut tmp: std::collections::BTreeMap<u32, SymbolElement> =
                    std::collections::BTreeMap::new();
                for (m, s) in &expected {
                    tmp.insert(*m, s.clone());
                }
                for (m, s) in tmp {
                    exp.insert_checked(m, s);
                }
                if actual == exp {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail {
                        lhs: format!("{}: {}", id2, actual),
                        rhs: exp.to_string(),
                    }
                }
            }
            Err(e) => CheckStatus::Error {
                message: e.to_string(),
            },
        }),
    )
}

/// Prop. suite: diagonal contractions −δ_{ij}ℏ (β̃γ̃) and +δ_{ij}ℏ (b̃c̃), all
/// other OPEs among the tilde sections trivial, full decoupling from Tr(X),
/// Tr(Y), φγ, βψ, and the §6 weight table under T₍₁₎.
pub fn verify_betagambc(ctx: &BrstContext) -> Result<RunReport> {
    if ctx.n < 2 {
        return Err(Error::UnsupportedN(ctx.n, "the βγbc realisation needs N ≥ 2".into()));
    }
    let mut report = RunReport::new(ctx.n, &format!("verify realization --N {}", ctx.n));
    let tildes = tilde_generators(ctx)?;
    let find = |name: &str| -> SymbolElement {
        tildes
            .iter()
            .find(|s| s.name == name)
            .expect("tilde section")
            .value
            .clone()
    };
    let hbar = ctx.hbar(Half::ONE);

    let mut jobs: Vec<Job<'_>> = Vec::new();

    // Diagonal and off-diagonal contractions.
    for i in 1..ctx.n {
        for j in 1..ctx.n {
            let expected_bg: ExpectedOpe = if i == j {
                vec![(1, hbar.neg())]
            } else {
                vec![]
            };
            jobs.push(ope_against(
                format!("realization/betatilde_{}_gammatilde_{}", i, j),
                find(&format!("betatilde_{}", i)),
                find(&format!("gammatilde_{}", j)),
                expected_bg,
            ));
            let expected_bc: ExpectedOpe = if i == j {
                vec![(1, hbar.clone())]
            } else {
                vec![]
            };
            jobs.push(ope_against(
                format!("realization/btilde_{}_ctilde_{}", i, j),
                find(&format!("btilde_{}", i)),
                find(&format!("ctilde_{}", j)),
                expected_bc,
            ));
            // Mixed boson/fermion pairs are trivial.
            jobs.push(ope_against(
                format!("realization/betatilde_{}_ctilde_{}", i, j),
                find(&format!("betatilde_{}", i)),
                find(&format!("ctilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/gammatilde_{}_btilde_{}", i, j),
                find(&format!("gammatilde_{}", i)),
                find(&format!("btilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/betatilde_{}_betatilde_{}", i, j),
                find(&format!("betatilde_{}", i)),
                find(&format!("betatilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/gammatilde_{}_gammatilde_{}", i, j),
                find(&format!("gammatilde_{}", i)),
                find(&format!("gammatilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/btilde_{}_btilde_{}", i, j),
                find(&format!("btilde_{}", i)),
                find(&format!("btilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/ctilde_{}_ctilde_{}", i, j),
                find(&format!("ctilde_{}", i)),
                find(&format!("ctilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/betatilde_{}_btilde_{}", i, j),
                find(&format!("betatilde_{}", i)),
                find(&format!("btilde_{}", j)),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/gammatilde_{}_ctilde_{}", i, j),
                find(&format!("gammatilde_{}", i)),
                find(&format!("ctilde_{}", j)),
                vec![],
            ));
        }
    }

    // Decoupling from the m = 0 sector.
    let m0: Vec<(&str, SymbolElement)> = vec![
        ("TrX", tr_pow(ctx, GenKind::X, 1)),
        ("TrY", tr_pow(ctx, GenKind::Y, 1)),
        ("phigamma", phi_pow_gamma(ctx, GenKind::X, 0)),
        ("betapsi", {
            let beta = ctx.vector(GenKind::Beta, 1);
            let psi = ctx.vector(GenKind::Psi, 1);
            let mut acc = ctx.zero();
            for k in 0..ctx.n {
                acc = acc.add(&beta[k].mul(&psi[k]));
            }
            acc
        }),
    ];
    for s in &tildes {
        for (mn, mv) in &m0 {
            jobs.push(ope_against(
                format!("realization/{}_{}", s.name, mn),
                s.value.clone(),
                mv.clone(),
                vec![],
            ));
            jobs.push(ope_against(
                format!("realization/{}_{}", mn, s.name),
                mv.clone(),
                s.value.clone(),
                vec![],
            ));
        }
    }

    // §6 weights under T₍₁₎: wt(β̃_m) = (m+1)/2, wt(γ̃_m) = (1−m)/2,
    // wt(b̃_m) = (m+2)/2, wt(c̃_m) = −m/2.
    let t = build_section(ctx, SectionName::T)?.value;
    for m in 1..ctx.n {
        for (prefix, wt2) in [
            ("betatilde", (m as i64) + 1),
            ("gammatilde", 1 - (m as i64)),
            ("btilde", (m as i64) + 2),
            ("ctilde", -(m as i64)),
        ] {
            let name = format!("{}_{}", prefix, m);
            let v = find(&name);
            let t2 = t.clone();
            jobs.push((
                format!("realization/weight_{}", name),
                Box::new(move || match nth_product(&t2, 1, &v) {
                    Ok(got) => {
                        let expect = v.mul_hbar_pow(Half::from_int(2)).scale_rat(&rat(wt2, 2));
                        eq_check(&got, &expect)
                    }
                    Err(e) => CheckStatus::Error {
                        message: e.to_string(),
                    },
                }),
            ));
        }
    }

    // Cocycle and relative condition for all chart and tilde sections.
    let sections = chart_sections(ctx, Chart::UN)?;
    for s in sections.iter().chain(tildes.iter()) {
        let v = s.value.clone();
        let name = s.name.clone();
        jobs.push((
            format!("realization/cocycle_{}", name),
            Box::new(move || match differential(ctx, &v) {
                Ok(dv) => {
                    if dv.is_zero() {
                        match relative_check(ctx, &v) {
                            Ok(true) => CheckStatus::Pass,
                            Ok(false) => CheckStatus::Fail {
                                lhs: format!("relative_check({})", name),
                                rhs: "true".into(),
                            },
                            Err(e) => CheckStatus::Error {
                                message: e.to_string(),
                            },
                        }
                    } else {
                        CheckStatus::Fail {
                            lhs: format!("d({}) = {}", name, dv),
                            rhs: "0".into(),
                        }
                    }
                }
                Err(e) => CheckStatus::Error {
                    message: e.to_string(),
                },
            }),
        ));
    }

    report.run_all(jobs);

    // B·adj(B) = det(B)·Id and the local-coordinate completeness spot checks.
    let b = b_matrix(ctx, GenKind::X);
    let adj = sym_adjugate(&b);
    let det = sym_det(&b);
    let prod = mat_mul(&b, &adj);
    let mut ok = true;
    for i in 0..ctx.n {
        for j in 0..ctx.n {
            let expect = if i == j { det.clone() } else { ctx.zero() };
            if prod[i][j] != expect {
                ok = false;
            }
        }
    }
    report.push("realization/b_adjugate_identity", bool_check(ok, "B·adj(B) = det·Id"));
    {
        // ψ = B·ᵗ({ψ:X^{i−1}γ})_i and X·B = (Xγ, …, X^Nγ).
        let alg = chart_algebra(ctx, Chart::UN)?;
        let braces: Vec<SymbolElement> = (0..ctx.n).map(|i| brace_psi(ctx, &alg, i)).collect();
        let psi = ctx.vector(GenKind::Psi, 1);
        let recovered = mat_vec(&b, &braces);
        let ok_psi = recovered
            .iter()
            .zip(psi.iter())
            .all(|(a, b)| a == b);
        report.push(
            "realization/local_coord_psi",
            bool_check(ok_psi, "ψ = B·ᵗ({ψ:X^{i−1}γ})"),
        );
        let x = ctx.matrix(GenKind::X, 1);
        let xb = mat_mul(&x, &b);
        let gamma = ctx.vector(GenKind::Gamma, 1);
        let mut ok_xb = true;
        let mut col = gamma;
        for j in 0..ctx.n {
            col = mat_vec(&x, &col);
            for i in 0..ctx.n {
                if xb[i][j] != col[i] {
                    ok_xb = false;
                }
            }
        }
        report.push(
            "realization/local_coord_xb",
            bool_check(ok_xb, "X·B = (Xγ, …, X^Nγ)"),
        );
    }

    // The OPE-Tr-local table and the bracket pairing tables.
    let mut jobs2: Vec<Job<'_>> = Vec::new();
    let alg = chart_algebra(ctx, Chart::UN)?;
    let tx = tr_pow(ctx, GenKind::X, 1);
    let ty = tr_pow(ctx, GenKind::Y, 1);
    let n = ctx.n;
    for i in 0..n {
        let ydual = bracket_dual(ctx, &alg, i);
        let xtop = bracket_top(ctx, &alg, i);
        let brace = brace_psi(ctx, &alg, i);
        let phig = phi_pow_gamma(ctx, GenKind::X, i as u32);
        // Tr(X) rows.
        jobs2.push(ope_against(
            format!("realization/trlocal/TrX_[Y:X^{}]", i),
            tx.clone(),
            ydual.clone(),
            if i == 0 { vec![(1, hbar.clone())] } else { vec![] },
        ));
        for (label, s) in [("XN", &xtop), ("brace", &brace), ("phig", &phig)] {
            jobs2.push(ope_against(
                format!("realization/trlocal/TrX_{}^{}", label, i),
                tx.clone(),
                s.clone(),
                vec![],
            ));
        }
        // Tr(Y) rows.
        jobs2.push(ope_against(
            format!("realization/trlocal/TrY_[Y:X^{}]", i),
            ty.clone(),
            ydual.clone(),
            if i == n - 1 {
                vec![]
            } else {
                vec![(
                    1,
                    bracket_dual(ctx, &alg, i + 1)
                        .mul_hbar_pow(Half::ONE)
                        .scale_rat(&rat_int(-(i as i64 + 1))),
                )]
            },
        ));
        jobs2.push(ope_against(
            format!("realization/trlocal/TrY_[XN:X^{}]", i),
            ty.clone(),
            xtop.clone(),
            if i == n - 1 {
                vec![(1, hbar.scale_rat(&rat_int(n as i64)))]
            } else {
                vec![(
                    1,
                    bracket_top(ctx, &alg, i + 1)
                        .mul_hbar_pow(Half::ONE)
                        .scale_rat(&rat_int(-(i as i64 + 1))),
                )]
            },
        ));
        jobs2.push(ope_against(
            format!("realization/trlocal/TrY_brace^{}", i),
            ty.clone(),
            brace.clone(),
            if i == n - 1 {
                vec![]
            } else {
                vec![(
                    1,
                    brace_psi(ctx, &alg, i + 1)
                        .mul_hbar_pow(Half::ONE)
                        .scale_rat(&rat_int(-(i as i64 + 1))),
                )]
            },
        ));
        jobs2.push(ope_against(
            format!("realization/trlocal/TrY_phig^{}", i),
            ty.clone(),
            phig.clone(),
            if i == 0 {
                vec![]
            } else {
                vec![(
                    1,
                    phi_pow_gamma(ctx, GenKind::X, i as u32 - 1)
                        .mul_hbar_pow(Half::ONE)
                        .scale_rat(&rat_int(i as i64)),
                )]
            },
        ));
        // Lemma: (φX^iγ)(z){ψ:X^jγ}(w) ∼ δ_{ij}ℏ/(z−w).
        for j in 0..n {
            jobs2.push(ope_against(
                format!("realization/pairing/phig{}_brace{}", i, j),
                phig.clone(),
                brace_psi(ctx, &alg, j),
                if i == j { vec![(1, hbar.clone())] } else { vec![] },
            ));
        }
        // Bracket pairing: [Y:X^i] against [X^N:X^j], [Y:X^j], {ψ:X^jγ}, φX^jγ.
        for j in 0..n {
            jobs2.push(ope_against(
                format!("realization/pairing/ydual{}_xtop{}", i, j),
                ydual.clone(),
                bracket_top(ctx, &alg, j),
                if i + j + 1 == n {
                    vec![(1, hbar.clone())]
                } else if i + j + 1 < n {
                    vec![(
                        1,
                        bracket_top(ctx, &alg, i + j + 1)
                            .mul_hbar_pow(Half::ONE)
                            .neg(),
                    )]
                } else {
                    vec![]
                },
            ));
            jobs2.push(ope_against(
                format!("realization/pairing/ydual{}_ydual{}", i, j),
                ydual.clone(),
                bracket_dual(ctx, &alg, j),
                vec![],
            ));
            jobs2.push(ope_against(
                format!("realization/pairing/ydual{}_brace{}", i, j),
                ydual.clone(),
                brace_psi(ctx, &alg, j),
                if i + j + 1 < n {
                    vec![(
                        1,
                        brace_psi(ctx, &alg, i + j + 1)
                            .mul_hbar_pow(Half::ONE)
                            .neg(),
                    )]
                } else {
                    vec![]
                },
            ));
            jobs2.push(ope_against(
                format!("realization/pairing/ydual{}_phig{}", i, j),
                ydual.clone(),
                phi_pow_gamma(ctx, GenKind::X, j as u32),
                if i < j {
                    vec![(
                        1,
                        phi_pow_gamma(ctx, GenKind::X, (j - i - 1) as u32)
                            .mul_hbar_pow(Half::ONE),
                    )]
                } else {
                    vec![]
                },
            ));
        }
    }
    report.run_all(jobs2);
    Ok(report)
}

/// The N = 2 ℙ¹ transition identities: b^∞ = x₍₋₁₎b⁰, c^∞ = (1/x)₍₋₁₎c⁰
/// modulo ℏ⁴, the two expressions for J⁰, and the η-transition including its
/// −(3/2)ℏ∂x term (with the ξ-reading of the display; the bracketing that
/// holds is recorded).
pub fn verify_p1_transition(ctx: &BrstContext) -> Result<RunReport> {
    if ctx.n != 2 {
        return Err(Error::UnsupportedN(ctx.n, "the ℙ¹ transition needs N = 2".into()));
    }
    let mut report = RunReport::new(2, "verify p1 --N 2");
    let alg0 = chart_algebra(ctx, Chart::UZero)?;
    let alg_inf = chart_algebra(ctx, Chart::UInfinity)?;

    // U_0 sections.
    let x = bracket_dual(ctx, &alg0, 1); // [Y : X]_0
    let tx = tr_pow(ctx, GenKind::X, 1);
    let ty = tr_pow(ctx, GenKind::Y, 1);
    let xi = tr_pow(ctx, GenKind::X, 2)
        .neg()
        .add(&tx.mul(&tx).scale_rat(&rat(1, 2)));
    let b0 = btilde(ctx, 1);
    let c0 = ctilde(ctx, &alg0, 1);
    // U_∞ sections.
    let y = bracket_dual(ctx, &alg_inf, 1); // [X : Y]_∞
    let eta = tr_pow(ctx, GenKind::Y, 2).sub(&ty.mul(&ty).scale_rat(&rat(1, 2)));
    let binf = phi_pow_gamma(ctx, GenKind::Y, 1).sub(
        &ty.mul(&phi_pow_gamma(ctx, GenKind::Y, 0))
            .scale_rat(&rat(1, 2)),
    );
    let cinf = brace_psi(ctx, &alg_inf, 1);

    // Classical transition ȳ = 1/x̄ at the symbol level.
    report.push(
        "p1/symbol_inverse",
        eq_check(&y, &x.invert_symbol()?),
    );

    // b^∞ = x₍₋₁₎b⁰, exact.
    report.push(
        "p1/binf_transition",
        eq_check(&nth_product(&x, -1, &b0)?, &binf),
    );

    // c^∞ = (1/x)₍₋₁₎c⁰ modulo ℏ⁴.
    {
        let inv = no_inverse(&x, 4)?;
        let lhs = nth_product_trunc(&inv, -1, &c0, Half::from_int(4))?;
        let rhs = cinf.truncate_hbar(Half::from_int(4));
        report.push("p1/cinf_transition_mod_hbar4", eq_check(&lhs, &rhs));
    }

    // Both eq.(2) expressions reproduce J⁰ exactly.
    let j0 = build_section(ctx, SectionName::JZero)?.value;
    let b0c0 = nth_product(&b0, -1, &c0)?;
    let lhs1 = nth_product(&x, -1, &xi)?.scale_rat(&rat_int(-2)).add(&b0c0);
    report.push("p1/j0_u0_chart", eq_check(&lhs1, &j0));
    let binfcinf = nth_product(&binf, -1, &cinf)?;
    let lhs2 = nth_product(&y, -1, &eta)?
        .scale_rat(&rat_int(2))
        .sub(&binfcinf);
    report.push("p1/j0_uinf_chart", eq_check(&lhs2, &j0));
    report.push("p1/bc_products_agree", eq_check(&binfcinf, &b0c0));

    // η-transition: η = −(x²ξ-combination) + x₍₋₁₎(b⁰₍₋₁₎c⁰) − (3/2)ℏ∂x,
    // deciding among the bracketings of the display.
    {
        let dx = x.translate();
        let xb0c0 = nth_product(&x, -1, &b0c0)?;
        let xb0_c0 = nth_product(&nth_product(&x, -1, &b0)?, -1, &c0)?;
        let mut holds: Vec<&str> = Vec::new();
        let xxi = nth_product(&x, -1, &xi)?;
        let cand = [
            ("x_(-1)(x_(-1)xi), x_(-1)(b0_(-1)c0)", nth_product(&x, -1, &xxi)?, &xb0c0),
            (
                "(x_(-1)x)_(-1)xi, x_(-1)(b0_(-1)c0)",
                nth_product(&nth_product(&x, -1, &x)?, -1, &xi)?,
                &xb0c0,
            ),
            ("x_(-1)(x_(-1)xi), (x_(-1)b0)_(-1)c0", nth_product(&x, -1, &xxi)?, &xb0_c0),
            (
                "(x_(-1)x)_(-1)xi, (x_(-1)b0)_(-1)c0",
                nth_product(&nth_product(&x, -1, &x)?, -1, &xi)?,
                &xb0_c0,
            ),
        ];
        for (label, xxxi, bc) in &cand {
            let lhs = eta
                .add(xxxi)
                .sub(bc)
                .add(&dx.mul_hbar_pow(Half::ONE).scale_rat(&rat(3, 2)));
            if lhs.is_zero() {
                holds.push(label);
            }
        }
        let status = if holds.is_empty() {
            CheckStatus::Fail {
                lhs: "no bracketing of the η-transition display holds".into(),
                rhs: "η + x²ξ-combination − x·b⁰c⁰-combination + (3/2)ℏ∂x = 0".into(),
            }
        } else {
            CheckStatus::PassModD {
                witness: format!("bracketing: {}", holds.join(" | ")),
            }
        };
        report.push("p1/eta_transition", status);
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_degenerate_bracket() {
        // B = (γ₁), so [Y:X⁰] = (Yγ)₁/γ₁ = y₁₁.
        let ctx = BrstContext::with_charts(1).unwrap();
        let alg = chart_algebra(&ctx, Chart::UN).unwrap();
        let v = bracket_dual(&ctx, &alg, 0);
        assert_eq!(v, ctx.var(GenKind::Y, 1, 1, 1));
    }

    #[test]
    fn b_adjugate_n2() {
        let ctx = BrstContext::with_charts(2).unwrap();
        let b = b_matrix(&ctx, GenKind::X);
        let adj = sym_adjugate(&b);
        let det = sym_det(&b);
        let prod = mat_mul(&b, &adj);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { det.clone() } else { ctx.zero() };
                assert_eq!(prod[i][j], expect);
            }
        }
    }

    #[test]
    fn btilde_ctilde_n2_match_p1_sections() {
        // b̃₁ = φXγ − ½Tr(X)φγ = b⁰ and c̃₁ = {ψ:Xγ} = c⁰ at N = 2.
        let ctx = BrstContext::with_charts(2).unwrap();
        let alg = chart_algebra(&ctx, Chart::UZero).unwrap();
        let b1 = btilde(&ctx, 1);
        let tx = tr_pow(&ctx, GenKind::X, 1);
        let expect = phi_pow_gamma(&ctx, GenKind::X, 1).sub(
            &tx.mul(&phi_pow_gamma(&ctx, GenKind::X, 0))
                .scale_rat(&rat(1, 2)),
        );
        assert_eq!(b1, expect);
        let c1 = ctilde(&ctx, &alg, 1);
        assert_eq!(c1, brace_psi(&ctx, &alg, 1));
    }

    #[test]
    fn lemma_ten_n2() {
        let ctx = BrstContext::with_charts(2).unwrap();
        let alg = chart_algebra(&ctx, Chart::UN).unwrap();
        for i in 0..2u32 {
            for j in 0..2usize {
                let r = ope(&phi_pow_gamma(&ctx, GenKind::X, i), &brace_psi(&ctx, &alg, j)).unwrap();
                if i as usize == j {
                    assert_eq!(r.max_pole(), 1);
                    assert_eq!(r.pole(1).unwrap(), &ctx.hbar(Half::ONE));
                } else {
                    assert!(r.is_trivial(), "i={} j={}: {}", i, j, r);
                }
            }
        }
    }

    #[test]
    fn betagambc_suite_n2() {
        let ctx = BrstContext::with_charts(2).unwrap();
        let r = verify_betagambc(&ctx).unwrap();
        assert!(r.all_passed(), "{}", r.to_text());
    }

    #[test]
    fn p1_suite() {
        let ctx = BrstContext::with_charts(2).unwrap();
        let r = verify_p1_transition(&ctx).unwrap();
        assert!(r.all_passed(), "{}", r.to_text());
    }
}
