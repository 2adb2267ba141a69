use hilbva::brst::*;
use hilbva::n4::*;
use hilbva::ope::{nth_product, ope};
use hilbva::scalar::{rat, rat_int, Half};
use hilbva::system::GenKind;

fn display_tn4(ctx: &BrstContext) -> hilbva::symbol::SymbolElement {
    let n = ctx.n as i64;
    let x = ctx.matrix(GenKind::X, 1);
    let y = ctx.matrix(GenKind::Y, 1);
    let xy = mat_mul(&x, &y);
    let yx = mat_mul(&y, &x);
    let phiv = ctx.vector(GenKind::Phi, 1);
    let psiv = ctx.vector(GenKind::Psi, 1);
    let betav = ctx.vector(GenKind::Beta, 1);
    let gammav = ctx.vector(GenKind::Gamma, 1);
    let pair = |a: GenKind, b: GenKind| {
        let av = ctx.vector(a, 1);
        let bv = ctx.vector(b, 1);
        let mut acc = ctx.zero();
        for i in 0..ctx.n { acc = acc.add(&av[i].mul(&bv[i])); }
        acc
    };
    let mut d = sandwich(&phiv, &xy, &psiv).sub(&sandwich(&betav, &yx, &gammav));
    d = d.add(&pair(GenKind::Beta, GenKind::Gamma).mul(&pair(GenKind::Phi, GenKind::Psi)));
    d = d.sub(&pair(GenKind::Phi, GenKind::Gamma).mul(&pair(GenKind::Beta, GenKind::Psi)).scale_rat(&rat(1, n)));
    let dx = ctx.matrix(GenKind::X, 2);
    let dy = ctx.matrix(GenKind::Y, 2);
    let mut conf = mat_trace(&mat_mul(&dx, &y)).sub(&mat_trace(&mat_mul(&x, &dy)));
    conf = conf.sub(&mat_trace(&dx).mul(&tr_pow(ctx, GenKind::Y, 1)).scale_rat(&rat(1, n)));
    conf = conf.add(&tr_pow(ctx, GenKind::X, 1).mul(&mat_trace(&dy)).scale_rat(&rat(1, n)));
    d = d.add(&conf.mul_hbar_pow(Half::ONE).scale_rat(&rat(1, 2)));
    let mut bdg = ctx.zero();
    let mut dfp = ctx.zero();
    for i in 1..=ctx.n {
        bdg = bdg.add(&ctx.var(GenKind::Beta, i, 0, 1).mul(&ctx.var(GenKind::Gamma, i, 0, 2)));
        dfp = dfp.add(&ctx.var(GenKind::Phi, i, 0, 2).mul(&ctx.var(GenKind::Psi, i, 0, 1)));
    }
    d.add(&bdg.sub(&dfp).mul_hbar_pow(Half::ONE).scale_rat(&(rat_int(n) - rat(1, n))))
}

fn main() {
    for n in [2usize, 3] {
        let ctx = BrstContext::new(n).unwrap();
        let nn = n as i64;
        let t = build_section(&ctx, SectionName::T).unwrap().value;
        let tbg = build_section(&ctx, SectionName::TBg).unwrap().value;
        let tsf = build_section(&ctx, SectionName::TSf).unwrap().value;
        let w4 = build_section(&ctx, SectionName::W4).unwrap().value;
        let b = display_tn4(&ctx);

        // engine representative
        let gp = build_section(&ctx, SectionName::GPlus).unwrap().value;
        let gtm = build_section(&ctx, SectionName::GtMinus).unwrap().value;
        let j0 = build_section(&ctx, SectionName::JZero).unwrap().value;
        let a = nth_product(&gp, 0, &gtm).unwrap().try_div_hbar_pow(Half::ONE).unwrap()
            .sub(&j0.translate().mul_hbar_pow(Half::ONE).scale_rat(&rat(1, 2)));

        let dw4 = differential(&ctx, &w4).unwrap().scale_rat(&rat(1, 2));
        println!("N={}: eq4 with display-TN4 exact: {}", n, t.sub(&b.add(&tbg).add(&tsf)) == dw4);
        println!("N={}: eq4 with engine-TN4 exact:  {}", n, t.sub(&a.add(&tbg).add(&tsf)) == dw4);
        for (name, v) in [("display", &b), ("engine", &a)] {
            let r = ope(v, v).unwrap();
            let c4 = r.pole(4).map(|s| s.to_string()).unwrap_or("-".into());
            let p2_ok = r.pole(2) == Some(&v.mul_hbar_pow(Half::from_int(2)).scale_rat(&rat_int(2)));
            let p1_ok = r.pole(1) == Some(&v.translate().mul_hbar_pow(Half::from_int(2)));
            let p3 = r.pole(3).is_none();
            println!("N={} {}-TN4 self-OPE: pole4={} pole3-absent={} pole2exact={} pole1exact={}",
                n, name, c4, p3, p2_ok, p1_ok);
        }
    }
}
