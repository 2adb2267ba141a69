use hilbva::brst::*;
use hilbva::charts::*;
use hilbva::ope::*;
use hilbva::scalar::Half;

fn main() {
    let ctx = BrstContext::with_charts(2).unwrap();
    let alg = chart_algebra(&ctx, Chart::UN).unwrap();
    let x = bracket_dual(&ctx, &alg, 1);
    let t = std::time::Instant::now();
    let inv0 = x.symbol_part().invert_symbol().unwrap();
    eprintln!("invert_symbol: {:?} -> num {} terms, den {:?}", t.elapsed(), inv0.num().num_terms(), inv0.den());
    for cap in 2..=4i64 {
        let t = std::time::Instant::now();
        let p = nth_product_trunc(&x, -1, &inv0, Half::from_int(cap)).unwrap();
        eprintln!("x_(-1)inv0 cap {}: {:?} ({} terms, den {:?})", cap, t.elapsed(), p.num().num_terms(), p.den());
    }
    for k in 2..=4i64 {
        let t = std::time::Instant::now();
        let g = no_inverse(&x, k).unwrap();
        eprintln!("no_inverse(x,{}): {:?} ({} terms, den {:?})", k, t.elapsed(), g.num().num_terms(), g.den());
    }
}
