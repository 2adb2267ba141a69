use hilbva::brst::*;
use hilbva::n4::*;

fn main() {
    for n in [2usize, 3] {
        let ctx = BrstContext::new(n).unwrap();
        for (name, r) in [
            ("affine", verify_affine_and_doublets(&ctx).unwrap()),
            ("structure", verify_n4_structure(&ctx).unwrap()),
            ("conformal", verify_conformal_and_splitting(&ctx).unwrap()),
        ] {
            let t = std::time::Instant::now();
            println!("N={} {}: passed={} failed={} ({:?})", n, name, r.passed, r.failed, t.elapsed());
            for c in &r.checks {
                if !c.status.is_pass() {
                    println!("  FAILING: {}", c.id);
                }
            }
        }
    }
}
