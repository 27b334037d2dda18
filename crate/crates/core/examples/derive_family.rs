//! Derive the levels of a family from a density sequence and print them.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::rat::{format_rat, rat};
use treedim::sequences::QSequence;
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::alternating(rat(1, 2), rat(1, 1), 3).unwrap();
    let fam = derive_family(&seq, 4, &GrowthPolicy::default(), T0Variant::SuffixPad, 2).unwrap();
    for (i, lv) in fam.levels().iter().enumerate() {
        print!("level {i}: q = {}, k = {}, ell = {}", format_rat(&lv.q()), lv.k, lv.ell);
        if let Some(s) = &lv.step {
            print!(", r = {}, p = {}, kappa = {}, appendix = {}", s.r, s.p, s.kappa, s.appendix);
        }
        println!();
    }
}
