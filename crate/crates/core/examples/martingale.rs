//! The counting martingale and its fairness identity on a small family.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::gales::{martingale_defect, vf_value};
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::{T0Variant, Word};

fn main() {
    let seq = QSequence::explicit(vec![rat(1, 3), rat(1, 2)]);
    let fam = derive_family(&seq, 1, &GrowthPolicy::trivial(), T0Variant::PrefixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    for s in ["", "0", "1", "00", "001", "0010"] {
        let w = Word::parse(s, 2).unwrap();
        println!("V({s:?}) = {}", vf_value(&ef, &w).unwrap());
    }
    let depth = fam.ell_last().try_into().map(|d: usize| d - 1).unwrap();
    let bad = martingale_defect(&ef, depth).unwrap();
    println!("fairness violations up to length {depth}: {}", bad.len());
}
