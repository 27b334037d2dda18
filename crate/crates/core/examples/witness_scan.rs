//! Witness exponents across the levels of an oscillating family.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::gales::{witness_exponents, write_witness_csv};
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::alternating(rat(1, 2), rat(1, 1), 3).unwrap();
    let fam = derive_family(&seq, 5, &GrowthPolicy::default(), T0Variant::SuffixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    let recs = witness_exponents(&ef, &rat(1, 2), &rat(4, 5), 0..=5).unwrap();
    write_witness_csv(&recs, std::io::stdout()).unwrap();
    for r in recs.iter().filter(|r| r.scan_flag) {
        println!("level {} flagged, bound holds: {:?}", r.level, r.bound_holds);
    }
}
