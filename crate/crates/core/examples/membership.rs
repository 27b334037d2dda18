//! Prefix membership and successor sets, checked against an explicit
//! enumeration of the last level.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::gales::all_words_up_to;
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::explicit(vec![rat(1, 2), rat(1, 3)]);
    let fam = derive_family(&seq, 1, &GrowthPolicy::trivial(), T0Variant::SuffixPad, 2).unwrap();
    let last = fam.enumerate_level(1, 1_000).unwrap();
    println!("T_1 has {} words:", last.len());
    for w in &last {
        println!("  {}", w.render(2));
    }
    for w in all_words_up_to(2, 3) {
        if fam.member_pref(&w).unwrap() {
            let succ = fam.successors(&w).unwrap();
            println!("{:>4} -> {:?}", w.render(2), succ);
        }
    }
}
