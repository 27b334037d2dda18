//! Prefix counts from explicit enumeration against the structure exponent.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::oracle::{brute_structure, brute_trees, DEFAULT_CAP};
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::explicit(vec![rat(1, 2), rat(1, 3), rat(1, 4)]);
    let fam = derive_family(&seq, 2, &GrowthPolicy::trivial(), T0Variant::SuffixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    let lang = brute_trees(&fam, fam.last_level(), DEFAULT_CAP).unwrap();
    let counts = brute_structure(&lang);
    let mut agree = true;
    for (l, c) in counts.iter().enumerate() {
        let e = ef.exponent_u64(l as u64).unwrap();
        let want = 1u64 << u32::try_from(&e).unwrap();
        agree &= *c == want;
        println!("l = {l:>2}: {c:>4} prefixes, 2^e(l) = {want}");
    }
    println!("agree: {agree}");
}
