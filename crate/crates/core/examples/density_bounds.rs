//! Per-level density certificates and the dimension estimate.

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::rat::{format_rat, rat};
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::alternating(rat(1, 2), rat(1, 1), 3).unwrap();
    let fam = derive_family(&seq, 5, &GrowthPolicy::default(), T0Variant::SuffixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    for i in 0..fam.last_level() {
        let cert = ef.check_bounds(i).unwrap();
        println!(
            "level {i}: {} segments, exhaustive = {}, holds = {}",
            cert.segments.len(),
            cert.exhaustive,
            cert.holds()
        );
    }
    let est = ef.dim_estimate(fam.ell_last()).unwrap();
    println!("empirical min density: {}", format_rat(&est.empirical_min_density));
    println!("certified lower bound: {}", format_rat(&est.certified_lower));
}
