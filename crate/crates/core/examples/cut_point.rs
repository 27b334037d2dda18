//! Cut points of gale tables: exact when the ratios are powers of the
//! alphabet size, a narrow bracket otherwise.

use std::collections::BTreeMap;

use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::gales::{cut_point, gale_from_martingale, prefix_domain, supergale_check, vf_value, GaleTable};
use treedim::power::Scaled;
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::{T0Variant, Word};

fn main() {
    let seq = QSequence::explicit(vec![rat(1, 2), rat(1, 3)]);
    let fam = derive_family(&seq, 1, &GrowthPolicy::trivial(), T0Variant::SuffixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    let dom = prefix_domain(&fam, 6).unwrap();
    let g = gale_from_martingale(|w| vf_value(&ef, w), &rat(1, 2), 2, &dom).unwrap();
    println!("1/2-gale: cut point {}", cut_point(&g, 32).unwrap());
    println!("supergale violations: {}", supergale_check(&g).unwrap().violations.len());

    // root 1, children 1 and 2: log_2 3
    let mut values = BTreeMap::new();
    values.insert(Word::empty(), Scaled::rational(rat(1, 1)));
    values.insert(Word(vec![0]), Scaled::rational(rat(1, 1)));
    values.insert(Word(vec![1]), Scaled::rational(rat(2, 1)));
    let t = GaleTable::new(None, 2, values).unwrap();
    println!("log_2 3 bracket: {}", cut_point(&t, 20).unwrap());
}
