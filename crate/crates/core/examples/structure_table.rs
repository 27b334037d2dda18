//! The structure exponent e(l) and density e(l)/l as a CSV table.

use num_bigint::BigUint;
use treedim::derivation::{derive_family, GrowthPolicy};
use treedim::rat::rat;
use treedim::sequences::QSequence;
use treedim::structure::{write_table_csv, ExponentFn};
use treedim::treefam::T0Variant;

fn main() {
    let seq = QSequence::explicit(vec![rat(1, 2), rat(1, 3), rat(2, 5)]);
    let fam = derive_family(&seq, 2, &GrowthPolicy::trivial(), T0Variant::SuffixPad, 2).unwrap();
    let ef = ExponentFn::new(&fam);
    let rows = ef.table(&BigUint::from(24u32)).unwrap();
    write_table_csv(&rows, std::io::stdout()).unwrap();
    println!("e(120) = {}", ef.exponent_u64(120).unwrap());
}
