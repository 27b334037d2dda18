use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use treedim::derivation::{derive_family, derive_level, GrowthPolicy};
use treedim::gales::{
    all_words_up_to, cut_point, gale_from_martingale, prefix_domain, supergale_check, vf_value,
    CutPoint, GaleTable,
};
use treedim::power::Scaled;
use treedim::rat::{nat_ratio, rat, Rat};
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::{T0Variant, TreeFamily, Word};

fn q_strategy() -> impl Strategy<Value = Rat> {
    (2i64..=7).prop_flat_map(|d| (1..d).prop_map(move |n| rat(n, d)))
}

fn variant() -> impl Strategy<Value = T0Variant> {
    prop_oneof![Just(T0Variant::SuffixPad), Just(T0Variant::PrefixPad)]
}

/// Two- or three-level families with short last blocks.
fn small_family() -> impl Strategy<Value = TreeFamily> {
    (
        prop::collection::vec(q_strategy(), 2..=3),
        variant(),
        2u32..=3,
    )
        .prop_filter_map("equal terms or long blocks", |(q, v, x)| {
            if q.windows(2).any(|w| w[0] == w[1]) {
                return None;
            }
            let n = q.len() - 1;
            let fam = derive_family(&QSequence::explicit(q), n, &GrowthPolicy::trivial(), v, x)
                .ok()?;
            (fam.ell_last() <= &BigUint::from(40u32)).then_some(fam)
        })
}

fn bounds(c: &CutPoint) -> Option<(Rat, Rat)> {
    match c {
        CutPoint::Exact(v) => Some((v.clone(), v.clone())),
        CutPoint::Bracket { lo, hi } => Some((lo.clone(), hi.clone())),
        CutPoint::UnboundedBelow => None,
    }
}

fn scaled_value() -> impl Strategy<Value = Scaled> {
    (1i64..=5, -4i64..=4).prop_map(|(c, e)| Scaled::new(rat(c, 1), rat(e, 2), 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponent_steps_by_zero_or_one(fam in small_family()) {
        let ef = ExponentFn::new(&fam);
        let top = fam.ell_last().to_u64().unwrap();
        prop_assert_eq!(ef.exponent_u64(0).unwrap(), BigUint::from(0u32));
        for l in 0..top {
            let a = ef.exponent_u64(l).unwrap();
            let b = ef.exponent_u64(l + 1).unwrap();
            prop_assert!(b == a || b == &a + 1u32);
        }
    }

    #[test]
    fn level_sizes_are_powers(fam in small_family()) {
        for (i, lv) in fam.levels().iter().enumerate() {
            let k = lv.k.to_u32().unwrap();
            let want = (fam.alphabet_size() as u64).pow(k);
            if want > 20_000 {
                continue;
            }
            let words = fam.enumerate_level(i, 20_000).unwrap();
            prop_assert_eq!(words.len() as u64, want);
            for w in &words {
                prop_assert!(fam.member_full(i, w).unwrap());
            }
        }
    }

    #[test]
    fn derive_level_identities(
        q in q_strategy(),
        q_next in q_strategy(),
        mult in 1u32..=4,
        scale in 1u32..=3,
    ) {
        prop_assume!(q != q_next);
        let k = q.numer().to_biguint().unwrap() * mult;
        let ell = q.denom().to_biguint().unwrap() * mult;
        let d = derive_level(&q, &q_next, &k, &ell, &BigUint::from(scale)).unwrap();
        prop_assert_eq!(&d.ell_next, &((&d.step.r + &d.step.p) * &ell));
        prop_assert_eq!(&d.k_next, &(&d.step.r * &k + &d.step.kappa * &ell));
        prop_assert_eq!(nat_ratio(&d.k_next, &d.ell_next), q_next);
    }

    #[test]
    fn exact_gale_is_a_supergale_with_cut_point_sigma(
        fam in small_family(),
        sn in 1i64..=4,
    ) {
        prop_assume!(fam.alphabet_size() == 2);
        let sigma = rat(sn, 4);
        let ef = ExponentFn::new(&fam);
        let depth = fam.ell_last().to_usize().unwrap().min(8);
        let dom = prefix_domain(&fam, depth).unwrap();
        let g = gale_from_martingale(|w| vf_value(&ef, w), &sigma, 2, &dom).unwrap();
        let report = supergale_check(&g).unwrap();
        prop_assert!(report.holds());
        prop_assert_eq!(cut_point(&g, 32).unwrap(), CutPoint::Exact(sigma));
    }

    #[test]
    fn cut_point_grows_with_the_table(
        base in prop::collection::vec(scaled_value(), 7),
        extra in prop::collection::vec(scaled_value(), 2),
    ) {
        let words = all_words_up_to(2, 2);
        let values: BTreeMap<Word, Scaled> = words.into_iter().zip(base).collect();
        let small = GaleTable::new(None, 2, values.clone()).unwrap();
        let mut bigger = values;
        bigger.insert(Word(vec![0, 1, 0]), extra[0].clone());
        bigger.insert(Word(vec![0, 1, 1]), extra[1].clone());
        let bigger = GaleTable::new(None, 2, bigger).unwrap();
        let (lo, hi) = bounds(&cut_point(&small, 24).unwrap()).unwrap();
        let (lo2, hi2) = bounds(&cut_point(&bigger, 24).unwrap()).unwrap();
        prop_assert!(lo2 >= lo);
        prop_assert!(hi2 >= hi);
    }

    #[test]
    fn scaled_render_parse_round_trip(c in -20i64..=20, cd in 1i64..=6, e in -12i64..=12, ed in 1i64..=5, base in 2u32..=12) {
        let v = Scaled::new(rat(c, cd), rat(e, ed), base);
        let back = Scaled::parse(&v.render(), base).unwrap();
        prop_assert_eq!(back, v);
    }
}
