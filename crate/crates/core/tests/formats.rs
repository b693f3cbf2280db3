//! Round-trips of the two text formats: the polynomial grammar and the
//! line-oriented derivation documents. Printing followed by parsing must
//! reproduce the value bit-exactly.

mod common;

use proptest::prelude::*;

use hsleaps_core::hsd::{parse_hsd, print_hsd};
use hsleaps_core::poly::Poly;

const PRIMES: [u64; 3] = [2, 3, 5];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn polynomial_text_round_trips(
        seed in any::<u64>(),
        prime in 0usize..3,
        nvars in 1usize..=3,
        max_deg in 0u32..=6,
        terms in 0usize..=6,
    ) {
        let p = PRIMES[prime];
        let mut rng = common::rng(seed);
        let f = common::random_poly(&mut rng, p, nvars, max_deg, terms);
        let names = common::var_names(nvars);
        let text = f.to_text(&names);
        let back = Poly::parse(&text, p, &names).expect("printed polynomial reparses");
        prop_assert_eq!(back, f);
    }

    #[test]
    fn derivation_document_round_trips(
        seed in any::<u64>(),
        prime in 0usize..3,
        nvars in 1usize..=2,
        length in 1usize..=6,
    ) {
        let p = PRIMES[prime];
        let mut rng = common::rng(seed);
        let d = common::random_hsderiv(&mut rng, p, nvars, length, 3);
        let names = common::var_names(nvars);
        let text = print_hsd(&d, &names);
        let doc = parse_hsd(&text).expect("printed document reparses");
        prop_assert_eq!(doc.names(), names.as_slice());
        prop_assert_eq!(doc.derivation(), &d);
    }
}
