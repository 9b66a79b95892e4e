use proptest::prelude::*;

use hermsurg::chaincx::{homology_profile, trim, ChainComplex};
use hermsurg::exactalg::{Matrix, RingSpec};
use hermsurg::formcore::{hyperbolic, signature, FormParameter, UnimodularForm};
use hermsurg::json::{matrix_from_json, matrix_to_json, parse, to_string};

fn rows(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-9i64..=9, c), r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_json_round_trip(entries in rows(4), n in prop::sample::select(vec![0u64, 2, 5, 6])) {
        let ring = if n == 0 { RingSpec::Integers } else { RingSpec::zmod(n).unwrap() };
        let m = Matrix::from_rows(ring, &entries);
        let text = to_string(&matrix_to_json(&m).unwrap());
        prop_assert_eq!(matrix_from_json(&parse(&text).unwrap()).unwrap(), m);
    }

    #[test]
    fn signature_counts_signs(signs in prop::collection::vec(prop::bool::ANY, 0..6), h in 0usize..3) {
        let p = FormParameter::symmetric(RingSpec::Integers);
        let diag: Vec<i64> = signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
        let f = UnimodularForm::diagonal(p.clone(), &diag).unwrap();
        let g = f.orthogonal_sum(&hyperbolic(&p, h)).unwrap();
        let expected = diag.iter().sum::<i64>();
        prop_assert_eq!(signature(&g).unwrap(), expected);
        prop_assert_eq!(signature(&g.negate()).unwrap(), -expected);
    }

    #[test]
    fn trim_of_two_term_complex(entries in rows(3), prime in prop::sample::select(vec![0u64, 3, 5])) {
        let ring = if prime == 0 { RingSpec::Integers } else { RingSpec::zmod(prime).unwrap() };
        let c = ChainComplex::two_term(1, &Matrix::from_rows(ring, &entries));
        let t = trim(&c).unwrap();
        prop_assert!(t.equivalence.verify().is_ok());
        prop_assert_eq!(homology_profile(&t.complex).unwrap(), homology_profile(&c).unwrap());
        prop_assert!(t.complex.total_rank() <= c.total_rank());
    }
}
