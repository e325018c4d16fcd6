//! Property-based invariants of projections, separators and iteration maps.

mod support;

use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn circumcenter_is_equidistant_and_in_the_affine_hull(t in triple_strategy()) {
        check_circumcenter(t)?;
    }

    #[test]
    fn projectors_are_firmly_nonexpansive(p in pair_strategy()) {
        check_firm_nonexpansive(p)?;
    }

    #[test]
    fn separators_contain_the_set_and_exclude_the_query(p in point_strategy()) {
        check_separator(p)?;
    }

    #[test]
    fn iterates_are_fejer_monotone_and_stay_in_u(i in instance_strategy()) {
        check_fejer(i)?;
    }

    #[test]
    fn exact_separator_reduces_to_exact_methods(i in instance_strategy()) {
        check_exact_reduction(i)?;
    }

    #[test]
    fn results_csv_round_trips(rows in prop::collection::vec(row_strategy(), 0..20)) {
        check_csv_round_trip(rows)?;
    }
}
