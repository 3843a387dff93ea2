use maskshift::demographics::{
    group_ethnicity, infer_party, locate, EthnicityProfile, GeoTable, GroupTable, PartyDirectory,
    PROFILE_COUNT,
};
use proptest::prelude::*;

fn normalized(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn geo() -> GeoTable {
    GeoTable::with_bundled_regions(
        "city,state,zip,county_fips\nRochester,NY,14623,36055\nBoise,ID,83702,16001\n",
        "zip,median_income\n14623,60000\n83702,70000\n",
        "county_fips,state,rucc_code\n36055,NY,1\n16001,ID,5\n",
    )
    .unwrap()
}

fn directory() -> PartyDirectory {
    PartyDirectory::parse(
        "account_id,party\nd1,Democrat\nd2,Democrat\nr1,Republican\nr2,Republican\n",
        "trump\nbiden\n",
    )
    .unwrap()
}

proptest! {
    #[test]
    fn group_is_scale_invariant(
        v in prop::collection::vec(0.001f64..1.0, PROFILE_COUNT),
        scale in 0.01f64..100.0,
    ) {
        let t = GroupTable::bundled();
        let a = group_ethnicity(&normalized(&v), EthnicityProfile::ALL, &t);
        let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
        let b = group_ethnicity(&normalized(&scaled), EthnicityProfile::ALL, &t);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn national_median_only_moves_income(
        loc in prop::sample::select(vec!["Rochester, NY", "Boise, Idaho", "Gotham City, ZZ", "boise,id"]),
        m1 in 1u64..200_000,
        m2 in 1u64..200_000,
    ) {
        let g = geo();
        let a = locate(loc, &g, m1);
        let b = locate(loc, &g, m2);
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(a.region, b.region);
            prop_assert_eq!(a.metro_class, b.metro_class);
        }
        prop_assert_eq!(locate(loc, &g, m1), a);
    }

    #[test]
    fn party_needs_keyword_and_single_side(
        words in prop::collection::vec(prop::sample::select(vec!["trump", "biden", "mask", "vote", "today"]), 0..6),
        follows in prop::collection::vec(prop::sample::select(vec!["d1", "d2", "r1", "r2", "x", "y"]), 0..5),
    ) {
        let d = directory();
        let tweets = vec![words.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        let following: Vec<String> = follows.iter().map(|s| s.to_string()).collect();
        if infer_party(&tweets, &following, &d).is_some() {
            prop_assert!(words.iter().any(|w| *w == "trump" || *w == "biden"));
            let dem = follows.iter().any(|f| f.starts_with('d'));
            let rep = follows.iter().any(|f| f.starts_with('r'));
            prop_assert!(dem != rep);
        }
    }
}
