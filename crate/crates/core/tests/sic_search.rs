use std::time::Instant;

use urgl_core::sic::{find_sic_fiducial, frame_potential_minimum, sic_reference, verify_sic, SearchOptions, SearchOutcome};

#[test]
fn search_succeeds_up_to_eight() {
    for d in 2..=8 {
        let start = Instant::now();
        let outcome = find_sic_fiducial(d, 7, &SearchOptions::default()).unwrap();
        let SearchOutcome::Found(s) = outcome else {
            panic!("d = {d}: {outcome:?}");
        };
        println!(
            "d = {d}: residual {:.2e}, restart {}, iterations {}, {:.2?}",
            s.residual,
            s.restart,
            s.iterations,
            start.elapsed()
        );
        assert!(s.residual <= 1e-10);
        assert!(s.report.passed);
        assert!((s.objective - frame_potential_minimum(d)).abs() < 1e-9);
        let povm = sic_reference(&s.fiducial).unwrap();
        assert!(verify_sic(povm.effects(), 1e-9).unwrap().passed);
    }
}

#[test]
fn search_is_reproducible() {
    let opts = SearchOptions::default();
    let a = find_sic_fiducial(4, 11, &opts).unwrap();
    let b = find_sic_fiducial(4, 11, &opts).unwrap();
    assert_eq!(a, b);
}
