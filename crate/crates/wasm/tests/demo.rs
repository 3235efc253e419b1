use timerep_wasm::demo;

#[test]
fn appendix_columns_agree() {
    let rows = demo::appendix_rows(1.0, 10.0, 41).unwrap();
    assert_eq!(rows.len(), 4 * 41);
    for r in rows.chunks(4) {
        assert!((r[2] / r[1] - 1.0).abs() < 1e-6, "t={}", r[0]);
    }
    assert_eq!(rows[3], 0.0);
}

#[test]
fn interference_stays_within_the_envelope_band() {
    let rows = demo::interference_rows(0.2, 7.0, 20.0, 60.0, 601).unwrap();
    for r in rows.chunks(3) {
        let rel = r[1] / r[2] - 1.0;
        assert!(rel.abs() <= 0.2 + 1e-12);
    }
}

#[test]
fn sampled_fit_recovers_the_truth() {
    let f = demo::sample_and_fit(0.2, 7.0, 20.0, 200_000, 11, 0.5, 100.0).unwrap();
    assert_eq!(f.counts.len(), 200);
    assert_eq!(f.expected.len(), 200);
    assert!((f.period - 7.0).abs() < 5.0 * f.period_err + 1e-9, "{} ± {}", f.period, f.period_err);
    assert!((f.a - 0.2).abs() < 5.0 * f.a_err);
}

#[test]
fn bad_inputs_are_reported() {
    assert!(demo::appendix_rows(-1.0, 1.0, 10).is_err());
    assert!(demo::interference_rows(0.2, 7.0, -1.0, 10.0, 10).is_err());
}
