use axielastic::selftest::{run_selftest, SelftestOptions};

#[test]
fn forced_near_pairs_meet_tolerance() {
    let opts = SelftestOptions { pairs_per_geometry: 0, m_max: 12, kappas: vec![1.0, 3.0], ..Default::default() };
    let r = run_selftest(&opts).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.geometries.iter().all(|g| g.near_pairs == 2 && g.near_max <= 1e-8));
}

#[test]
fn mode_zero_run_on_every_geometry() {
    let opts = SelftestOptions { m_max: 0, pairs_per_geometry: 10, ..Default::default() };
    let r = run_selftest(&opts).unwrap();
    assert!(r.passed, "{r:?}");
    assert_eq!(r.geometries.len(), 4);
}

#[test]
fn unknown_geometry_is_an_error() {
    let opts = SelftestOptions { geometries: vec!["cube".into()], ..Default::default() };
    assert!(run_selftest(&opts).is_err());
}
