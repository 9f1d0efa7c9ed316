mod common;

use axielastic::geometry::{build_mesh, make_builtin_curve};
use common::jump_limit_errors;

fn assert_first_order(e: &[f64]) {
    for w in e.windows(2) {
        assert!(w[1] < w[0], "{e:?}");
        let ratio = w[0] / w[1];
        assert!(ratio > 5.0 && ratio < 20.0, "{e:?}");
    }
}

#[test]
fn limits_converge_on_the_ellipsoid() {
    let mesh = build_mesh(&make_builtin_curve("ellipsoid").unwrap(), 6, 16, 0).unwrap();
    let n = mesh.n_points();
    let e = jump_limit_errors(&mesh, 1, 1.0, 2.0, &[1e-2, 1e-3, 1e-4], &[n / 3, 2 * n / 3], 3);
    assert_first_order(&e);
}

#[test]
fn limits_converge_at_higher_mode_and_frequency() {
    let mesh = build_mesh(&make_builtin_curve("sphere").unwrap(), 6, 16, 0).unwrap();
    let n = mesh.n_points();
    let e = jump_limit_errors(&mesh, 4, 3.0, 5.0, &[1e-2, 1e-3, 1e-4], &[n / 2], 5);
    assert_first_order(&e);
}
