mod common;

#[test]
fn single_vehicle_matches_point_mass_pendulum() {
    let gap = common::max_gap(5.0, 1e-3);
    assert!(gap <= 1e-8, "gap {gap:e}");
}

#[test]
fn gap_shrinks_with_step() {
    let coarse = common::max_gap(1.0, 4e-3);
    let fine = common::max_gap(1.0, 2e-3);
    assert!(fine < coarse || fine < 1e-12, "{coarse:e} -> {fine:e}");
}
