//! Where the periodic window sits in the default fixed-component sweep.
//!
//! With the scaling-law state family the period-doubling cascade ends just
//! below 0.3 r_ref, so a sweep that starts at 0.3 r_ref sees only chaotic
//! verdicts. The default sweep therefore starts at 0.2 r_ref.

use memchua::analysis::{sweep, ClassifyConfig, LyapunovConfig, SweepConfig, SweepMode, TrajectoryLabel};
use memchua::integrate::IntegrationConfig;
use memchua::{DesignSpec, StateTable, StateVector};

fn cfg(lo: f64, hi: f64, n: usize) -> SweepConfig {
    let r_ref = StateTable::scaling_law().states()[0].r_prog;
    SweepConfig {
        r_min: lo * r_ref,
        r_max: hi * r_ref,
        n_points: n,
        mode: SweepMode::Fixed,
        reference_r_prog: None,
        spec: DesignSpec::default(),
        init: StateVector::new(0.1, 0.0, 0.0),
        integration: IntegrationConfig::default(),
        lyapunov: Some(LyapunovConfig::default()),
        classify: ClassifyConfig::default(),
        sigma: 0.0,
        seed: 0,
    }
}

#[test]
fn range_starting_at_three_tenths_has_no_periodic_point() {
    let pts = sweep(&StateTable::scaling_law(), &cfg(0.3, 1.5, 32)).unwrap();
    for p in &pts {
        assert!(
            matches!(p.class.label, TrajectoryLabel::SingleScroll | TrajectoryLabel::DoubleScroll),
            "r = {:.0}: {}",
            p.r_prog,
            p.class.label
        );
    }
    assert_eq!(pts[0].class.label, TrajectoryLabel::SingleScroll);
    assert_eq!(pts[31].class.label, TrajectoryLabel::DoubleScroll);
}

#[test]
fn chaos_onset_lies_between_028_and_030() {
    let pts = sweep(&StateTable::scaling_law(), &cfg(0.28, 0.30, 2)).unwrap();
    assert_eq!(pts[0].class.label, TrajectoryLabel::Periodic, "{:?}", pts[0].class);
    assert_eq!(pts[1].class.label, TrajectoryLabel::SingleScroll, "{:?}", pts[1].class);
}
