use std::time::Instant;

use cavlab::combstate::{build_quadratic_form, ground_state, uniform_pump_for_margin};
use cavlab::microcavity::MicrocavityParams;
use cavlab::phasematch::PumpComb;
use cavlab::witness::{full_scan, ZERO_VISIBILITY};

fn scan(n: usize) -> Vec<cavlab::WitnessReport64> {
    let p = MicrocavityParams::resonant_default();
    let template = PumpComb::uniform(n, 0.015, 0.004, 1e-6, 1.0).unwrap();
    let amp = uniform_pump_for_margin(&p, &template, 0.5).unwrap();
    let comb = PumpComb::uniform(n, 0.015, 0.004, 1e-6, amp).unwrap();
    let qf = build_quadratic_form(&p, &comb).unwrap();
    let gs = ground_state(&qf).unwrap();
    full_scan(&qf, &gs).unwrap()
}

#[test]
fn census_and_sign_structure() {
    for (n, count) in [(2usize, 52usize), (3, 877)] {
        let start = Instant::now();
        let reports = scan(n);
        assert!(start.elapsed().as_secs_f64() < 10.0);
        assert_eq!(reports.len(), count);
        let zero: Vec<_> = reports.iter().filter(|r| r.visibility.abs() <= ZERO_VISIBILITY).collect();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].partition.k(), 1);
        for r in &reports {
            assert!(r.visibility >= -ZERO_VISIBILITY);
            if r.partition.k() >= 2 {
                assert!(r.visibility > 0.0, "{:?}", r.partition);
            }
        }
    }
}
