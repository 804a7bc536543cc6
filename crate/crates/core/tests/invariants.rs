//! Structural properties of the split-operator step on small lattices.

use cpstab::grid::{gaussian_packet, GridSpec, SpatialAxis, WaveField};
use cpstab::physics::{FieldSample, PulseSpec};
use cpstab::propagator::{Propagator, StepParams, SweepOrder};
use cpstab::{Execution, C64};
use proptest::prelude::*;

fn random_state(grid: GridSpec, seed: &[f64]) -> WaveField {
    let mut psi = WaveField::from_fn(grid, |[x, y, z]| {
        let s: f64 = seed
            .iter()
            .enumerate()
            .map(|(n, c)| c * (n as f64 * x + y - z).sin())
            .sum();
        C64::new(s.sin() + 0.1 * x, (2.0 * s).cos() - 0.05 * z)
    })
    .unwrap();
    psi.normalize().unwrap();
    psi
}

fn even() -> impl Strategy<Value = usize> {
    (1usize..=4).prop_map(|h| 2 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_time_steps_are_unitary(
        nx in even(), ny in even(), nz in even(),
        spacing in 0.2f64..1.0,
        dt in 0.001f64..0.5,
        peak in 0.0f64..5.0,
        t in 0.0f64..30.0,
        seed in proptest::collection::vec(-3.0f64..3.0, 5..20),
    ) {
        let grid = GridSpec::new(nx, ny, nz, spacing).unwrap();
        let prop = Propagator::new(&grid).unwrap();
        let mut psi = random_state(grid, &seed);
        let params = StepParams { dt, pulse: Some(PulseSpec::new(peak, 1.2, 6).unwrap()) };
        for s in 0..3 {
            prop.real_time_step(&mut psi, &params, t + s as f64 * dt).unwrap();
        }
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12, "norm {}", psi.norm());
    }

    #[test]
    fn sweep_is_undone_by_reversed_sweep(
        n in even(),
        tau in -0.5f64..0.5,
        ex in -4.0f64..4.0,
        ey in -4.0f64..4.0,
        seed in proptest::collection::vec(-3.0f64..3.0, 5..20),
    ) {
        let grid = GridSpec::cubic(n, 0.5).unwrap();
        let prop = Propagator::new(&grid).unwrap();
        let start = random_state(grid, &seed);
        let field = FieldSample { e_x: ex, e_y: ey };
        for axis in SpatialAxis::ALL {
            let mut psi = start.clone();
            prop.real_time_sweep(&mut psi, axis, tau, field).unwrap();
            prop.real_time_sweep(&mut psi, axis, -tau, field).unwrap();
            prop_assert!(psi.distance(&start).unwrap() < 1e-12);
        }
    }

    #[test]
    fn execution_policy_does_not_change_results(n in even(), dt in 0.005f64..0.1) {
        let grid = GridSpec::cubic(n, 0.4).unwrap();
        let params = StepParams { dt, pulse: Some(PulseSpec::new(3.0, 1.2, 6).unwrap()) };
        let mut a = random_state(grid, &[0.3, 1.7, -2.2]);
        let mut b = a.clone();
        let seq = Propagator::new(&grid).unwrap().with_execution(Execution::Sequential);
        let par = Propagator::new(&grid).unwrap().with_execution(Execution::Parallel);
        for s in 0..4 {
            seq.real_time_step(&mut a, &params, s as f64 * dt).unwrap();
            par.real_time_step(&mut b, &params, s as f64 * dt).unwrap();
        }
        prop_assert_eq!(a, b);
    }
}

/// Two symmetric sweep orders differ by a commutator term, O(dt³) per step.
#[test]
fn sweep_orders_differ_at_third_order() {
    let grid = GridSpec::cubic(24, 0.4).unwrap();
    let start = gaussian_packet(&grid, 1.5).unwrap();
    let x_outer = Propagator::new(&grid).unwrap();
    let z_outer = Propagator::new(&grid)
        .unwrap()
        .with_order(SweepOrder::ZOuter);
    let pulse = PulseSpec::new(3.5, 1.2, 6).unwrap();
    let diff = |dt: f64| {
        let params = StepParams {
            dt,
            pulse: Some(pulse),
        };
        let (mut a, mut b) = (start.clone(), start.clone());
        x_outer.real_time_step(&mut a, &params, 7.0).unwrap();
        z_outer.real_time_step(&mut b, &params, 7.0).unwrap();
        a.distance(&b).unwrap()
    };
    let d: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&dt| diff(dt)).collect();
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((6.0..10.0).contains(&ratio), "ratios {d:?}");
    }
}
