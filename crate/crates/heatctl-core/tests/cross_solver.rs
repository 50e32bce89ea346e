//! Cross-validation between the spectral and Crank-Nicolson backends, and
//! maximum-principle behaviour on randomized runs.

use heatctl_core::field::{project_to_sine, GridFunction};
use heatctl_core::obstruction::random_reaction_windows;
use heatctl_core::solver::{
    evolve_boundary, evolve_free, evolve_multiplicative, maximum_principle_report, CnOptions,
    MpContext, ReactionWindow,
};
use heatctl_core::Interval;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

fn mixed_state(n: usize) -> GridFunction {
    GridFunction::from_fn(n, |x| {
        (PI * x).sin() + 0.4 * (2.0 * PI * x).sin() - 0.15 * (5.0 * PI * x).sin()
    })
}

#[test]
fn cn_matches_spectral_free_decay() {
    let n = 513;
    let t_final = 0.1;
    let y0 = mixed_state(n);
    let cn = CnOptions { dt: 1e-4, ..CnOptions::default() };
    let traj = evolve_multiplicative(&y0, &[], t_final, &cn).unwrap();
    let spectral = evolve_free(&project_to_sine(&y0, 64).unwrap(), t_final).unwrap().evaluate(n);
    let err = traj.final_grid.l2_distance(&spectral);
    assert!(err <= 1e-4, "free-decay cross error {err}");
}

#[test]
fn cn_matches_spectral_constant_reaction() {
    // v ≡ -m on (0,1): modes decay at π²k² + m
    let n = 513;
    let t_final = 0.1;
    let m = 7.5;
    let y0 = mixed_state(n);
    let w = ReactionWindow::uniform(0.0, t_final, -m, Interval::new(0.0, 1.0).unwrap()).unwrap();
    let cn = CnOptions { dt: 1e-4, ..CnOptions::default() };
    let traj = evolve_multiplicative(&y0, &[w], t_final, &cn).unwrap();
    let series = project_to_sine(&y0, 64).unwrap();
    let exact = evolve_free(&series, t_final).unwrap().scaled((-m * t_final).exp()).evaluate(n);
    let err = traj.final_grid.l2_distance(&exact);
    assert!(err <= 1e-4, "constant-reaction cross error {err}");
}

#[test]
fn random_bilinear_runs_respect_weak_principles() {
    let n = 257;
    let t_final = 0.05;
    let y0 = GridFunction::from_fn(n, |x| (PI * x).sin());
    let omega = Interval::new(0.1, 0.5).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(7_777);
    for trial in 0..6 {
        let windows = random_reaction_windows(&mut rng, t_final, &omega, n, 4, 5, 40.0).unwrap();
        // force nonpositive coefficients so MP-ii applies
        let windows: Vec<ReactionWindow> = windows
            .into_iter()
            .map(|w| match w.coefficient {
                heatctl_core::solver::ReactionCoefficient::Profile(g) => {
                    let clipped: Vec<f64> = g.values().iter().map(|v| v.min(0.0)).collect();
                    ReactionWindow::with_profile(
                        w.t_start,
                        w.t_end,
                        GridFunction::new(clipped).unwrap(),
                        w.support,
                    )
                    .unwrap()
                }
                _ => w,
            })
            .collect();
        let cn = CnOptions { dt: 1e-4, ..CnOptions::default() };
        let traj = evolve_multiplicative(&y0, &windows, t_final, &cn).unwrap();
        let ctx = MpContext {
            y0_nonneg: true,
            y0_nonzero: true,
            source_nonneg: true,
            source_absent: true,
            reaction_nonpositive: true,
            sup_data: 1.0,
        };
        let report = maximum_principle_report(&traj, &ctx);
        assert_eq!(report.weak_lower_ok, Some(true), "trial {trial}: min {}", report.min_value);
        assert_eq!(report.weak_upper_ok, Some(true), "trial {trial}: max {}", report.max_value);
    }
}

#[test]
fn transposition_energy_bounded_for_random_signals() {
    use heatctl_core::obstruction::random_boundary_signal;
    let mut rng = ChaCha12Rng::seed_from_u64(2_024);
    for _ in 0..10 {
        let signal = random_boundary_signal(&mut rng, 0.8, 8, 2.0).unwrap();
        let ev = evolve_boundary(&signal, 0.8, 128).unwrap();
        assert!(ev.coeff_energy <= ev.energy_bound + 1e-12);
    }
}
