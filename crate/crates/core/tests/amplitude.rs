use gapcorr::amplitude::{solve_with_weights, ConvolutionWeights};
use gapcorr::{solve_amplitude, EmitterParams, KernelMode, ReservoirParams, SolverConfig};
use num_complex::Complex64;

#[test]
fn markovian_mode_decays_at_the_natural_rate() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(1.0, &r).unwrap();
    let cfg = SolverConfig { dt: 0.005, t_max: 20.0, kernel_mode: KernelMode::Markovian, ..Default::default() };
    let traj = solve_amplitude(&r, &e, &cfg).unwrap();
    // the implicit trapezoid applied to ḃ = −(iω₀ + Γ/2) b is the Cayley map
    let z = Complex64::new(0.1, 1.0) * cfg.dt;
    let step = (1.0 - z / 2.0) / (1.0 + z / 2.0);
    for (n, (t, b)) in traj.t.iter().zip(&traj.b).enumerate() {
        assert!((b - step.powi(n as i32)).norm() < 1e-10, "t = {t}");
        assert!((b.norm_sqr() - (-0.2 * t).exp()).abs() < 1e-5);
    }
    for g in traj.gamma_rate.iter().flatten() {
        assert!((g - 0.1).abs() < 1e-12);
    }
}

#[test]
fn constant_kernel_has_closed_form() {
    // f ≡ c: b'' + iω₀ b' + c b = 0 with b(0) = 1, b'(0) = −iω₀
    let (c, w0) = (0.05, 0.3);
    let dt = 2e-3;
    let steps = 10_000;
    let weights = ConvolutionWeights::from_fn(|_| Complex64::new(c, 0.0), dt, steps);
    let traj = solve_with_weights(&weights, w0).unwrap();
    let i = Complex64::i();
    let disc = Complex64::new(-(w0 * w0) - 4.0 * c, 0.0).sqrt();
    let (r1, r2) = ((-i * w0 + disc) / 2.0, (-i * w0 - disc) / 2.0);
    // b = A e^{r1 t} + B e^{r2 t}, A + B = 1, A r1 + B r2 = −iω₀
    let a = (-i * w0 - r2) / (r1 - r2);
    let b = 1.0 - a;
    for (t, got) in traj.t.iter().zip(&traj.b) {
        let want = a * (r1 * t).exp() + b * (r2 * t).exp();
        assert!((got - want).norm() < 1e-5, "t = {t}");
    }
}

#[test]
fn trapped_population_stays_bounded() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(0.1, &r).unwrap();
    let traj = solve_amplitude(&r, &e, &SolverConfig::default()).unwrap();
    assert!(traj.b.iter().all(|b| b.norm() <= 1.0 + 1e-10));
    let tail: Vec<f64> = traj.population().into_iter().skip(4000).collect();
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lo > 0.6, "{lo}");
}

#[test]
fn band_edge_kernel_mode_runs_and_decays() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(10.0, &r).unwrap();
    let cfg = SolverConfig { t_max: 20.0, kernel_mode: KernelMode::BandEdge, ..Default::default() };
    let traj = solve_amplitude(&r, &e, &cfg).unwrap();
    assert!(traj.population().last().unwrap() < &1.0);
}

#[test]
fn convergence_check_reports_a_small_deviation() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(0.1, &r).unwrap();
    let cfg = SolverConfig { t_max: 10.0, convergence_check: true, ..Default::default() };
    let traj = solve_amplitude(&r, &e, &cfg).unwrap();
    let dev = traj.convergence_deviation.unwrap();
    assert!(dev > 0.0 && dev < 1e-4, "{dev}");
}

#[test]
fn rates_reconstruct_the_population() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(2.0, &r).unwrap();
    let cfg = SolverConfig { t_max: 30.0, ..Default::default() };
    let traj = solve_amplitude(&r, &e, &cfg).unwrap();
    for (p, b) in traj.population_from_rates().iter().zip(&traj.b) {
        if let Some(p) = p {
            assert!((p - b.norm_sqr()).abs() < 1e-4, "{p} vs {}", b.norm_sqr());
        }
    }
}

#[test]
fn invalid_solver_settings_are_rejected() {
    let r = ReservoirParams::default();
    let e = EmitterParams::new(0.1, &r).unwrap();
    for cfg in [
        SolverConfig { dt: 0.0, ..Default::default() },
        SolverConfig { dt: -0.1, ..Default::default() },
        SolverConfig { t_max: 0.001, ..Default::default() },
    ] {
        assert!(solve_amplitude(&r, &e, &cfg).unwrap_err().is_config_error());
    }
}
