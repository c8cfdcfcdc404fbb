use ringflux_core::dynamics::evolve_sampled;
use ringflux_core::experiments::{
    execute, execute_to_dir, preset, run_evolve, run_lz_scan, run_spectrum, run_transparency,
    Artifact, Command, InitialSpec, LzScanSettings, PotentialSpec, RunConfig, TransparencySettings,
    WindowSpec,
};
use ringflux_core::model::{free_energy, FluxProgram, ModeWindow, RingPotential};
use ringflux_core::{Error, PropagatorConfig};

fn short(mut cfg: RunConfig, span: f64, samples: usize) -> RunConfig {
    cfg.tau_span = Some([0.0, span]);
    cfg.samples = samples;
    cfg
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = short(preset("fig3b").unwrap(), 400.0, 40);
    let (m1, a) = execute(Command::Evolve, &cfg).unwrap();
    let (_, b) = execute(Command::Evolve, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        m1.artifacts,
        vec!["trajectory.csv", "wavefunction.csv", "norms.csv"]
    );

    let dir = tempfile::tempdir().unwrap();
    execute_to_dir(Command::Evolve, &cfg, dir.path()).unwrap();
    let on_disk = std::fs::read(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(on_disk, a[0].1);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evolve");
    assert!(manifest["metrics"]["max_norm_drift"].is_number());
}

#[test]
fn csv_headers_follow_the_documented_schemas() {
    let cfg = short(preset("fig2b").unwrap(), 50.0, 5);
    let (_, files) = execute(Command::Evolve, &cfg).unwrap();
    let header = |name: &str| {
        let bytes = &files.iter().find(|(n, _)| n == name).unwrap().1;
        String::from_utf8(bytes.clone())
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(header("trajectory.csv"), "tau,n,re_c,im_c,abs2");
    assert_eq!(header("wavefunction.csv"), "tau,phi,re_psi,im_psi,abs2");
    assert_eq!(header("norms.csv"), "tau,norm,mean_winding");
}

#[test]
fn outputs_filter_artifacts() {
    let mut cfg = short(preset("fig2a").unwrap(), 50.0, 5);
    cfg.outputs = vec![Artifact::Norms];
    let (_, files) = execute(Command::Evolve, &cfg).unwrap();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].0, "norms.csv");
}

#[test]
fn gaussian_start_is_normalized() {
    let cfg = RunConfig {
        initial: Some(InitialSpec::Gaussian {
            center: -4.0,
            width: 9.0,
        }),
        ..short(preset("fig2b").unwrap(), 10.0, 3)
    };
    let run = run_evolve(&cfg).unwrap();
    assert!((run.trajectory.norms[0] - 1.0).abs() < 1e-14);
}

#[test]
fn hermitian_drift_follows_the_ramp_sign() {
    let up = run_evolve(&short(preset("fig2b").unwrap(), 800.0, 20)).unwrap();
    let down = run_evolve(&short(preset("fig2a").unwrap(), 800.0, 20)).unwrap();
    let (a, b) = (
        *up.trajectory.mean_winding.last().unwrap(),
        *down.trajectory.mean_winding.last().unwrap(),
    );
    assert!(a > 1.5 && b < -1.5, "{a} {b}");
    assert!((a + b).abs() < 1e-6);
    for n in up.trajectory.norms.iter().chain(&down.trajectory.norms) {
        assert!((n - 1.0).abs() < 1e-7);
    }
}

#[test]
fn non_hermitian_norms_split_with_ramp_sign() {
    let damped = run_evolve(&short(preset("fig3a").unwrap(), 800.0, 20)).unwrap();
    let amplified = run_evolve(&short(preset("fig3b").unwrap(), 800.0, 20)).unwrap();
    assert!(*damped.trajectory.norms.last().unwrap() < 0.9);
    assert!(*amplified.trajectory.norms.last().unwrap() > 1.1);
}

#[test]
fn narrow_window_reports_boundary_error() {
    let mut cfg = short(preset("fig2b").unwrap(), 1000.0, 10);
    cfg.window = WindowSpec::Fixed(ModeWindow::new(-2, 2).unwrap());
    let err = run_evolve(&cfg).unwrap_err();
    assert!(err.is_numerical());
    assert!(err.to_string().contains("widen the mode window"));
}

#[test]
fn zero_potential_bands_are_parabolas() {
    let cfg = RunConfig {
        potential: Some(PotentialSpec::Coeffs { coeffs: vec![] }),
        window: WindowSpec::Fixed(ModeWindow::new(-6, 6).unwrap()),
        ..RunConfig::default()
    };
    let run = run_spectrum(&cfg).unwrap();
    for (k, f) in run.bands.f_grid.iter().enumerate() {
        let mut free: Vec<f64> = run.window.modes().map(|n| free_energy(n, *f)).collect();
        free.sort_by(f64::total_cmp);
        let mut got: Vec<f64> = run.bands.bands.iter().map(|b| b[k].re).collect();
        got.sort_by(f64::total_cmp);
        for (x, y) in got.iter().zip(&free) {
            assert!((x - y).abs() < 1e-10);
        }
    }
    assert_eq!(run.bands.max_im, 0.0);
}

#[test]
fn pt_preset_reports_half_integer_points() {
    let run = run_spectrum(&preset("spectrum-pt").unwrap()).unwrap();
    for target in [0.5, 1.5] {
        assert!(
            run.eps.iter().any(|e| (e.f_star - target).abs() < 1e-3),
            "{target}"
        );
    }
    assert!(run.levels.is_none());
}

#[test]
fn hermitian_preset_has_no_exceptional_points() {
    let run = run_spectrum(&preset("spectrum-hermitian").unwrap()).unwrap();
    assert!(run.eps.is_empty());
    assert!(run.bands.max_im < 1e-9);
}

#[test]
fn level_diagram_files_for_ramped_spectrum() {
    let mut cfg = preset("fig1b").unwrap();
    cfg.samples = 20;
    let (manifest, files) = execute(Command::Spectrum, &cfg).unwrap();
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "bands.csv",
            "exceptional_points.csv",
            "diabatic.csv",
            "adiabatic.csv"
        ]
    );
    assert!(manifest.metrics["max_im"] < 1e-9);
    let diabatic = String::from_utf8(files[2].1.clone()).unwrap();
    assert_eq!(diabatic.lines().next().unwrap(), "tau,f,n,E");
    assert_eq!(diabatic.lines().count(), 1 + 20 * 33);
}

#[test]
fn transparency_rejects_rising_flux() {
    let mut cfg = preset("fig5").unwrap();
    cfg.flux = Some(FluxProgram::Ramp {
        sigma: 0.003,
        tau0: 0.0,
    });
    let err = run_transparency(&cfg).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
    assert!(err.to_string().contains("sigma < 0"));
}

#[test]
fn transparency_free_branch_matches_free_propagation() {
    let cfg = RunConfig {
        potential: Some(PotentialSpec::Reference {
            v0: 0.02,
            alpha: 1.0,
        }),
        flux: Some(FluxProgram::Ramp {
            sigma: -0.01,
            tau0: 0.0,
        }),
        initial: Some(InitialSpec::Gaussian {
            center: 0.0,
            width: 2.0,
        }),
        tau_span: Some([0.0, 400.0]),
        samples: 41,
        transparency: Some(TransparencySettings {
            m_cutoff: -4,
            t_target: 150.0,
        }),
        ..RunConfig::default()
    };
    let run = run_transparency(&cfg).unwrap();
    assert!((run.plan.t_onset - 150.0).abs() < 1e-9);
    let k_on = run.full.times.iter().position(|&t| t == 150.0).unwrap();
    let after: Vec<f64> = run.full.times[k_on..].to_vec();
    let tight = PropagatorConfig {
        rtol: 1e-12,
        atol: 1e-15,
        boundary_guard: 0.5,
        ..PropagatorConfig::default()
    };
    let start = &run.full.states[k_on];
    let numeric = evolve_sampled(
        &RingPotential::zero(),
        run.flux,
        start.window,
        start,
        &after,
        &tight,
    )
    .unwrap();
    for (a, b) in numeric.states.iter().zip(&run.free.states[k_on..]) {
        for (x, y) in a.amps.iter().zip(&b.amps) {
            assert!((x - y).norm() < 1e-8);
        }
    }
}

#[test]
fn doubling_the_target_shifts_only_tau0() {
    let mut a = preset("fig5").unwrap();
    a.outputs = vec![Artifact::Overlap];
    let mut b = a.clone();
    b.transparency.as_mut().unwrap().t_target = 2400.0;
    b.tau_span = Some([0.0, 3000.0]);
    let a = run_transparency(&short(a, 1300.0, 14)).unwrap();
    let b = run_transparency(&b).unwrap();
    assert!((b.plan.tau0 - a.plan.tau0 - 1200.0).abs() < 1e-9);
}

#[test]
fn lz_scan_rows() {
    let cfg = RunConfig {
        lz_scan: Some(LzScanSettings {
            sigmas: vec![0.003, 0.01],
            v0s: vec![0.0, 0.08],
            alpha: 0.3,
            n: 2,
        }),
        ..RunConfig::default()
    };
    let run = run_lz_scan(&cfg).unwrap();
    assert_eq!(run.rows.len(), 4);
    for r in &run.rows {
        assert_eq!(r.n, 2);
        assert!((r.s_eff - r.v0 * (1.0f64 - 0.09).sqrt()).abs() < 1e-15);
        if r.v0 == 0.0 {
            assert_eq!((r.p_zener, r.p_numeric), (0.0, 0.0));
        } else {
            assert!((r.p_numeric - r.p_zener).abs() <= 0.02 * r.p_zener, "{r:?}");
        }
    }
    let (_, files) = execute(Command::LzScan, &cfg).unwrap();
    let text = String::from_utf8(files[0].1.clone()).unwrap();
    assert!(text.starts_with("n,tau_n,p_zener,"));
}

#[test]
fn config_errors_are_config_errors() {
    assert!(matches!(
        RunConfig::from_json("{ not json"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        RunConfig::from_json(r#"{"window": "wide"}"#),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        RunConfig::from_json(r#"{"bogus": 1}"#),
        Err(Error::Config(_))
    ));
    let empty = RunConfig::default();
    assert!(matches!(run_evolve(&empty), Err(Error::Config(_))));
    assert!(matches!(run_lz_scan(&empty), Err(Error::Config(_))));
    assert_eq!("auto".parse::<WindowSpec>().unwrap(), WindowSpec::Auto);
    assert_eq!(
        "-3:5".parse::<WindowSpec>().unwrap(),
        WindowSpec::Fixed(ModeWindow::new(-3, 5).unwrap())
    );
    assert!("3".parse::<WindowSpec>().is_err());
}

#[test]
fn json_config_round_trip() {
    let text = r#"{
        "potential": {"kind": "reference", "v0": 0.08, "alpha": 0.3},
        "flux": {"kind": "ramp", "sigma": 0.003, "tau0": 0.0},
        "window": {"n_min": -5, "n_max": 12},
        "initial": {"kind": "delta", "n0": 0},
        "tau_span": [0.0, 100.0],
        "propagator": {"rtol": 1e-10}
    }"#;
    let cfg = RunConfig::from_json(text).unwrap();
    assert_eq!(cfg.propagator.rtol, 1e-10);
    assert_eq!(cfg.propagator.atol, PropagatorConfig::default().atol);
    assert_eq!(cfg.samples, 400);
    assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}
