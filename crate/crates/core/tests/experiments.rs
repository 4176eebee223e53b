//! Experiment drivers on small hosts.

use rieszlab::experiments::*;
use rieszlab::*;

fn quick_estimator() -> EstimatorOptions {
    EstimatorOptions {
        restarts: 8,
        ..EstimatorOptions::default()
    }
}

#[test]
fn cylinder_lemma_at_two_is_trivial() {
    let cfg = CylinderLemmaConfig {
        p: 2.0,
        axis_steps: 8,
        estimator: quick_estimator(),
        ..CylinderLemmaConfig::default()
    };
    let r = exp_cylinder_lemma(&build_cycle(8, 8.0).unwrap(), &cfg, 1).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    for v in r.column("value") {
        assert!((v - 1.0).abs() < 1e-6);
    }
    assert!(r.artifacts.iter().any(|(n, _)| n.contains("witness")));
}

#[test]
fn cylinder_lemma_guard_is_inconclusive() {
    let cfg = CylinderLemmaConfig {
        axis_steps: 3,
        ..CylinderLemmaConfig::default()
    };
    let r = exp_cylinder_lemma(&build_cycle(8, 8.0).unwrap(), &cfg, 1).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn cylinder_lemma_c16_p4() {
    let cfg = CylinderLemmaConfig {
        p: 4.0,
        axis_steps: 16,
        ..CylinderLemmaConfig::default()
    };
    let r = exp_cylinder_lemma(&build_cycle(16, 16.0).unwrap(), &cfg, 3).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.summary);
}

#[test]
fn rescaling_first_entry_is_base_restricted_norm() {
    let base = build_cycle(8, 8.0).unwrap();
    let cfg = RescalingConfig {
        axis_steps: 32,
        profile_width: 4.0,
        lambdas: vec![1.0, 0.5, 0.25],
        final_tol: 1.0,
        ..RescalingConfig::default()
    };
    let f = base_profile(&base).unwrap();
    let rho = axis_profile(cfg.axis_steps, cfg.spacing, cfg.profile_width, cfg.p).unwrap();
    let r = exp_rescaling(&base, &f, &rho, &cfg).unwrap();

    let cyl = build_cylinder(&base, cfg.axis_steps, cfg.spacing, cfg.boundary).unwrap();
    let field = cyl.tensor(f.values(), &rho).unwrap();
    let d = decompose(cyl.graph()).unwrap();
    let direct = riesz_transform(cyl.graph(), &d, &field, &Restriction::tag("base")).unwrap();
    let want = lp_norm(cyl.graph().mu(), &direct, cfg.p).unwrap();
    assert!((r.column("value")[0] - want).abs() < 1e-10 * want);

    // ‖f⊗ρ‖_p = ‖f‖_p at every λ
    let fp = lp_norm(base.mu(), &f, cfg.p).unwrap();
    for n in r.column("input_norm") {
        assert!((n - fp).abs() < 1e-12 * fp);
    }
}

#[test]
fn rescaling_rejects_bad_inputs() {
    let base = build_cycle(8, 8.0).unwrap();
    let cfg = RescalingConfig {
        axis_steps: 16,
        ..RescalingConfig::default()
    };
    let rho = axis_profile(16, 1.0, 4.0, cfg.p).unwrap();
    let not_mean_zero = ScalarField::new(vec![1.0; 8]);
    assert!(exp_rescaling(&base, &not_mean_zero, &rho, &cfg).is_err());
    let f = base_profile(&base).unwrap();
    let half: Vec<f64> = rho.iter().map(|x| x / 2.0).collect();
    assert!(exp_rescaling(&base, &f, &half, &cfg).is_err());
    let increasing = RescalingConfig {
        lambdas: vec![0.5, 1.0],
        ..cfg
    };
    assert!(exp_rescaling(&base, &f, &rho, &increasing).is_err());
}

fn small_spec() -> GluedSpec {
    GluedSpec {
        pieces: vec![ManifoldSpec::unit_cycle(8)],
        piece_axis_steps: 24,
        backbone: ManifoldSpec::Torus { d: 1, n: 8, side: 8.0 },
        backbone_axis_steps: 24,
        ..GluedSpec::default()
    }
}

#[test]
fn localization_without_surgery_is_exact() {
    let backbone = build_cylinder(&build_cycle(8, 8.0).unwrap(), 24, 1.0, AxisBoundary::Periodic).unwrap();
    let g = glue(Vec::new(), backbone, &[], GlueOptions::default()).unwrap();
    let cfg = LocalizationConfig {
        use_backbone: true,
        s_grid: vec![0, 3, 6],
        ..LocalizationConfig::default()
    };
    let h = localization_source(&g, &cfg).unwrap();
    let r = exp_localization(&g, &h, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    for gap in r.column("gap") {
        assert!(gap < 1e-12, "{gap}");
    }
}

#[test]
fn localization_on_small_glued_host() {
    let g = small_spec().build().unwrap();
    let cfg = LocalizationConfig {
        s_grid: vec![0, 2, 4, 6],
        ..LocalizationConfig::default()
    };
    let h = localization_source(&g, &cfg).unwrap();
    let r = exp_localization(&g, &h, &cfg).unwrap();
    let gaps = r.column("gap");
    assert!(gaps[0] < 0.05, "s=0 is already close: {}", gaps[0]);
    assert!(gaps.last().unwrap() < &gaps[0]);
    for n in r.column("pushforward_norm") {
        assert!((n - 1.0).abs() < 1e-12);
    }
}

#[test]
fn localization_truncates_grid_at_glue_band() {
    let g = small_spec().build().unwrap();
    let cfg = LocalizationConfig {
        s_grid: vec![0, 4, 8, 12, 16, 20],
        ..LocalizationConfig::default()
    };
    let h = localization_source(&g, &cfg).unwrap();
    let r = exp_localization(&g, &h, &cfg).unwrap();
    assert!(r.rows.len() < 6);
    assert!(r.notes.iter().any(|n| n.contains("truncated")));
}

#[test]
fn heat_far_from_glue_with_tiny_sigma() {
    let g = small_spec().build().unwrap();
    let cfg = HeatConfig {
        sigma: 0.01,
        bump_offset: 8,
        bump_radius: 2,
        s_grid: vec![0, 1],
        probes: vec![[0, 0], [3, 1]],
        samples: 2_000,
        ..HeatConfig::default()
    };
    let f = heat_source(&g, &cfg).unwrap();
    let r = exp_heat_convergence(&g, &f, &cfg, 5).unwrap();
    let sup = f.max_abs();
    for d in r.column("abs_diff") {
        assert!(d <= 1e-6 * sup, "{d}");
    }
}

#[test]
fn heat_on_small_glued_host_passes() {
    let g = small_spec().build().unwrap();
    let cfg = HeatConfig {
        s_grid: vec![0, 2, 4, 6],
        probes: vec![[0, 0], [4, -2], [6, 2]],
        samples: 20_000,
        ..HeatConfig::default()
    };
    let f = heat_source(&g, &cfg).unwrap();
    let r = exp_heat_convergence(&g, &f, &cfg, 5).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.summary);
}

#[test]
fn heat_rejects_nonpositive_sigma() {
    let g = small_spec().build().unwrap();
    let cfg = HeatConfig {
        sigma: 0.0,
        ..HeatConfig::default()
    };
    let f = heat_source(&g, &HeatConfig::default()).unwrap();
    assert!(exp_heat_convergence(&g, &f, &cfg, 1).is_err());
}

#[test]
fn sigma_bounds_crossover_at_one() {
    let c = build_cylinder(&build_cycle(8, 8.0).unwrap(), 16, 1.0, AxisBoundary::Periodic).unwrap();
    let (h, g) = sigma_default_fields(&c).unwrap();
    let r = exp_sigma_bounds(&c, &h, &g, &SigmaBoundsConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let sigmas = r.column("sigma");
    for (s, row) in sigmas.iter().zip(&r.rows) {
        let tighter = match &row[6] {
            Cell::Text(t) => t.clone(),
            other => panic!("{other:?}"),
        };
        assert_eq!(tighter == "contraction", *s <= 1.0, "σ={s}");
    }
    assert!(r.column("ratio_contraction").iter().all(|x| *x <= 1.0));
    assert!(r.column("ratio_energy").iter().all(|x| *x <= (-1.0f64).exp()));
}

#[test]
fn dichotomy_at_two_is_trivial() {
    let bases: Vec<_> = [6, 8].iter().map(|&n| build_cycle(n, n as f64).unwrap()).collect();
    let cfg = DichotomyConfig {
        p: 2.0,
        piece_axis_steps: 12,
        backbone_axis_steps: 12,
        estimator: quick_estimator(),
        ..DichotomyConfig::default()
    };
    let r = exp_dichotomy(&bases, &cfg, 2).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    for v in r.column("value") {
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}

#[test]
fn dichotomy_estimate_dominates_transported_witnesses() {
    let bases = vec![build_cycle(8, 8.0).unwrap()];
    let cfg = DichotomyConfig {
        piece_axis_steps: 12,
        backbone_axis_steps: 12,
        estimator: quick_estimator(),
        ..DichotomyConfig::default()
    };
    let r = exp_dichotomy(&bases, &cfg, 4).unwrap();
    let values = r.column("value");
    let transported = r.column("transported_start");
    let glued = *values.last().unwrap();
    for t in transported {
        assert!(t <= glued + 1e-12);
    }
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.summary);
}

#[test]
fn dichotomy_rejects_mixed_dimensions() {
    let bases = vec![build_cycle(8, 8.0).unwrap(), build_torus(2, 4, 4.0).unwrap()];
    assert!(exp_dichotomy(&bases, &DichotomyConfig::default(), 1).is_err());
}

#[test]
fn reports_are_reproducible() {
    let base = build_cycle(8, 8.0).unwrap();
    let cfg = CylinderLemmaConfig {
        axis_steps: 8,
        estimator: quick_estimator(),
        ..CylinderLemmaConfig::default()
    };
    let a = exp_cylinder_lemma(&base, &cfg, 9).unwrap();
    let b = exp_cylinder_lemma(&base, &cfg, 9).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.params_csv(), b.params_csv());
    assert_eq!(a.verdict_line(), b.verdict_line());
    assert_eq!(a.verdict_line().lines().count(), 1);
}

#[test]
fn report_files() {
    let dir = std::env::temp_dir().join(format!("rieszlab-report-{}", std::process::id()));
    let c = build_cylinder(&build_cycle(4, 4.0).unwrap(), 8, 1.0, AxisBoundary::Periodic).unwrap();
    let (h, g) = sigma_default_fields(&c).unwrap();
    let r = exp_sigma_bounds(&c, &h, &g, &SigmaBoundsConfig::default()).unwrap();
    let files = r.write(&dir).unwrap();
    assert!(files.iter().any(|f| f.ends_with("sigma-bounds.csv")));
    let verdict = std::fs::read_to_string(dir.join("sigma-bounds.verdict")).unwrap();
    assert!(verdict.starts_with("sigma-bounds pass"));
    let csv = std::fs::read_to_string(dir.join("sigma-bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    std::fs::remove_dir_all(&dir).unwrap();
}
