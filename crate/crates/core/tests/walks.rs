//! Monte Carlo walks against the spectral semigroup.

mod common;

use common::*;
use rieszlab::experiments::GluedSpec;
use rieszlab::experiments::ManifoldSpec;
use rieszlab::manifold::build_random;
use rieszlab::rng::{op, stream};
use rieszlab::walk::*;
use rieszlab::*;

#[test]
fn two_point_walk_matches_exponential_decay() {
    let p2 = build_path(2, 1.0).unwrap();
    let f = ScalarField::new(vec![1.0, -1.0]);
    for sigma in [0.1, 0.5, 1.5] {
        let (m, se) = mc_heat_at(&p2, &f, sigma, &[0], 100_000, 3).unwrap();
        let want = (-2.0 * sigma).exp();
        assert!((m[0] - want).abs() <= 3.0 * se[0], "σ={sigma}: {} vs {want} ± {}", m[0], se[0]);
    }
}

#[test]
fn mc_heat_matches_spectral_componentwise() {
    let g = build_random(7, 0.3, 21).unwrap();
    let d = decompose(&g).unwrap();
    let f = ScalarField::new(random_field(7, 4));
    let want = heat_semigroup(&d, 0.8, &f).unwrap();
    let (m, se) = mc_heat(&g, &f, 0.8, 40_000, 9).unwrap();
    for v in 0..7 {
        let tol = 3.0 * se.values()[v];
        assert!((m.values()[v] - want.values()[v]).abs() <= tol, "vertex {v}");
    }
}

#[test]
fn stderr_scales_as_inverse_square_root() {
    let c = build_cycle(6, 6.0).unwrap();
    let f = ScalarField::new(random_field(6, 1));
    let (_, a) = mc_heat_at(&c, &f, 1.0, &[2], 10_000, 5).unwrap();
    let (_, b) = mc_heat_at(&c, &f, 1.0, &[2], 40_000, 5).unwrap();
    let ratio = a[0] / b[0];
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn empirical_rates_match_generator() {
    let g = build_random(5, 0.5, 2).unwrap();
    let gen = WalkGenerator::new(&g);
    let path = sample_walk(&gen, 0, 20_000.0, &mut stream(1, op::WALK, 0)).unwrap();
    let mut hold = vec![0.0; g.len()];
    let mut leaves = vec![0.0; g.len()];
    let mut jumps = vec![vec![0.0; g.len()]; g.len()];
    let (mut t, mut v) = (0.0, path.start);
    for &(s, u) in &path.events {
        hold[v] += s - t;
        leaves[v] += 1.0;
        jumps[v][u] += 1.0;
        t = s;
        v = u;
    }
    for v in 0..g.len() {
        let rate = leaves[v] / hold[v];
        let se = leaves[v].sqrt() / hold[v];
        assert!((rate - gen.rate(v)).abs() <= 3.0 * se, "vertex {v}");
        assert!((gen.rate(v) - g.weighted_degree(v) / (2.0 * g.mu()[v])).abs() < 1e-14);
        for u in 0..g.len() {
            let p = gen.jump_probability(v, u);
            let p_hat = jumps[v][u] / leaves[v];
            let se = (p * (1.0 - p) / leaves[v]).sqrt();
            // one check per directed edge, so 4 stderr keeps the family-wise level near 3 stderr
            assert!((p_hat - p).abs() <= 4.0 * se + 1e-12, "{v}->{u}: {p_hat} vs {p} ± {se}, n={}", leaves[v]);
        }
    }
}

fn small_glued() -> GluedManifold {
    GluedSpec {
        pieces: vec![ManifoldSpec::unit_cycle(6)],
        piece_axis_steps: 16,
        backbone: ManifoldSpec::Torus { d: 1, n: 8, side: 8.0 },
        backbone_axis_steps: 16,
        ..GluedSpec::default()
    }
    .build()
    .unwrap()
}

#[test]
fn exit_probability_limits_and_monotonicity() {
    let g = small_glued();
    let (cyl, _) = g.component(Component::Piece(0)).unwrap();
    let rule = StoppingRule::glue_band(&g, Component::Piece(0)).unwrap();
    let mid = cyl.axis_steps() / 2;
    let far = cyl.vertex(0, (mid + 5) % cyl.axis_steps());
    let (p0, _) = exit_probability(cyl.graph(), far, &rule, 1e-9, 5_000, 1).unwrap();
    assert_eq!(p0, 0.0);
    let mut prev = 0.0;
    for h in [0.5, 2.0, 8.0] {
        let (p, _) = exit_probability(cyl.graph(), far, &rule, h, 20_000, 1).unwrap();
        assert!(p >= prev, "horizon {h}");
        prev = p;
    }
    assert!(prev > 0.0);
    let inside = cyl.vertex(0, mid);
    assert!(exit_probability(cyl.graph(), inside, &rule, 1.0, 10, 1).is_err());
}

#[test]
fn exit_probability_is_translation_invariant() {
    let cyl = build_cylinder(&build_cycle(5, 5.0).unwrap(), 12, 1.0, AxisBoundary::Periodic).unwrap();
    let band = |lo: usize| -> Vec<usize> { (0..5).map(|x| cyl.vertex(x, lo % 12)).collect() };
    let a = StoppingRule::new(cyl.graph(), &band(0), "level 0").unwrap();
    let b = StoppingRule::new(cyl.graph(), &band(3), "level 3").unwrap();
    let (pa, ea) = exit_probability(cyl.graph(), cyl.vertex(2, 4), &a, 3.0, 50_000, 7).unwrap();
    let (pb, eb) = exit_probability(cyl.graph(), cyl.vertex(2, 7), &b, 3.0, 50_000, 8).unwrap();
    assert!((pa - pb).abs() <= 3.0 * (ea * ea + eb * eb).sqrt(), "{pa} vs {pb}");
}

#[test]
fn exit_probability_decreases_with_distance_from_region() {
    let cyl = build_cylinder(&build_cycle(4, 4.0).unwrap(), 24, 1.0, AxisBoundary::Reflecting).unwrap();
    let low: Vec<usize> = (0..4).map(|x| cyl.vertex(x, 0)).collect();
    let rule = StoppingRule::new(cyl.graph(), &low, "bottom level").unwrap();
    let ps: Vec<f64> = [2, 4, 6, 8]
        .iter()
        .map(|&t| exit_probability(cyl.graph(), cyl.vertex(1, t), &rule, 4.0, 20_000, 2).unwrap().0)
        .collect();
    assert!(ps.windows(2).all(|w| w[1] <= w[0]), "{ps:?}");
}

#[test]
fn coupled_walk_without_stopping_is_the_mapped_piece_walk() {
    let g = small_glued();
    let (cyl, emb) = g.component(Component::Piece(0)).unwrap();
    let start = cyl.vertex(1, (cyl.axis_steps() / 2 + 6) % cyl.axis_steps());
    let gen = WalkGenerator::new(cyl.graph());
    let mut seen = 0;
    for i in 0..200 {
        let c = coupled_walk(&g, 0, start, 1.0, &mut stream(4, op::COUPLED, i)).unwrap();
        if c.stopping_time.is_none() {
            let p = sample_walk(&gen, start, 1.0, &mut stream(4, op::COUPLED, i)).unwrap();
            let mapped: Vec<(f64, usize)> = p.events.iter().map(|&(t, v)| (t, emb.get(v).unwrap())).collect();
            assert_eq!(c.path.events, mapped);
            assert_eq!(c.path.start, emb.get(start).unwrap());
            seen += 1;
        }
    }
    assert!(seen > 100);
}

#[test]
fn coupled_walks_reproduce_ambient_semigroup() {
    let g = small_glued();
    let coupling = Coupling::new(&g, 0).unwrap();
    let (cyl, emb) = g.component(Component::Piece(0)).unwrap();
    let d = decompose(g.ambient()).unwrap();
    let f = ScalarField::new(random_field(g.ambient().len(), 12));
    let sigma = 1.0;
    let want = heat_semigroup(&d, sigma, &f).unwrap();
    let mid = cyl.axis_steps() / 2;
    for dt in [2usize, 3] {
        let start = cyl.vertex(0, mid + dt);
        let (m, se, p, pe) = coupled_heat(&coupling, &f, start, sigma, 40_000, 3).unwrap();
        let a = want.values()[emb.get(start).unwrap()];
        assert!((m - a).abs() <= 3.0 * se, "start level +{dt}: {m} vs {a} ± {se}");
        let (q, qe) = exit_probability(cyl.graph(), start, coupling.stopping_rule(), 2.0 * sigma, 40_000, 77).unwrap();
        assert!((p - q).abs() <= 3.0 * (pe * pe + qe * qe).sqrt(), "{p} vs {q}");
        assert!(p > 0.0);
    }
}

#[test]
fn coupled_walk_rejects_start_outside_domain() {
    let g = small_glued();
    let (cyl, _) = g.component(Component::Piece(0)).unwrap();
    let glue_vertex = g.records()[0].removed_piece_vertex;
    assert!(coupled_walk(&g, 0, glue_vertex, 1.0, &mut stream(0, op::COUPLED, 0)).is_err());
    assert!(coupled_walk(&g, 0, cyl.len(), 1.0, &mut stream(0, op::COUPLED, 0)).is_err());
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let c = build_cycle(9, 9.0).unwrap();
    let f = ScalarField::new(random_field(9, 2));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_heat(&c, &f, 0.7, 5_000, 13).unwrap())
    };
    let (a, sa) = run(1);
    let (b, sb) = run(5);
    assert_eq!(a.values(), b.values());
    assert_eq!(sa.values(), sb.values());
}
