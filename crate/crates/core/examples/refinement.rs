//! Grid-refinement study: halve the axis spacing at fixed physical geometry
//! and watch the rescaling deviation and the cylinder-lemma shortfall.
//!
//!     cargo run --release -p rieszlab --example refinement

use rieszlab::experiments::*;
use rieszlab::*;

fn main() {
    let base = build_cycle(16, 16.0).unwrap();
    let f = base_profile(&base).unwrap();
    println!("rescale: spacing, axis_steps, deviation at smallest lambda");
    for k in 0..3 {
        let h = 0.5f64.powi(k);
        let cfg = RescalingConfig {
            axis_steps: 64 << k,
            spacing: h,
            profile_width: 8.0 / h,
            ..RescalingConfig::default()
        };
        let rho = axis_profile(cfg.axis_steps, h, cfg.profile_width, cfg.p).unwrap();
        let r = exp_rescaling(&base, &f, &rho, &cfg).unwrap();
        println!("  {h:<6} {:>4} {}", cfg.axis_steps, fmt_float(*r.column("deviation").last().unwrap()));
    }

    println!("cylinder: spacing, p, U/L");
    for p in [1.5, 3.0] {
        for k in 0..3 {
            let h = 0.5f64.powi(k);
            let cfg = CylinderLemmaConfig {
                p,
                axis_steps: 16 << k,
                spacing: h,
                ..CylinderLemmaConfig::default()
            };
            let r = exp_cylinder_lemma(&base, &cfg, 11).unwrap();
            let v = r.column("value");
            println!("  {h:<6} {p:<4} {:.5}", v[1] / v[0]);
        }
    }
}
