//! Scouting runs for tolerances and runtimes; kept ignored so the normal
//! suite stays fast. Run with:
//! cargo test -p lipfit-core --test pilot -- --ignored --nocapture

use std::time::Instant;

use lipfit_core::envelope::{cone_representation_error, ConeSign};
use lipfit_core::grid::{Grid, MaskSpec, ScalarField, StencilKind};
use lipfit_core::lip1d::{project_lip_1d, project_weighted};
use lipfit_core::metric::boundary_distance;
use lipfit_core::plaplace::p_sweep;
use lipfit_core::projector::{project_lip_graph, ProjectorOptions};
use lipfit_core::sbv1d::minimize_sbv_1d;
use lipfit_core::viscosity::{default_tau, eikonal_residual, regions};

fn disk_grid(n: usize) -> std::sync::Arc<Grid> {
    Grid::build(
        2,
        &[[-1.0, 1.0], [-1.0, 1.0]],
        &[n, n],
        &MaskSpec::Disk { center: [0.0, 0.0], radius: 1.0 },
        StencilKind::Eight,
    )
    .unwrap()
}

#[test]
#[ignore]
fn pilot_disk_projection() {
    let n = 81;
    let g = disk_grid(n);
    println!("disk n={n}: nodes={} edges={}", g.num_nodes(), g.edges().len());
    let f = ScalarField::from_fn(&g, |[x, y]| if x.hypot(y) < 0.4 { 1.0 } else { 0.0 }).unwrap();
    let t0 = Instant::now();
    let (u, cert) = project_lip_graph(&f, &ProjectorOptions::default()).unwrap();
    println!(
        "dykstra: {:?} sweeps={} feas={:.2e} inc={:.2e} kkt={:.2e} gap={:.2e}",
        t0.elapsed(),
        cert.iterations,
        cert.max_violation,
        cert.increment,
        cert.kkt_residual,
        cert.complementarity_gap
    );
    // radial oracle: weighted DP on the radius with weight 2πρ (trapezoid)
    let nr = 2001;
    let h = 1.0 / ((nr - 1) as f64);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for m in 0..nr {
        let rho = m as f64 * h;
        targets.push(if rho < 0.4 { 1.0 } else { 0.0 });
        let trap = if m == 0 || m == nr - 1 { 0.5 } else { 1.0 };
        weights.push(2.0 * std::f64::consts::PI * rho * h * trap);
    }
    let radial = project_weighted(&targets, &weights, &vec![h; nr - 1]).unwrap();
    let mut worst = 0.0f64;
    for v in 0..g.num_nodes() {
        let [x, y] = g.coords(v);
        let rho = x.hypot(y);
        let idx = (rho / h).round() as usize;
        let oracle = radial[idx.min(nr - 1)];
        worst = worst.max((u.values()[v] - oracle).abs());
    }
    println!("disk-vs-radial-oracle Linf = {worst:.4} (3h = {:.4})", 3.0 * g.spacing(0));
    let tau = default_tau(&g);
    let t1 = Instant::now();
    let plus = cone_representation_error(&u, &f, ConeSign::Plus, tau).unwrap();
    let minus = cone_representation_error(&u, &f, ConeSign::Minus, tau).unwrap();
    println!(
        "cones: {:?} plus err={:.4} size={} minus err={:.4} size={}",
        t1.elapsed(),
        plus.max_error,
        plus.region_size,
        minus.max_error,
        minus.region_size
    );
}

#[test]
#[ignore]
fn pilot_case2_sweep() {
    let g = Grid::line(-1.0, 1.0, 401).unwrap();
    let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
    let t0 = Instant::now();
    let report = p_sweep(&f, &[4.0, 8.0, 16.0, 32.0, 64.0], None).unwrap();
    println!("sweep: {:?}", t0.elapsed());
    for e in &report.entries {
        println!(
            "p={:5.0} supdist={:.4} sup={:.4} l2={:.4} gradlp={:.4} mean={:.2e} iters={}",
            e.p, e.sup_distance, e.sup_norm, e.l2_norm, e.grad_lp_norm, e.mean_misfit, e.iterations
        );
    }
}

#[test]
#[ignore]
fn pilot_eikonal_refinement() {
    for n in [401usize, 801] {
        let g = Grid::line(-1.0, 1.0, n).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let u = project_lip_1d(&f, 1.0).unwrap();
        let rep = regions(&u, &f, default_tau(&g)).unwrap();
        let res = eikonal_residual(&u, &rep).unwrap();
        println!(
            "n={n}: plus max={:.3e} count={} minus max={:.3e} count={}",
            res.plus.max, res.plus.count, res.minus.max, res.minus.count
        );
    }
}

#[test]
#[ignore]
fn pilot_case1_case3_goldens() {
    // case 1 at the spec's parameters: where does the DP optimum sit?
    let g = Grid::line(-1.0, 1.0, 2001).unwrap();
    let h = g.spacing(0);
    let f = ScalarField::from_fn_1d(&g, |x| if x.abs() < 0.4 { 1.0 } else { 0.0 }).unwrap();
    let t0 = Instant::now();
    let u = project_lip_1d(&f, 1.0).unwrap();
    println!("case1 dp: {:?}", t0.elapsed());
    let spec_tent = ScalarField::from_fn_1d(&g, |x| (0.9 - x.abs()).max(0.0).min(1.0)).unwrap();
    let true_tent =
        ScalarField::from_fn_1d(&g, |x| (0.8f64.sqrt() - x.abs()).max(0.0).min(1.0)).unwrap();
    println!(
        "case1: |u − 0.9tent| = {:.5}, |u − sqrt0.8tent| = {:.5}, 2h = {:.5}",
        u.linf_distance(&spec_tent).unwrap(),
        u.linf_distance(&true_tent).unwrap(),
        2.0 * h
    );
    let diff = u.sub(&f).unwrap();
    let energy: f64 = 0.5
        * diff
            .values()
            .iter()
            .zip(diff.grid().quad_weights())
            .map(|(d, q)| q * d * d)
            .sum::<f64>();
    println!("case1 energy = {energy:.6} (1/12 = {:.6})", 1.0 / 12.0);

    // case 3
    let g3 = Grid::line(-1.0, 1.0, 4001).unwrap();
    let f3 = ScalarField::from_fn_1d(&g3, |x| x.abs().sqrt()).unwrap();
    let u3 = project_lip_1d(&f3, 1.0).unwrap();
    let mid = g3.num_nodes() / 2;
    println!("case3 u(0) = {:.6} (2/9 = {:.6}) 2h = {:.6}", u3.values()[mid], 2.0 / 9.0, 2.0 * g3.spacing(0));
    // kink: first node right of 0 where u stops hugging slope 1
    let mut kink_x = f64::NAN;
    for v in mid..g3.num_nodes() - 1 {
        let slope = (u3.values()[v + 1] - u3.values()[v]) / g3.spacing(0);
        if slope < 1.0 - 1e-6 {
            kink_x = g3.coords(v)[0];
            break;
        }
    }
    println!("case3 kink at {kink_x:.6} (4/9 = {:.6}) 3h = {:.6}", 4.0 / 9.0, 3.0 * g3.spacing(0));
}

#[test]
#[ignore]
fn pilot_sbv_threshold() {
    let t0 = Instant::now();
    let g = Grid::line(-1.0, 1.0, 801).unwrap();
    let mut transition = f64::NAN;
    let mut prev_jumps = 0usize;
    let mut k = 2.0;
    while k <= 4.0 + 1e-9 {
        let f = ScalarField::from_fn_1d(&g, |x| if x.abs() < 0.5 { k } else { 0.0 }).unwrap();
        let sol = minimize_sbv_1d(&f, 2, 1.0).unwrap();
        if sol.jump_count != prev_jumps {
            println!("k={k:.2}: jumps {} -> {} energy={:.4}", prev_jumps, sol.jump_count, sol.energy);
            if prev_jumps == 0 && sol.jump_count == 2 && transition.is_nan() {
                transition = k;
            }
            prev_jumps = sol.jump_count;
        }
        k += 0.1;
    }
    println!("scan: {:?}; transition k* = {transition:.2}, k*^3 = {:.2}", t0.elapsed(), transition.powi(3));
}

#[test]
#[ignore]
fn pilot_property_costs() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    // dykstra idempotence cost at n=101
    let g = Grid::line(-1.0, 1.0, 101).unwrap();
    let t0 = Instant::now();
    let mut total_sweeps = 0usize;
    for _ in 0..20 {
        let f = ScalarField::from_values(
            &g,
            (0..101).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let opts = ProjectorOptions { tol_inc: Some(1e-13), compute_kkt: false, ..Default::default() };
        let (u, cert) = project_lip_graph(&f, &opts).unwrap();
        total_sweeps += cert.iterations;
        let (uu, _) = project_lip_graph(&u, &opts).unwrap();
        assert!(uu.linf_distance(&u).unwrap() < 1e-8);
    }
    println!("20 idempotence pairs: {:?}, avg sweeps {}", t0.elapsed(), total_sweeps / 20);
    // dp vs dykstra at n=40
    let g40 = Grid::line(-1.0, 1.0, 40).unwrap();
    let t1 = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let f = ScalarField::from_values(
            &g40,
            (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let opts = ProjectorOptions { tol_inc: Some(1e-13), compute_kkt: false, ..Default::default() };
        let (u, _) = project_lip_graph(&f, &opts).unwrap();
        let dp = project_lip_1d(&f, 1.0).unwrap();
        worst = worst.max(u.linf_distance(&dp).unwrap());
    }
    println!("50 dp-vs-dykstra pairs: {:?}, worst {:.2e}", t1.elapsed(), worst);

    // delta eikonal on the square away from the diagonal ridge
    let gs = Grid::square(-1.0, 1.0, 81).unwrap();
    let delta = boundary_distance(&gs).unwrap();
    let interior: Vec<usize> = (0..gs.num_nodes()).filter(|&v| !gs.is_boundary(v)).collect();
    let rep = lipfit_core::viscosity::RegionReport::with_forced_minus(&gs, &interior);
    let res = eikonal_residual(&delta, &rep).unwrap();
    println!("square delta residual: max={:.3e} count={}", res.minus.max, res.minus.count);
}
