mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use topopt::beso::{
    beso_sensitivity, beso_update, beso_update_strict, run_beso, run_beso_from, BesoConfig,
};
use topopt::diagnostics::{checkerboard_index, gray_fraction, FieldMetrics};
use topopt::grid_fem::{assemble_and_solve, ElastParams};
use topopt::simp::{run_simp, run_simp_with, SimpConfig};
use topopt::{DensityField, GridMesh, IterationRow};

/// Top-k set by sorting `(α desc, index asc)` pairs; only valid for distinct α.
fn sort_oracle(alpha: &[f64], k: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..alpha.len()).collect();
    idx.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
    let mut solid = vec![false; alpha.len()];
    for &i in &idx[..k] {
        solid[i] = true;
    }
    solid
}

#[test]
fn beso_update_matches_full_sort() {
    let mut rng = rng(11);
    for &n in &[1usize, 2, 7, 100, 1_000, 10_000] {
        for _ in 0..5 {
            let alpha = random_densities(&mut rng, n, 0.0, 1e3);
            let rho: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 1e-3 })
                .collect();
            let target = rng.gen_range(0.5..n as f64 + 0.49);
            let k = (target.round() as usize).clamp(1, n);
            let next = beso_update(&rho, &alpha, target, 1e-3).unwrap();
            let want = sort_oracle(&alpha, k);
            for i in 0..n {
                assert_eq!(next[i] == 1.0, want[i], "n {n} element {i}");
                assert!(next[i] == 1.0 || next[i] == 1e-3);
            }
        }
    }
}

#[test]
fn beso_threshold_is_consistent_with_ties() {
    let mut rng = rng(12);
    for _ in 0..200 {
        let n = rng.gen_range(2..300);
        // few distinct levels force many ties
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
        let rho: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.4) { 1.0 } else { 1e-3 })
            .collect();
        let k = rng.gen_range(1..=n);
        let next = beso_update(&rho, &alpha, k as f64, 1e-3).unwrap();
        let solid: Vec<usize> = (0..n).filter(|&i| next[i] == 1.0).collect();
        assert_eq!(solid.len(), k);
        let min_solid = solid.iter().map(|&i| alpha[i]).fold(f64::MAX, f64::min);
        for i in (0..n).filter(|&i| next[i] != 1.0) {
            assert!(alpha[i] <= min_solid);
            // at the threshold level, a void element never beats a current solid one
            if alpha[i] == min_solid && rho[i] == 1.0 {
                assert!(solid.iter().all(|&j| alpha[j] > min_solid || rho[j] == 1.0));
            }
        }
    }
}

#[test]
fn equal_numbers_at_current_volume_keep_the_design() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let n = rng.gen_range(2..200);
        let mut rho = vec![1e-3; n];
        let k = rng.gen_range(1..=n);
        for i in rand::seq::index::sample(&mut rng, n, k) {
            rho[i] = 1.0;
        }
        let next = beso_update(&rho, &vec![0.7; n], k as f64, 1e-3).unwrap();
        assert_eq!(next.as_slice(), rho.as_slice());
    }
}

#[test]
fn strict_swap_changes_at_most_two_elements() {
    let mut rng = rng(14);
    for _ in 0..200 {
        let n = rng.gen_range(2..100);
        let alpha = random_densities(&mut rng, n, 0.0, 1.0);
        let mut rho = vec![1e-3; n];
        let count = rng.gen_range(0..=n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..count] {
            rho[i] = 1.0;
        }
        let target = rng.gen_range(1..=n);
        let next = beso_update_strict(&rho, &alpha, target as f64, 1e-3).unwrap();
        let changed = (0..n).filter(|&i| next[i] != rho[i]).count();
        let new_count = next.iter().filter(|&&r| r == 1.0).count();
        assert!(changed <= 2);
        assert_eq!(
            new_count as i64 - count as i64,
            (target as i64 - count as i64).signum()
        );
    }
}

#[test]
fn sensitivity_numbers_are_half_element_energy() {
    let (mesh, lc) = small_cantilever(4, 3);
    let params = ElastParams::new(2.0, 0.3, 3.0).unwrap();
    let mut rho = vec![1.0; mesh.n_elements()];
    rho[5] = 1e-3;
    let u = assemble_and_solve(&mesh, &params, &rho, &lc).unwrap();
    let alpha = beso_sensitivity(&mesh, &params, &rho, &u, 1e-3).unwrap();
    let ud = dense_solve(&mesh, &params, &rho, &lc);
    let k0 = gauss_k0(0.3);
    for e in 0..mesh.n_elements() {
        let dofs = mesh.element_dofs(e);
        let mut w = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                w += ud[dofs[a]] * k0[(a, b)] * ud[dofs[b]];
            }
        }
        let want = if rho[e] == 1.0 { 0.5 * 2.0 * w } else { 0.0 };
        assert!(
            (alpha[e] - want).abs() <= 1e-8 * want.abs().max(1e-12),
            "element {e}"
        );
    }
}

fn beso_setup(
    nelx: usize,
    nely: usize,
) -> (
    GridMesh,
    topopt::LoadCaseF64,
    ElastParams<f64>,
    BesoConfig<f64>,
) {
    let (mesh, lc) = small_cantilever(nelx, nely);
    let params = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let mut cfg = BesoConfig::new(0.5, 1.5);
    cfg.max_iters = 120;
    (mesh, lc, params, cfg)
}

#[test]
fn beso_volume_schedule_is_monotone_and_discrete() {
    let (mesh, lc, params, cfg) = beso_setup(24, 12);
    let out = run_beso(&mesh, &params, &lc, &cfg).unwrap();
    let n = mesh.n_elements() as f64;
    let target = (0.5 * n).round() / n;
    let mut prev = 1.0;
    for row in &out.record.rows {
        assert!(row.volfrac <= prev + 1e-15 && row.volfrac >= target - 1e-15);
        prev = row.volfrac;
    }
    assert!(out.converged, "{} iterations", out.record.len());
    assert!(out.density.iter().all(|&r| r == 1.0 || r == 1e-3));
    assert_eq!(
        out.density.iter().filter(|&&r| r == 1.0).count() as f64,
        target * n
    );
}

#[test]
fn zero_evolution_rate_holds_the_volume() {
    let (mesh, lc, params, mut cfg) = beso_setup(16, 8);
    cfg.evolution_rate = 0.0;
    let n = mesh.n_elements();
    let k = (cfg.volfrac * n as f64).round() as usize;
    // solid left half
    let init: Vec<f64> = (0..n)
        .map(|e| {
            if mesh.element_coords(e).0 < 8 {
                1.0
            } else {
                1e-3
            }
        })
        .collect();
    assert_eq!(init.iter().filter(|&&r| r == 1.0).count(), k);
    let init = DensityField::new(&mesh, init).unwrap();
    let out = run_beso_from(&mesh, &params, &lc, &cfg, init, |_| {}).unwrap();
    // voids keep rho_min
    let mean = (k as f64 + (n - k) as f64 * 1e-3) / n as f64;
    for row in &out.record.rows {
        assert!((row.volfrac - mean).abs() < 1e-12);
    }
    assert_eq!(out.density.iter().filter(|&&r| r == 1.0).count(), k);
    assert!(out.converged);
}

#[test]
fn strict_swap_run_moves_one_element_at_a_time() {
    let (mesh, lc, params, mut cfg) = beso_setup(12, 6);
    cfg.strict_swap = true;
    cfg.max_iters = 60;
    let n = mesh.n_elements() as f64;
    let out = run_beso(&mesh, &params, &lc, &cfg).unwrap_or_else(|e| panic!("{}", e.source));
    let mut prev = 1.0;
    for row in &out.record.rows {
        assert!((prev - row.volfrac).abs() * n <= 1.0 + 1e-9);
        prev = row.volfrac;
    }
}

#[test]
fn simp_keeps_volume_every_iteration() {
    let (mesh, lc) = small_cantilever(30, 10);
    let params = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let cfg = SimpConfig::new(0.5, 1.5);
    let mut rows: Vec<IterationRow<f64>> = Vec::new();
    let out = run_simp_with(&mesh, &params, &lc, &cfg, |r| rows.push(*r)).unwrap();
    assert_eq!(rows, out.record.rows);
    assert!(out.converged);
    for row in &rows {
        assert!((row.volfrac - 0.5).abs() <= 1e-6);
        assert!(row.compliance > 0.0 && row.change >= 0.0);
    }
    assert!(rows.last().unwrap().change < cfg.change_tol);
    assert!(rows.last().unwrap().compliance < rows[0].compliance);
    assert!(out.density.iter().all(|&r| (1e-3..=1.0).contains(&r)));
}

#[test]
fn full_volume_simp_is_solid() {
    let (mesh, lc) = small_cantilever(12, 6);
    let params = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let cfg = SimpConfig::new(1.0, 1.5);
    let out = run_simp(&mesh, &params, &lc, &cfg).unwrap();
    assert!(out.density.iter().all(|&r| r == 1.0));
    assert!(out.converged);
    assert_eq!(out.record.len(), 1);
}

#[test]
fn penalization_pushes_towards_black_and_white() {
    let (mesh, lc) = small_cantilever(40, 20);
    let cfg = SimpConfig::new(0.4, 1.5);
    let gray = |p: f64| {
        let params = ElastParams::new(1.0, 0.3, p).unwrap();
        let out = run_simp(&mesh, &params, &lc, &cfg).unwrap();
        gray_fraction(out.density.as_slice())
    };
    let (g1, g3) = (gray(1.0), gray(3.0));
    assert!(g3 < g1, "p=3 gray {g3}, p=1 gray {g1}");
}

#[test]
fn unfiltered_simp_checkerboards_more() {
    let (mesh, lc) = small_cantilever(40, 20);
    let params = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let index = |r: f64| {
        let out = run_simp(&mesh, &params, &lc, &SimpConfig::new(0.4, r)).unwrap();
        checkerboard_index(&mesh, out.density.as_slice()).unwrap()
    };
    assert!(index(0.5) > 3.0 * index(1.5));
}

#[test]
fn runs_are_deterministic() {
    let (mesh, lc) = small_cantilever(20, 10);
    let params = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let cfg = SimpConfig::new(0.5, 1.5);
    let a = run_simp(&mesh, &params, &lc, &cfg).unwrap();
    let b = run_simp(&mesh, &params, &lc, &cfg).unwrap();
    assert_eq!(a, b);
    let bcfg = BesoConfig::new(0.5, 1.5);
    assert_eq!(
        run_beso(&mesh, &params, &lc, &bcfg).unwrap(),
        run_beso(&mesh, &params, &lc, &bcfg).unwrap()
    );
}

#[test]
fn single_precision_run_tracks_double() {
    let (mesh, lc64) = small_cantilever(20, 10);
    let (_, lc32) =
        topopt::runner::clamped_left_problem::<f32>(20, 10, topopt::runner::mid_right_load(20, 10))
            .unwrap();
    let p64 = ElastParams::new(1.0, 0.3, 3.0).unwrap();
    let p32 = ElastParams::new(1.0f32, 0.3, 3.0).unwrap();
    let c64 = run_simp(&mesh, &p64, &lc64, &SimpConfig::new(0.5, 1.5)).unwrap();
    let c32 = run_simp(&mesh, &p32, &lc32, &SimpConfig::new(0.5f32, 1.5)).unwrap();
    let (a, b) = (
        c64.record.rows[0].compliance,
        c32.record.rows[0].compliance as f64,
    );
    assert!((a - b).abs() < 1e-3 * a);
    let vf = FieldMetrics::compute(&mesh, c32.density.as_slice())
        .unwrap()
        .volume_fraction;
    assert!((vf - 0.5).abs() < 1e-4);
}

fn field(mesh: &GridMesh, seed: u64) -> Vec<f64> {
    random_densities(&mut rng(seed), mesh.n_elements(), 0.0, 1.0)
}

proptest! {
    #[test]
    fn index_is_invariant_under_inversion_and_mirroring(x in 2usize..12, y in 2usize..12, seed in any::<u64>()) {
        let mesh = GridMesh::new(x, y).unwrap();
        let rho = field(&mesh, seed);
        let base = checkerboard_index(&mesh, &rho).unwrap();
        let inverted: Vec<f64> = rho.iter().map(|r| 1.0 - r).collect();
        let remap = |f: &dyn Fn(usize, usize) -> usize| -> Vec<f64> {
            (0..mesh.n_elements()).map(|e| {
                let (ex, ey) = mesh.element_coords(e);
                rho[f(ex, ey)]
            }).collect()
        };
        let flip_x = remap(&|ex, ey| mesh.element_index(x - 1 - ex, ey));
        let flip_y = remap(&|ex, ey| mesh.element_index(ex, y - 1 - ey));
        for other in [inverted, flip_x, flip_y] {
            let v = checkerboard_index(&mesh, &other).unwrap();
            prop_assert!((v - base).abs() <= 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn straight_interfaces_score_zero(x in 2usize..12, y in 2usize..12, cut in 0usize..12, vertical in any::<bool>()) {
        let mesh = GridMesh::new(x, y).unwrap();
        let rho: Vec<f64> = (0..mesh.n_elements()).map(|e| {
            let (ex, ey) = mesh.element_coords(e);
            let s = if vertical { ex } else { ey };
            if s < cut { 1.0 } else { 0.0 }
        }).collect();
        prop_assert_eq!(checkerboard_index(&mesh, &rho).unwrap(), 0.0);
        prop_assert_eq!(gray_fraction(&rho), 0.0);
    }
}
