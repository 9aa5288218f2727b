//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topopt::grid_fem::{ElastParams, LoadCase};
use topopt::runner::{clamped_left_problem, mid_right_load};
use topopt::GridMesh;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-modulus, unit-thickness plane-stress stiffness of a unit square,
/// integrated with 2×2 Gauss points. Local node order: (0,0), (1,0), (1,1), (0,1).
pub fn gauss_k0(nu: f64) -> SMatrix<f64, 8, 8> {
    let g = 1.0 / 3f64.sqrt();
    let xi_n = [-1.0, 1.0, 1.0, -1.0];
    let eta_n = [-1.0, -1.0, 1.0, 1.0];
    let c = 1.0 / (1.0 - nu * nu);
    let d = SMatrix::<f64, 3, 3>::new(
        c,
        c * nu,
        0.0,
        c * nu,
        c,
        0.0,
        0.0,
        0.0,
        c * (1.0 - nu) / 2.0,
    );
    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for &xi in &[-g, g] {
        for &eta in &[-g, g] {
            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                // x = (1 + ξ)/2, so d/dx = 2 d/dξ
                let dx = 2.0 * xi_n[a] * (1.0 + eta_n[a] * eta) / 4.0;
                let dy = 2.0 * eta_n[a] * (1.0 + xi_n[a] * xi) / 4.0;
                b[(0, 2 * a)] = dx;
                b[(1, 2 * a + 1)] = dy;
                b[(2, 2 * a)] = dy;
                b[(2, 2 * a + 1)] = dx;
            }
            k += b.transpose() * d * b * 0.25;
        }
    }
    k
}

pub fn count_near_zero_eigenvalues(m: DMatrix<f64>, rel: f64) -> usize {
    let eig = m.symmetric_eigen().eigenvalues;
    let max = eig.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    eig.iter().filter(|v| v.abs() < rel * max).count()
}

/// Dense global stiffness with Q4 element matrices from the quadrature oracle.
pub fn dense_stiffness(mesh: &GridMesh, params: &ElastParams<f64>, rho: &[f64]) -> DMatrix<f64> {
    let k0 = gauss_k0(params.nu);
    let n = mesh.n_dofs();
    let mut k = DMatrix::zeros(n, n);
    for e in 0..mesh.n_elements() {
        let dofs = mesh.element_dofs(e);
        let modulus = params.modulus(rho[e]);
        for a in 0..8 {
            for b in 0..8 {
                k[(dofs[a], dofs[b])] += modulus * k0[(a, b)];
            }
        }
    }
    k
}

/// Full displacement vector from a dense LU solve of the reduced system.
pub fn dense_solve(
    mesh: &GridMesh,
    params: &ElastParams<f64>,
    rho: &[f64],
    lc: &LoadCase<f64>,
) -> Vec<f64> {
    let k = dense_stiffness(mesh, params, rho);
    let free: Vec<usize> = (0..mesh.n_dofs()).filter(|&d| !lc.is_fixed(d)).collect();
    let kr = DMatrix::from_fn(free.len(), free.len(), |i, j| k[(free[i], free[j])]);
    let f = lc.force_vector(mesh);
    let fr = DVector::from_fn(free.len(), |i, _| f[free[i]]);
    let ur = kr.lu().solve(&fr).expect("reduced stiffness is singular");
    let mut u = vec![0.0; mesh.n_dofs()];
    for (i, &d) in free.iter().enumerate() {
        u[d] = ur[i];
    }
    u
}

pub fn small_cantilever(nelx: usize, nely: usize) -> (GridMesh, LoadCase<f64>) {
    clamped_left_problem(nelx, nely, mid_right_load(nelx, nely)).unwrap()
}

fn centre_distance(mesh: &GridMesh, i: usize, j: usize) -> f64 {
    let (xi, yi) = mesh.element_coords(i);
    let (xj, yj) = mesh.element_coords(j);
    let dx = xi as f64 - xj as f64;
    let dy = yi as f64 - yj as f64;
    (dx * dx + dy * dy).sqrt()
}

/// All-pairs filter weights `max(0, r − dist)`.
pub fn brute_weights(mesh: &GridMesh, r_min: f64) -> Vec<Vec<f64>> {
    let n = mesh.n_elements();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (r_min - centre_distance(mesh, i, j)).max(0.0))
                .collect()
        })
        .collect()
}

pub fn brute_filter_sensitivities(
    mesh: &GridMesh,
    r_min: f64,
    rho: &[f64],
    dc: &[f64],
) -> Vec<f64> {
    let h = brute_weights(mesh, r_min);
    (0..rho.len())
        .map(|i| {
            let num: f64 = (0..rho.len()).map(|j| h[i][j] * rho[j] * dc[j]).sum();
            let s: f64 = h[i].iter().sum();
            num / (rho[i].max(1e-3) * s)
        })
        .collect()
}

pub fn brute_filter_field(mesh: &GridMesh, r_min: f64, alpha: &[f64]) -> Vec<f64> {
    let h = brute_weights(mesh, r_min);
    (0..alpha.len())
        .map(|i| {
            let num: f64 = (0..alpha.len()).map(|j| h[i][j] * alpha[j]).sum();
            num / h[i].iter().sum::<f64>()
        })
        .collect()
}

pub fn random_densities(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Volume of the clamped OC step for a fixed multiplier, written out directly.
pub fn oc_volume(
    rho: &[f64],
    dc: &[f64],
    dv: &[f64],
    lambda: f64,
    move_limit: f64,
    eta: f64,
    rho_min: f64,
) -> f64 {
    rho.iter()
        .zip(dc)
        .zip(dv)
        .map(|((&r, &d), &v)| {
            let b = (-d / (lambda * v)).max(0.0);
            (r * b.powf(eta)).clamp(rho_min.max(r - move_limit), (r + move_limit).min(1.0))
        })
        .sum()
}

/// Bisection on `ln λ` for `oc_volume(λ) = target`.
pub fn oc_root(
    rho: &[f64],
    dc: &[f64],
    dv: &[f64],
    target: f64,
    move_limit: f64,
    eta: f64,
    rho_min: f64,
) -> f64 {
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if oc_volume(rho, dc, dv, mid.exp(), move_limit, eta, rho_min) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Mean density of each `factor × factor` block, coarse mesh column-major.
pub fn block_average(mesh: &GridMesh, rho: &[f64], factor: usize) -> Vec<f64> {
    let (cx, cy) = (mesh.nelx() / factor, mesh.nely() / factor);
    let mut out = vec![0.0; cx * cy];
    for ex in 0..mesh.nelx() {
        for ey in 0..mesh.nely() {
            out[(ex / factor) * cy + ey / factor] += rho[mesh.element_index(ex, ey)];
        }
    }
    let area = (factor * factor) as f64;
    out.iter_mut().for_each(|v| *v /= area);
    out
}
