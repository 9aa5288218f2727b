//! Distance-weighted neighborhood filter over element centers.
//!
//! Raw weights are `Ĥ_ij = r_min − dist(i, j)` for every `j` whose center lies
//! within `r_min` of element `i`'s center; neighborhoods are truncated at the
//! domain boundary and renormalized by `S_i = Σ_j Ĥ_ij`.

use crate::error::{check_len, Result, TopOptError};
use crate::grid_fem::GridMesh;
use crate::scalar::Scalar;

/// Density floor used when dividing filtered sensitivities by `ρ_i`.
pub const SENSITIVITY_DENSITY_FLOOR: f64 = 1e-3;

/// Precomputed neighbor lists and weights for one mesh and radius.
///
/// Stored in compressed rows: the neighbors of element `i` are
/// `neighbors[offsets[i]..offsets[i + 1]]`, sorted by element index.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterKernel<T = f64> {
    mesh: GridMesh,
    r_min: T,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<T>,
    normalizers: Vec<T>,
}

impl<T: Scalar> FilterKernel<T> {
    /// Enumerates only the `(2⌊r_min⌋ + 1)²` window around each element.
    pub fn build(mesh: &GridMesh, r_min: T) -> Result<Self> {
        if !(r_min > T::zero()) || !r_min.is_finite() {
            return Err(TopOptError::Parameter(format!(
                "filter radius must be positive and finite, got {r_min}"
            )));
        }
        let reach = r_min.floor().to_usize().unwrap_or(usize::MAX);
        let (nelx, nely) = (mesh.nelx(), mesh.nely());
        let n = mesh.n_elements();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        let mut normalizers = Vec::with_capacity(n);
        offsets.push(0);
        for i in 0..n {
            let (ex, ey) = mesh.element_coords(i);
            let mut sum = T::zero();
            for jx in ex.saturating_sub(reach)..=(ex.saturating_add(reach)).min(nelx - 1) {
                for jy in ey.saturating_sub(reach)..=(ey.saturating_add(reach)).min(nely - 1) {
                    let dx = T::lit(jx as f64 - ex as f64);
                    let dy = T::lit(jy as f64 - ey as f64);
                    let dist = dx.hypot(dy);
                    if dist <= r_min {
                        let w = r_min - dist;
                        neighbors.push(mesh.element_index(jx, jy));
                        weights.push(w);
                        sum += w;
                    }
                }
            }
            normalizers.push(sum);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            mesh: *mesh,
            r_min,
            offsets,
            neighbors,
            weights,
            normalizers,
        })
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn r_min(&self) -> T {
        self.r_min
    }

    pub fn len(&self) -> usize {
        self.normalizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalizers.is_empty()
    }

    /// Neighbor indices of element `i`, including `i` itself.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Raw weights `Ĥ_ij` aligned with [`neighbors`](Self::neighbors).
    pub fn raw_weights(&self, i: usize) -> &[T] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `S_i = Σ_j Ĥ_ij`.
    pub fn normalizer(&self, i: usize) -> T {
        self.normalizers[i]
    }

    /// Raw weight of the pair `(i, j)`, zero when `j` is not a neighbor.
    pub fn weight(&self, i: usize, j: usize) -> T {
        match self.neighbors(i).binary_search(&j) {
            Ok(k) => self.raw_weights(i)[k],
            Err(_) => T::zero(),
        }
    }

    /// Normalized weights `h_ij = Ĥ_ij / S_i`.
    pub fn normalized_weights(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let s = self.normalizers[i];
        self.neighbors(i)
            .iter()
            .zip(self.raw_weights(i))
            .map(move |(&j, &w)| (j, w / s))
    }

    /// Sensitivity filter
    /// `d̂c_i = Σ_j Ĥ_ij ρ_j dc_j / (max(ρ_i, 10⁻³) · S_i)`.
    pub fn filter_sensitivities(&self, rho: &[T], dc: &[T]) -> Result<Vec<T>> {
        check_len("density field", rho.len(), self.len())?;
        check_len("sensitivity vector", dc.len(), self.len())?;
        let floor = T::lit(SENSITIVITY_DENSITY_FLOOR);
        Ok((0..self.len())
            .map(|i| {
                let acc: T = self
                    .neighbors(i)
                    .iter()
                    .zip(self.raw_weights(i))
                    .map(|(&j, &w)| w * rho[j] * dc[j])
                    .sum();
                acc / (rho[i].max(floor) * self.normalizers[i])
            })
            .collect())
    }

    /// Plain weighted average `α̂_i = Σ_j Ĥ_ij α_j / S_i`.
    pub fn filter_field(&self, alpha: &[T]) -> Result<Vec<T>> {
        check_len("field", alpha.len(), self.len())?;
        Ok((0..self.len())
            .map(|i| {
                let acc: T = self
                    .neighbors(i)
                    .iter()
                    .zip(self.raw_weights(i))
                    .map(|(&j, &w)| w * alpha[j])
                    .sum();
                acc / self.normalizers[i]
            })
            .collect())
    }
}
