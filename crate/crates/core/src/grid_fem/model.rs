use std::collections::BTreeMap;

use super::mesh::GridMesh;
use crate::error::{check_len, Result, TopOptError};
use crate::scalar::Scalar;

/// Material parameters of the modified SIMP interpolation
/// `E(ρ) = Emin + ρ^p (E0 − Emin)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElastParams<T = f64> {
    pub e0: T,
    pub emin: T,
    pub nu: T,
    pub penal: T,
}

impl<T: Scalar> ElastParams<T> {
    /// `Emin` defaults to `1e-9 · E0`.
    pub fn new(e0: T, nu: T, penal: T) -> Result<Self> {
        Self::with_emin(e0, e0 * T::lit(1e-9), nu, penal)
    }

    pub fn with_emin(e0: T, emin: T, nu: T, penal: T) -> Result<Self> {
        let p = Self {
            e0,
            emin,
            nu,
            penal,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TopOptError::Parameter(m));
        if !(self.e0 > T::zero()) {
            return bad(format!("E0 must be positive, got {}", self.e0));
        }
        if !(self.emin > T::zero() && self.emin < self.e0) {
            return bad(format!("Emin must lie in (0, E0), got {}", self.emin));
        }
        if !(self.nu >= T::zero() && self.nu < T::lit(0.5)) {
            return bad(format!("nu must lie in [0, 0.5), got {}", self.nu));
        }
        if !(self.penal >= T::one()) {
            return bad(format!("penalization must be >= 1, got {}", self.penal));
        }
        Ok(())
    }

    #[inline]
    pub fn modulus(&self, rho: T) -> T {
        self.emin + rho.powf(self.penal) * (self.e0 - self.emin)
    }

    /// `dE/dρ`.
    #[inline]
    pub fn modulus_derivative(&self, rho: T) -> T {
        self.penal * rho.powf(self.penal - T::one()) * (self.e0 - self.emin)
    }
}

/// Supports and point loads in global DOF numbering.
///
/// Loads placed on a fixed DOF are absorbed by the support and never enter
/// the reduced system.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadCase<T = f64> {
    fixed_dofs: Vec<usize>,
    loads: BTreeMap<usize, T>,
}

impl<T: Scalar> LoadCase<T> {
    pub fn new(fixed_dofs: impl IntoIterator<Item = usize>) -> Self {
        let mut fixed_dofs: Vec<usize> = fixed_dofs.into_iter().collect();
        fixed_dofs.sort_unstable();
        fixed_dofs.dedup();
        Self {
            fixed_dofs,
            loads: BTreeMap::new(),
        }
    }

    /// Adds `value` to the force at `dof`.
    pub fn with_load(mut self, dof: usize, value: T) -> Self {
        *self.loads.entry(dof).or_insert(T::zero()) += value;
        self
    }

    pub fn fixed_dofs(&self) -> &[usize] {
        &self.fixed_dofs
    }

    pub fn loads(&self) -> &BTreeMap<usize, T> {
        &self.loads
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed_dofs.binary_search(&dof).is_ok()
    }

    /// Scales every load by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            fixed_dofs: self.fixed_dofs.clone(),
            loads: self.loads.iter().map(|(&d, &v)| (d, v * factor)).collect(),
        }
    }

    /// Full-length global force vector, including entries on fixed DOFs.
    pub fn force_vector(&self, mesh: &GridMesh) -> Vec<T> {
        let mut f = vec![T::zero(); mesh.n_dofs()];
        for (&d, &v) in &self.loads {
            if d < f.len() {
                f[d] += v;
            }
        }
        f
    }

    pub fn validate(&self, mesh: &GridMesh) -> Result<()> {
        let n = mesh.n_dofs();
        if let Some(&d) = self
            .fixed_dofs
            .iter()
            .chain(self.loads.keys())
            .find(|&&d| d >= n)
        {
            return Err(TopOptError::Parameter(format!(
                "DOF {d} out of range for a mesh with {n} DOFs"
            )));
        }
        if self.fixed_dofs.len() < 3 {
            return Err(TopOptError::Structural(format!(
                "{} constrained DOFs cannot remove the 3 rigid-body modes",
                self.fixed_dofs.len()
            )));
        }
        Ok(())
    }
}

/// Global nodal displacement vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField<T = f64> {
    u: Vec<T>,
}

impl<T: Scalar> DisplacementField<T> {
    pub fn new(mesh: &GridMesh, u: Vec<T>) -> Result<Self> {
        check_len("displacement vector", u.len(), mesh.n_dofs())?;
        Ok(Self { u })
    }

    pub fn zeros(mesh: &GridMesh) -> Self {
        Self {
            u: vec![T::zero(); mesh.n_dofs()],
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.u
    }

    pub fn into_inner(self) -> Vec<T> {
        self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Gathers the eight DOF values of element `e`.
    #[inline]
    pub fn element(&self, mesh: &GridMesh, e: usize) -> [T; 8] {
        mesh.element_dofs(e).map(|d| self.u[d])
    }
}
