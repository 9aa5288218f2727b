use super::element::{element_energy, element_stiffness};
use super::mesh::GridMesh;
use super::model::{DisplacementField, ElastParams, LoadCase};
use crate::error::{check_len, Result};
use crate::scalar::Scalar;

fn check_inputs<T: Scalar>(mesh: &GridMesh, rho: &[T], u: &DisplacementField<T>) -> Result<()> {
    check_len("density field", rho.len(), mesh.n_elements())?;
    check_len("displacement field", u.len(), mesh.n_dofs())
}

/// Unit-modulus strain energies `u_iᵀ k0 u_i` of every element.
pub fn element_energies<T: Scalar>(
    mesh: &GridMesh,
    nu: T,
    u: &DisplacementField<T>,
) -> Result<Vec<T>> {
    check_len("displacement field", u.len(), mesh.n_dofs())?;
    let ke = element_stiffness(nu)?;
    Ok((0..mesh.n_elements())
        .map(|e| element_energy(&ke, &u.element(mesh, e)))
        .collect())
}

/// Compliance as the element sum `Σ E(ρ_i) u_iᵀ k0 u_i`.
pub fn compliance<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    rho: &[T],
    u: &DisplacementField<T>,
) -> Result<T> {
    check_inputs(mesh, rho, u)?;
    let energies = element_energies(mesh, params.nu, u)?;
    Ok(rho
        .iter()
        .zip(&energies)
        .map(|(&r, &w)| params.modulus(r) * w)
        .sum())
}

/// Compliance as external work `Uᵀ F`.
pub fn external_work<T: Scalar>(
    mesh: &GridMesh,
    lc: &LoadCase<T>,
    u: &DisplacementField<T>,
) -> Result<T> {
    check_len("displacement field", u.len(), mesh.n_dofs())?;
    Ok(lc.loads().iter().map(|(&d, &f)| u.as_slice()[d] * f).sum())
}

/// `∂c/∂ρ_i = −p ρ_i^(p−1) (E0 − Emin) u_iᵀ k0 u_i`.
pub fn element_sensitivities<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    rho: &[T],
    u: &DisplacementField<T>,
) -> Result<Vec<T>> {
    check_inputs(mesh, rho, u)?;
    let energies = element_energies(mesh, params.nu, u)?;
    Ok(rho
        .iter()
        .zip(&energies)
        .map(|(&r, &w)| -params.modulus_derivative(r) * w)
        .collect())
}
