use std::ops::Deref;

use crate::error::{check_len, Result};
use crate::grid_fem::GridMesh;
use crate::scalar::Scalar;

/// Per-element relative densities, indexed like the mesh elements.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField<T = f64> {
    values: Vec<T>,
}

impl<T: Scalar> DensityField<T> {
    pub fn new(mesh: &GridMesh, values: Vec<T>) -> Result<Self> {
        check_len("density field", values.len(), mesh.n_elements())?;
        Ok(Self { values })
    }

    pub fn uniform(mesh: &GridMesh, value: T) -> Self {
        Self {
            values: vec![value; mesh.n_elements()],
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }

    /// `Σρ / N`.
    pub fn volume_fraction(&self) -> T {
        volume_fraction(&self.values)
    }

    /// `max_i |ρ_i − other_i|`.
    pub fn max_change(&self, other: &[T]) -> T {
        self.values
            .iter()
            .zip(other)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Deref for DensityField<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> AsRef<[T]> for DensityField<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

pub(crate) fn volume_fraction<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.iter().copied().sum::<T>() / T::lit(values.len() as f64)
}

impl<T> From<Vec<T>> for DensityField<T> {
    fn from(values: Vec<T>) -> Self {
        Self { values }
    }
}
