//! Scalar measures of checkerboarding, grayness and filter normalization.

use crate::density::volume_fraction;
use crate::error::{check_len, Result, TopOptError};
use crate::filter::FilterKernel;
use crate::grid_fem::GridMesh;
use crate::scalar::Scalar;

/// Default open interval of densities counted as gray.
pub const GRAY_BAND: (f64, f64) = (0.1, 0.9);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldMetrics<T = f64> {
    pub checkerboard_index: T,
    pub gray_fraction: T,
    pub volume_fraction: T,
}

impl<T: Scalar> FieldMetrics<T> {
    pub fn compute(mesh: &GridMesh, rho: &[T]) -> Result<Self> {
        Ok(Self {
            checkerboard_index: checkerboard_index(mesh, rho)?,
            gray_fraction: gray_fraction(rho),
            volume_fraction: volume_fraction(rho),
        })
    }
}

/// Mean of `q²` over all 2×2 element blocks `(a b / c d)`, with
/// `q = (a + d − b − c) / 2`.
///
/// A constant field or a straight interface gives 0, a perfect 0/1
/// checkerboard gives 1.
pub fn checkerboard_index<T: Scalar>(mesh: &GridMesh, rho: &[T]) -> Result<T> {
    check_len("density field", rho.len(), mesh.n_elements())?;
    let (nelx, nely) = (mesh.nelx(), mesh.nely());
    if nelx < 2 || nely < 2 {
        return Err(TopOptError::Parameter(format!(
            "checkerboard index needs at least a 2x2 mesh, got {nelx}x{nely}"
        )));
    }
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for x in 0..nelx - 1 {
        for y in 0..nely - 1 {
            let a = rho[mesh.element_index(x, y)];
            let b = rho[mesh.element_index(x + 1, y)];
            let c = rho[mesh.element_index(x, y + 1)];
            let d = rho[mesh.element_index(x + 1, y + 1)];
            let q = (a + d - b - c) * half;
            acc += q * q;
        }
    }
    Ok(acc / T::lit(((nelx - 1) * (nely - 1)) as f64))
}

/// Share of elements with density strictly inside [`GRAY_BAND`].
pub fn gray_fraction<T: Scalar>(rho: &[T]) -> T {
    gray_fraction_in(rho, T::lit(GRAY_BAND.0), T::lit(GRAY_BAND.1))
}

pub fn gray_fraction_in<T: Scalar>(rho: &[T], lo: T, hi: T) -> T {
    if rho.is_empty() {
        return T::zero();
    }
    let gray = rho.iter().filter(|&&r| r > lo && r < hi).count();
    T::lit(gray as f64) / T::lit(rho.len() as f64)
}

/// `max_i |Σ_j h_ij − 1|` over the normalized kernel weights.
pub fn verify_partition_of_unity<T: Scalar>(kernel: &FilterKernel<T>) -> T {
    (0..kernel.len())
        .map(|i| {
            let s: T = kernel.normalized_weights(i).map(|(_, h)| h).sum();
            (s - T::one()).abs()
        })
        .fold(T::zero(), T::max)
}
