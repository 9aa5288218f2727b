use crate::error::{Result, TopOptError};
use crate::scalar::Scalar;

pub type ElementMatrix<T> = [[T; 8]; 8];

/// Unit-modulus plane-stress stiffness of a unit-square bilinear quadrilateral.
///
/// Local DOF order follows [`GridMesh::element_dofs`](super::GridMesh::element_dofs).
pub fn element_stiffness<T: Scalar>(nu: T) -> Result<ElementMatrix<T>> {
    if !(nu >= T::zero() && nu < T::lit(0.5)) {
        return Err(TopOptError::Parameter(format!(
            "Poisson ratio must lie in [0, 0.5), got {nu}"
        )));
    }
    let l = T::lit;
    let k = [
        l(0.5) - nu / l(6.0),
        l(0.125) + nu / l(8.0),
        -l(0.25) - nu / l(12.0),
        -l(0.125) + l(3.0) * nu / l(8.0),
        -l(0.25) + nu / l(12.0),
        -l(0.125) - nu / l(8.0),
        nu / l(6.0),
        l(0.125) - l(3.0) * nu / l(8.0),
    ];
    const PATTERN: [[usize; 8]; 8] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ];
    let scale = T::one() / (T::one() - nu * nu);
    let mut ke = [[T::zero(); 8]; 8];
    for (row, pat) in ke.iter_mut().zip(PATTERN.iter()) {
        for (v, &p) in row.iter_mut().zip(pat.iter()) {
            *v = scale * k[p];
        }
    }
    Ok(ke)
}

/// `ueᵀ · ke · ue`.
#[inline]
pub fn element_energy<T: Scalar>(ke: &ElementMatrix<T>, ue: &[T; 8]) -> T {
    let mut acc = T::zero();
    for (row, &ui) in ke.iter().zip(ue.iter()) {
        let mut s = T::zero();
        for (&k, &uj) in row.iter().zip(ue.iter()) {
            s += k * uj;
        }
        acc += ui * s;
    }
    acc
}
