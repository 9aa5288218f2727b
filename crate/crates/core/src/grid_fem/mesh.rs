use crate::error::{Result, TopOptError};
use crate::scalar::Scalar;

/// Regular grid of unit-square bilinear elements.
///
/// Elements and nodes are numbered column-major from the top-left corner with
/// the row index growing downward: element `(ex, ey)` has index
/// `ex * nely + ey` and node `(nx, ny)` has index `nx * (nely + 1) + ny`.
/// Node `n` owns DOFs `2n` (horizontal) and `2n + 1` (vertical, positive up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridMesh {
    nelx: usize,
    nely: usize,
}

impl GridMesh {
    pub fn new(nelx: usize, nely: usize) -> Result<Self> {
        if nelx == 0 || nely == 0 {
            return Err(TopOptError::Parameter(format!(
                "grid must have at least one element per side, got {nelx}x{nely}"
            )));
        }
        Ok(Self { nelx, nely })
    }

    #[inline]
    pub fn nelx(&self) -> usize {
        self.nelx
    }

    #[inline]
    pub fn nely(&self) -> usize {
        self.nely
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.nelx * self.nely
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        (self.nelx + 1) * (self.nely + 1)
    }

    #[inline]
    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        debug_assert!(ex < self.nelx && ey < self.nely);
        ex * self.nely + ey
    }

    /// Column and row of element `e`.
    #[inline]
    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e / self.nely, e % self.nely)
    }

    #[inline]
    pub fn node_index(&self, nx: usize, ny: usize) -> usize {
        debug_assert!(nx <= self.nelx && ny <= self.nely);
        nx * (self.nely + 1) + ny
    }

    #[inline]
    pub fn node_coords(&self, n: usize) -> (usize, usize) {
        (n / (self.nely + 1), n % (self.nely + 1))
    }

    /// Corner nodes of element `e`, counter-clockwise from bottom-left:
    /// bottom-left, bottom-right, top-right, top-left.
    #[inline]
    pub fn element_nodes(&self, e: usize) -> [usize; 4] {
        let (ex, ey) = self.element_coords(e);
        let top_left = self.node_index(ex, ey);
        let top_right = self.node_index(ex + 1, ey);
        [top_left + 1, top_right + 1, top_right, top_left]
    }

    /// The eight DOFs of element `e` in the local order of the element stiffness matrix.
    #[inline]
    pub fn element_dofs(&self, e: usize) -> [usize; 8] {
        let n = self.element_nodes(e);
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    }

    /// Center of element `e` in grid units, `(ex + 0.5, ey + 0.5)`.
    pub fn element_center<T: Scalar>(&self, e: usize) -> (T, T) {
        let (ex, ey) = self.element_coords(e);
        (T::lit(ex as f64 + 0.5), T::lit(ey as f64 + 0.5))
    }

    /// Euclidean distance between the centers of elements `i` and `j`.
    pub fn element_distance<T: Scalar>(&self, i: usize, j: usize) -> T {
        let (xi, yi) = self.element_coords(i);
        let (xj, yj) = self.element_coords(j);
        let dx = T::lit(xi as f64 - xj as f64);
        let dy = T::lit(yi as f64 - yj as f64);
        dx.hypot(dy)
    }

    /// DOFs of every node on the left edge (`nx = 0`), both directions.
    pub fn left_edge_dofs(&self) -> Vec<usize> {
        (0..=self.nely)
            .flat_map(|ny| {
                let n = self.node_index(0, ny);
                [2 * n, 2 * n + 1]
            })
            .collect()
    }
}
