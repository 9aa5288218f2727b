use super::element::{element_stiffness, ElementMatrix};
use super::mesh::GridMesh;
use super::model::{DisplacementField, ElastParams, LoadCase};
use super::skyline::Skyline;
use crate::error::{check_len, Result, TopOptError};
use crate::scalar::Scalar;

const FIXED: usize = usize::MAX;

/// Order in which free DOFs are numbered inside the reduced system.
///
/// The choice only affects the profile of the factor and never the solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DofOrdering {
    /// Sweep along the shorter side of the grid (smallest bandwidth).
    #[default]
    Auto,
    ColumnMajor,
    RowMajor,
    /// Column-major, last node first.
    Reversed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LinearSolver {
    /// Skyline Cholesky factorization with residual-driven refinement.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients, capped at `10 · n` iterations.
    Pcg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T = f64> {
    pub solver: LinearSolver,
    pub ordering: DofOrdering,
    /// Relative residual `‖K u − f‖ / ‖f‖` required on the reduced system.
    pub tolerance: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            solver: LinearSolver::default(),
            ordering: DofOrdering::default(),
            tolerance: T::solve_tolerance(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats<T> {
    pub relative_residual: T,
    /// Refinement sweeps for Cholesky, CG iterations for PCG.
    pub iterations: usize,
}

/// Reduced stiffness system of one mesh and load case, reusable across
/// density updates.
///
/// Fixed DOFs are eliminated from rows and columns, so they come back as exact
/// zeros in the displacement field.
#[derive(Clone, Debug)]
pub struct StiffnessSystem<T = f64> {
    mesh: GridMesh,
    options: SolverOptions<T>,
    eq_of_dof: Vec<usize>,
    dof_of_eq: Vec<usize>,
    first: Vec<usize>,
    force: Vec<T>,
}

impl<T: Scalar> StiffnessSystem<T> {
    pub fn new(mesh: &GridMesh, lc: &LoadCase<T>, options: SolverOptions<T>) -> Result<Self> {
        lc.validate(mesh)?;
        let node_order = node_order(mesh, options.ordering);
        let mut eq_of_dof = vec![FIXED; mesh.n_dofs()];
        let mut dof_of_eq = Vec::with_capacity(mesh.n_dofs() - lc.fixed_dofs().len());
        for n in node_order {
            for d in [2 * n, 2 * n + 1] {
                if !lc.is_fixed(d) {
                    eq_of_dof[d] = dof_of_eq.len();
                    dof_of_eq.push(d);
                }
            }
        }
        let neq = dof_of_eq.len();
        let mut first: Vec<usize> = (0..neq).collect();
        for e in 0..mesh.n_elements() {
            let eqs = mesh.element_dofs(e).map(|d| eq_of_dof[d]);
            let lo = eqs.iter().copied().filter(|&q| q != FIXED).min();
            if let Some(lo) = lo {
                for &q in eqs.iter().filter(|&&q| q != FIXED) {
                    first[q] = first[q].min(lo);
                }
            }
        }
        let full_force = lc.force_vector(mesh);
        let force = dof_of_eq.iter().map(|&d| full_force[d]).collect();
        Ok(Self {
            mesh: *mesh,
            options,
            eq_of_dof,
            dof_of_eq,
            first,
            force,
        })
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn n_equations(&self) -> usize {
        self.dof_of_eq.len()
    }

    /// Number of stored lower-triangle entries of the factor.
    pub fn profile_size(&self) -> usize {
        self.first.iter().enumerate().map(|(i, &f)| i - f + 1).sum()
    }

    pub fn solve(&self, params: &ElastParams<T>, rho: &[T]) -> Result<DisplacementField<T>> {
        self.solve_with_stats(params, rho).map(|(u, _)| u)
    }

    pub fn solve_with_stats(
        &self,
        params: &ElastParams<T>,
        rho: &[T],
    ) -> Result<(DisplacementField<T>, SolveStats<T>)> {
        params.validate()?;
        check_densities(&self.mesh, rho)?;
        let moduli: Vec<T> = rho.iter().map(|&r| params.modulus(r)).collect();
        let ke = element_stiffness(params.nu)?;
        self.solve_moduli(&ke, &moduli)
    }

    /// Solves with per-element moduli `E_i`, element matrices `E_i · ke`.
    pub fn solve_moduli(
        &self,
        ke: &ElementMatrix<T>,
        moduli: &[T],
    ) -> Result<(DisplacementField<T>, SolveStats<T>)> {
        check_len("element moduli", moduli.len(), self.mesh.n_elements())?;
        let fnorm = norm(&self.force);
        if fnorm == T::zero() {
            // still factor so that a mechanism is reported even without load
            if self.options.solver == LinearSolver::Cholesky {
                self.assemble(ke, moduli).factorize()?;
            }
            let stats = SolveStats {
                relative_residual: T::zero(),
                iterations: 0,
            };
            return Ok((DisplacementField::zeros(&self.mesh), stats));
        }
        let (x, stats) = match self.options.solver {
            LinearSolver::Cholesky => self.solve_direct(ke, moduli, fnorm)?,
            LinearSolver::Pcg => self.solve_pcg(ke, moduli, fnorm)?,
        };
        let mut u = vec![T::zero(); self.mesh.n_dofs()];
        for (&d, &v) in self.dof_of_eq.iter().zip(&x) {
            u[d] = v;
        }
        Ok((DisplacementField::new(&self.mesh, u)?, stats))
    }

    fn assemble(&self, ke: &ElementMatrix<T>, moduli: &[T]) -> Skyline<T> {
        let mut k = Skyline::new(self.first.clone());
        for (e, &modulus) in moduli.iter().enumerate() {
            let eqs = self.mesh.element_dofs(e).map(|d| self.eq_of_dof[d]);
            for (a, &ra) in eqs.iter().enumerate() {
                if ra == FIXED {
                    continue;
                }
                for (b, &rb) in eqs.iter().enumerate() {
                    if rb == FIXED || rb > ra {
                        continue;
                    }
                    let pos = k.position(ra, rb);
                    k.add_at(pos, modulus * ke[a][b]);
                }
            }
        }
        k
    }

    fn solve_direct(
        &self,
        ke: &ElementMatrix<T>,
        moduli: &[T],
        fnorm: T,
    ) -> Result<(Vec<T>, SolveStats<T>)> {
        let mut k = self.assemble(ke, moduli);
        k.factorize()?;
        let mut x = self.force.clone();
        k.solve_in_place(&mut x);

        let tol = self.options.tolerance;
        let mut residual = self.residual(ke, moduli, &x);
        let mut rel = norm(&residual) / fnorm;
        let mut sweeps = 0;
        while !(rel <= tol) && sweeps < 3 {
            k.solve_in_place(&mut residual);
            for (xi, di) in x.iter_mut().zip(&residual) {
                *xi -= *di;
            }
            residual = self.residual(ke, moduli, &x);
            rel = norm(&residual) / fnorm;
            sweeps += 1;
        }
        if !(rel <= tol) {
            return Err(TopOptError::Numerical {
                message: "direct solve did not meet the residual tolerance".into(),
                residual: rel.to_f64_lossy(),
            });
        }
        Ok((
            x,
            SolveStats {
                relative_residual: rel,
                iterations: sweeps,
            },
        ))
    }

    fn solve_pcg(
        &self,
        ke: &ElementMatrix<T>,
        moduli: &[T],
        fnorm: T,
    ) -> Result<(Vec<T>, SolveStats<T>)> {
        let n = self.n_equations();
        let mut diag = vec![T::zero(); n];
        for (e, &modulus) in moduli.iter().enumerate() {
            for (a, d) in self.mesh.element_dofs(e).iter().enumerate() {
                let q = self.eq_of_dof[*d];
                if q != FIXED {
                    diag[q] += modulus * ke[a][a];
                }
            }
        }
        if diag.iter().any(|&d| !(d > T::zero())) {
            return Err(TopOptError::Structural(
                "non-positive diagonal in reduced stiffness".into(),
            ));
        }
        let tol = self.options.tolerance;
        let mut x = vec![T::zero(); n];
        let mut r = self.force.clone();
        let mut z: Vec<T> = r.iter().zip(&diag).map(|(&ri, &di)| ri / di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let cap = 10 * n;
        let mut rel = norm(&r) / fnorm;
        for it in 0..cap {
            let q = self.apply(ke, moduli, &p);
            let pq = dot(&p, &q);
            if !(pq > T::zero()) {
                return Err(TopOptError::Numerical {
                    message: format!("conjugate gradients stagnated after {it} iterations"),
                    residual: rel.to_f64_lossy(),
                });
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            rel = norm(&r) / fnorm;
            if rel <= tol {
                // recompute the true residual to guard against drift
                let true_rel = norm(&self.residual(ke, moduli, &x)) / fnorm;
                if true_rel <= tol {
                    return Ok((
                        x,
                        SolveStats {
                            relative_residual: true_rel,
                            iterations: it + 1,
                        },
                    ));
                }
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(TopOptError::Numerical {
            message: format!("conjugate gradients did not converge in {cap} iterations"),
            residual: rel.to_f64_lossy(),
        })
    }

    /// Reduced matrix-vector product, element by element.
    fn apply(&self, ke: &ElementMatrix<T>, moduli: &[T], x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        for (e, &modulus) in moduli.iter().enumerate() {
            let eqs = self.mesh.element_dofs(e).map(|d| self.eq_of_dof[d]);
            let xe = eqs.map(|q| if q == FIXED { T::zero() } else { x[q] });
            for (a, &ra) in eqs.iter().enumerate() {
                if ra == FIXED {
                    continue;
                }
                let mut s = T::zero();
                for (k, xb) in ke[a].iter().zip(&xe) {
                    s += *k * *xb;
                }
                y[ra] += modulus * s;
            }
        }
        y
    }

    fn residual(&self, ke: &ElementMatrix<T>, moduli: &[T], x: &[T]) -> Vec<T> {
        let mut r = self.apply(ke, moduli, x);
        for (ri, &fi) in r.iter_mut().zip(&self.force) {
            *ri -= fi;
        }
        r
    }
}

/// One-shot assembly and solve of `K(ρ) U = F` with default solver options.
pub fn assemble_and_solve<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    rho: &[T],
    lc: &LoadCase<T>,
) -> Result<DisplacementField<T>> {
    StiffnessSystem::new(mesh, lc, SolverOptions::default())?.solve(params, rho)
}

pub(crate) fn check_densities<T: Scalar>(mesh: &GridMesh, rho: &[T]) -> Result<()> {
    check_len("density field", rho.len(), mesh.n_elements())?;
    if let Some((i, r)) = rho
        .iter()
        .enumerate()
        .find(|(_, &r)| !(r >= T::zero() && r <= T::one()))
    {
        return Err(TopOptError::Parameter(format!(
            "density {r} of element {i} lies outside [0, 1]"
        )));
    }
    Ok(())
}

fn node_order(mesh: &GridMesh, ordering: DofOrdering) -> Vec<usize> {
    let (nx, ny) = (mesh.nelx() + 1, mesh.nely() + 1);
    let ordering = match ordering {
        DofOrdering::Auto if ny <= nx => DofOrdering::ColumnMajor,
        DofOrdering::Auto => DofOrdering::RowMajor,
        o => o,
    };
    match ordering {
        DofOrdering::ColumnMajor | DofOrdering::Auto => (0..mesh.n_nodes()).collect(),
        DofOrdering::Reversed => (0..mesh.n_nodes()).rev().collect(),
        DofOrdering::RowMajor => (0..ny)
            .flat_map(|y| (0..nx).map(move |x| mesh.node_index(x, y)))
            .collect(),
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
