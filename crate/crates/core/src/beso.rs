//! Soft-kill bi-directional evolutionary optimization with discrete densities.
//!
//! Elements are either solid (`ρ = 1`) or void (`ρ = rho_min`, keeping a
//! small stiffness so the system stays nonsingular). Each iteration ranks
//! elements by their filtered, history-averaged sensitivity numbers and keeps
//! the best-ranked ones solid while the solid count shrinks geometrically
//! toward the target volume.

use std::cmp::Ordering;

use crate::density::DensityField;
use crate::diagnostics::checkerboard_index;
use crate::error::{check_len, Result, TopOptError};
use crate::filter::FilterKernel;
use crate::grid_fem::{
    compliance, element_energies, DisplacementField, ElastParams, GridMesh, LoadCase,
    SolverOptions, StiffnessSystem,
};
use crate::record::{IterationRow, OptOutcome, OptRecord, RunError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesoConfig<T = f64> {
    /// Target volume fraction `f`, in `(0, 1)`.
    pub volfrac: T,
    /// Fraction of the current volume removed per iteration until the target is met.
    pub evolution_rate: T,
    pub rho_min: T,
    pub r_min: T,
    pub max_iters: usize,
    /// Number of recent compliances compared by the stability test; must be even.
    pub stability_window: usize,
    /// Relative compliance variation below which the design counts as stable.
    pub stability_tol: T,
    /// Literal one-in/one-out rule instead of threshold ranking.
    pub strict_swap: bool,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> BesoConfig<T> {
    pub fn new(volfrac: T, r_min: T) -> Self {
        Self {
            volfrac,
            evolution_rate: T::lit(0.02),
            rho_min: T::lit(1e-3),
            r_min,
            max_iters: 200,
            stability_window: 10,
            stability_tol: T::lit(1e-3),
            strict_swap: false,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TopOptError::Parameter(m));
        let (zero, one) = (T::zero(), T::one());
        if !(self.volfrac > zero && self.volfrac < one) {
            return bad(format!("volfrac must lie in (0, 1), got {}", self.volfrac));
        }
        if !(self.evolution_rate >= zero && self.evolution_rate < one) {
            return bad(format!(
                "evolution rate must lie in [0, 1), got {}",
                self.evolution_rate
            ));
        }
        if !(self.rho_min > zero && self.rho_min < one) {
            return bad(format!("rho_min must lie in (0, 1), got {}", self.rho_min));
        }
        if !(self.r_min > zero) {
            return bad(format!("r_min must be positive, got {}", self.r_min));
        }
        if self.stability_window < 2 || !self.stability_window.is_multiple_of(2) {
            return bad(format!(
                "stability window must be a positive even number, got {}",
                self.stability_window
            ));
        }
        if !(self.stability_tol > zero) {
            return bad(format!(
                "stability tolerance must be positive, got {}",
                self.stability_tol
            ));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        Ok(())
    }
}

/// Sensitivity numbers: half the element strain energy `½ u_iᵀ k_i u_i` for
/// solid elements, zero for void ones.
pub fn beso_sensitivity<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    rho: &[T],
    u: &DisplacementField<T>,
    rho_min: T,
) -> Result<Vec<T>> {
    check_len("density field", rho.len(), mesh.n_elements())?;
    if let Some((i, r)) = rho
        .iter()
        .enumerate()
        .find(|(_, &r)| r != T::one() && r != rho_min)
    {
        return Err(TopOptError::State(format!(
            "element {i} has non-discrete density {r}"
        )));
    }
    let energies = element_energies(mesh, params.nu, u)?;
    let half = T::lit(0.5);
    Ok(rho
        .iter()
        .zip(&energies)
        .map(|(&r, &w)| {
            if r == T::one() {
                half * params.modulus(r) * w
            } else {
                T::zero()
            }
        })
        .collect())
}

/// Filtered sensitivity numbers of the previous iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensitivityHistory<T = f64> {
    previous: Option<Vec<T>>,
}

impl<T: Scalar> SensitivityHistory<T> {
    pub fn new() -> Self {
        Self { previous: None }
    }

    pub fn previous(&self) -> Option<&[T]> {
        self.previous.as_deref()
    }
}

/// Filters `alpha` and averages it with the previous iteration's filtered
/// numbers; on the first call the average is the filtered field itself.
pub fn beso_smooth<T: Scalar>(
    alpha: &[T],
    kernel: &FilterKernel<T>,
    history: &mut SensitivityHistory<T>,
) -> Result<Vec<T>> {
    let filtered = kernel.filter_field(alpha)?;
    let half = T::lit(0.5);
    let smoothed = match &history.previous {
        Some(prev) => {
            check_len("sensitivity history", prev.len(), filtered.len())?;
            filtered
                .iter()
                .zip(prev)
                .map(|(&a, &b)| half * (a + b))
                .collect()
        }
        None => filtered.clone(),
    };
    history.previous = Some(filtered);
    Ok(smoothed)
}

/// Descending rank order: larger `α̃` first, then currently solid elements,
/// then lower index.
fn ranking<T: Scalar>(rho: &[T], alpha: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&a, &b| {
        alpha[b]
            .partial_cmp(&alpha[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| (rho[b] == T::one()).cmp(&(rho[a] == T::one())))
            .then_with(|| a.cmp(&b))
    });
    order
}

fn solid_count_for<T: Scalar>(target_volume: T, n: usize) -> Result<usize> {
    let rounded = target_volume.round();
    if !(rounded >= T::one()) {
        return Err(TopOptError::Constraint(format!(
            "target volume {target_volume} is below one element"
        )));
    }
    Ok(rounded.to_usize().unwrap_or(n).min(n))
}

/// Threshold update: the `round(target_volume)` best-ranked elements become
/// solid, all others void.
pub fn beso_update<T: Scalar>(
    rho: &[T],
    alpha: &[T],
    target_volume: T,
    rho_min: T,
) -> Result<DensityField<T>> {
    check_len("sensitivity numbers", alpha.len(), rho.len())?;
    let solid = solid_count_for(target_volume, rho.len())?;
    let mut next = vec![rho_min; rho.len()];
    for &i in ranking(rho, alpha).iter().take(solid) {
        next[i] = T::one();
    }
    Ok(DensityField::from(next))
}

/// One-in/one-out update. Moves the solid count one element toward
/// `round(target_volume)`; at the target, swaps the weakest solid element
/// with the strongest void one when that improves the ranking.
pub fn beso_update_strict<T: Scalar>(
    rho: &[T],
    alpha: &[T],
    target_volume: T,
    rho_min: T,
) -> Result<DensityField<T>> {
    check_len("sensitivity numbers", alpha.len(), rho.len())?;
    let target = solid_count_for(target_volume, rho.len())?;
    let is_solid = |i: usize| rho[i] == T::one();
    let order = ranking(rho, alpha);
    let weakest_solid = order.iter().rev().copied().find(|&i| is_solid(i));
    let strongest_void = order.iter().copied().find(|&i| !is_solid(i));
    let count = rho.iter().filter(|&&r| r == T::one()).count();
    let mut next = rho.to_vec();
    match count.cmp(&target) {
        Ordering::Greater => {
            if let Some(i) = weakest_solid {
                next[i] = rho_min;
            }
        }
        Ordering::Less => {
            if let Some(j) = strongest_void {
                next[j] = T::one();
            }
        }
        Ordering::Equal => {
            if let (Some(i), Some(j)) = (weakest_solid, strongest_void) {
                if alpha[j] > alpha[i] {
                    next[i] = rho_min;
                    next[j] = T::one();
                }
            }
        }
    }
    Ok(DensityField::from(next))
}

/// Relative difference between the sums of the latest `window / 2`
/// compliances and the `window / 2` before them; `None` while fewer than
/// `window` values exist.
pub fn compliance_variation<T: Scalar>(compliances: &[T], window: usize) -> Option<T> {
    if window < 2 || compliances.len() < window {
        return None;
    }
    let half = window / 2;
    let tail = &compliances[compliances.len() - window..];
    let older: T = tail[..half].iter().copied().sum();
    let recent: T = tail[half..].iter().copied().sum();
    Some(((recent - older) / recent).abs())
}

/// Runs BESO from the all-solid design.
///
/// The record stores `Uᵀ K U`, twice the BESO objective `½ Uᵀ K U`, so that
/// SIMP and BESO histories are directly comparable.
pub fn run_beso<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    lc: &LoadCase<T>,
    config: &BesoConfig<T>,
) -> Result<OptOutcome<T>, RunError<T>> {
    run_beso_with(mesh, params, lc, config, |_| {})
}

pub fn run_beso_with<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    lc: &LoadCase<T>,
    config: &BesoConfig<T>,
    observer: impl FnMut(&IterationRow<T>),
) -> Result<OptOutcome<T>, RunError<T>> {
    let initial = DensityField::uniform(mesh, T::one());
    run_beso_from(mesh, params, lc, config, initial, observer)
}

/// Runs BESO from a given discrete design; the volume schedule starts at its
/// solid count.
pub fn run_beso_from<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    lc: &LoadCase<T>,
    config: &BesoConfig<T>,
    initial: DensityField<T>,
    mut observer: impl FnMut(&IterationRow<T>),
) -> Result<OptOutcome<T>, RunError<T>> {
    let setup = || -> Result<_> {
        config.validate()?;
        check_len("initial design", initial.len(), mesh.n_elements())?;
        params.validate()?;
        let kernel = FilterKernel::build(mesh, config.r_min)?;
        let system = StiffnessSystem::new(mesh, lc, config.solver)?;
        Ok((kernel, system))
    };
    let (kernel, system) = setup().map_err(|e| RunError::new(e, OptRecord::new()))?;

    let n = mesh.n_elements();
    let final_volume = config.volfrac * T::lit(n as f64);
    let final_count =
        solid_count_for(final_volume, n).map_err(|e| RunError::new(e, OptRecord::new()))?;
    let mut record = OptRecord::new();
    let mut compliances = Vec::new();
    let mut history = SensitivityHistory::new();
    let mut rho = initial;
    let mut volume = T::lit(rho.iter().filter(|&&r| r == T::one()).count() as f64);
    let mut converged = false;

    for iter in 1..=config.max_iters {
        volume = final_volume.max(volume * (T::one() - config.evolution_rate));
        let step = |history: &mut SensitivityHistory<T>| -> Result<(T, DensityField<T>)> {
            let u = system.solve(params, &rho)?;
            let c = compliance(mesh, params, &rho, &u)?;
            let alpha = beso_sensitivity(mesh, params, &rho, &u, config.rho_min)?;
            let alpha = beso_smooth(&alpha, &kernel, history)?;
            let next = if config.strict_swap {
                beso_update_strict(&rho, &alpha, volume, config.rho_min)?
            } else {
                beso_update(&rho, &alpha, volume, config.rho_min)?
            };
            Ok((c, next))
        };
        let (c, next) = match step(&mut history) {
            Ok(v) => v,
            Err(e) => return Err(RunError::new(e, record)),
        };
        let solid_now = rho.iter().filter(|&&r| r == T::one()).count();
        let change = next.max_change(&rho);
        let row = IterationRow {
            iter,
            compliance: c,
            volfrac: next.volume_fraction(),
            change,
            checkerboard_index: checkerboard_index(mesh, &next).unwrap_or(T::zero()),
        };
        observer(&row);
        record.push(row);
        compliances.push(c);
        rho = next;
        let stable = compliance_variation(&compliances, config.stability_window)
            .is_some_and(|v| v < config.stability_tol);
        if solid_now == final_count && stable {
            converged = true;
            break;
        }
    }
    Ok(OptOutcome {
        density: rho,
        record,
        converged,
    })
}
