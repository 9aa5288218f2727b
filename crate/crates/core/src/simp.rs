//! SIMP compliance minimization with the optimality-criteria update.

use crate::density::DensityField;
use crate::diagnostics::checkerboard_index;
use crate::error::{check_len, Result, TopOptError};
use crate::filter::FilterKernel;
use crate::grid_fem::{
    compliance, element_sensitivities, ElastParams, GridMesh, LoadCase, SolverOptions,
    StiffnessSystem,
};
use crate::record::{IterationRow, OptOutcome, OptRecord, RunError};
use crate::scalar::Scalar;

/// Relative tolerance on `Σρ` accepted from the multiplier bisection.
pub const VOLUME_TOLERANCE: f64 = 1e-6;

const LAMBDA_BRACKET: (f64, f64) = (1e-9, 1e9);
const MAX_BRACKET_DOUBLINGS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpConfig<T = f64> {
    /// Target volume fraction `f`, in `(0, 1]`.
    pub volfrac: T,
    pub move_limit: T,
    /// Damping exponent `η` applied to `B_i`.
    pub eta: T,
    pub max_iters: usize,
    /// Stop once `max |Δρ|` drops below this.
    pub change_tol: T,
    /// Filter radius in element widths; below 1 the filter is the identity.
    pub r_min: T,
    /// Lower density bound.
    pub rho_min: T,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> SimpConfig<T> {
    pub fn new(volfrac: T, r_min: T) -> Self {
        Self {
            volfrac,
            move_limit: T::lit(0.2),
            eta: T::lit(0.5),
            max_iters: 200,
            change_tol: T::lit(0.01),
            r_min,
            rho_min: T::lit(1e-3),
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TopOptError::Parameter(m));
        let (zero, one) = (T::zero(), T::one());
        if !(self.volfrac > zero && self.volfrac <= one) {
            return bad(format!("volfrac must lie in (0, 1], got {}", self.volfrac));
        }
        if !(self.move_limit > zero && self.move_limit <= one) {
            return bad(format!(
                "move limit must lie in (0, 1], got {}",
                self.move_limit
            ));
        }
        if !(self.eta > zero && self.eta <= one) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.rho_min > zero && self.rho_min < one) {
            return bad(format!("rho_min must lie in (0, 1), got {}", self.rho_min));
        }
        if self.volfrac < self.rho_min {
            return bad(format!("volfrac {} is below rho_min", self.volfrac));
        }
        if !(self.change_tol > zero) {
            return bad(format!(
                "change_tol must be positive, got {}",
                self.change_tol
            ));
        }
        if !(self.r_min > zero) {
            return bad(format!("r_min must be positive, got {}", self.r_min));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        Ok(())
    }
}

/// The clamped update `clamp(ρ_i B_i^η)` for a fixed multiplier `λ`, with
/// `B_i = −dc_i / (λ dv_i)`.
///
/// The resulting volume is non-increasing in `λ`, which is what the bisection
/// in [`oc_update`] relies on.
pub fn oc_candidate<T: Scalar>(
    rho: &[T],
    dc: &[T],
    dv: &[T],
    config: &SimpConfig<T>,
    lambda: T,
) -> Vec<T> {
    let m = config.move_limit;
    rho.iter()
        .zip(dc)
        .zip(dv)
        .map(|((&r, &d), &v)| {
            let b = (-d / (lambda * v)).max(T::zero());
            let lower = config.rho_min.max(r - m);
            let upper = T::one().min(r + m);
            (r * b.powf(config.eta)).max(lower).min(upper)
        })
        .collect()
}

/// Optimality-criteria update meeting `Σρ_new = f · N`.
///
/// The multiplier is located by geometric bisection starting from
/// `[1e-9, 1e9]`; the bracket is widened by doubling when it does not
/// contain the root.
pub fn oc_update<T: Scalar>(
    rho: &[T],
    dc: &[T],
    dv: &[T],
    config: &SimpConfig<T>,
) -> Result<DensityField<T>> {
    let n = rho.len();
    check_len("sensitivity vector", dc.len(), n)?;
    check_len("volume sensitivity vector", dv.len(), n)?;
    if n == 0 {
        return Err(TopOptError::Parameter("empty density field".into()));
    }
    if let Some(v) = dv.iter().find(|&&v| !(v > T::zero())) {
        return Err(TopOptError::Parameter(format!(
            "volume sensitivities must be positive, got {v}"
        )));
    }
    let target = config.volfrac * T::lit(n as f64);
    let tol = T::lit(VOLUME_TOLERANCE) * target;
    let m = config.move_limit;
    let min_vol: T = rho.iter().map(|&r| config.rho_min.max(r - m)).sum();
    let max_vol: T = rho.iter().map(|&r| T::one().min(r + m)).sum();
    if min_vol > target + tol || max_vol < target - tol {
        return Err(TopOptError::Constraint(format!(
            "volume target {target} outside the reachable range [{min_vol}, {max_vol}]"
        )));
    }

    let volume = |lambda: T| -> T { oc_candidate(rho, dc, dv, config, lambda).into_iter().sum() };
    let two = T::lit(2.0);
    let mut lo = T::lit(LAMBDA_BRACKET.0);
    let mut hi = T::lit(LAMBDA_BRACKET.1);
    let mut doublings = 0;
    while volume(lo) < target - tol {
        lo /= two;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || lo == T::zero() {
            return Err(TopOptError::Numerical {
                message: "multiplier bisection could not bracket the volume target from below"
                    .into(),
                residual: (volume(lo) - target).to_f64_lossy(),
            });
        }
    }
    doublings = 0;
    while volume(hi) > target + tol {
        hi *= two;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(TopOptError::Numerical {
                message: "multiplier bisection could not bracket the volume target from above"
                    .into(),
                residual: (volume(hi) - target).to_f64_lossy(),
            });
        }
    }

    let ratio_tol = T::one() + T::lit(1e-3);
    let stall = T::one() + T::epsilon() * T::lit(4.0);
    loop {
        let mid = (lo * hi).sqrt();
        let candidate = oc_candidate(rho, dc, dv, config, mid);
        let vol: T = candidate.iter().copied().sum();
        let within = (vol - target).abs() <= tol;
        if within && hi / lo < ratio_tol {
            return Ok(DensityField::from(candidate));
        }
        if hi / lo <= stall {
            if within {
                return Ok(DensityField::from(candidate));
            }
            return Err(TopOptError::Numerical {
                message: "multiplier bisection stalled before meeting the volume target".into(),
                residual: ((vol - target) / target).to_f64_lossy(),
            });
        }
        if vol > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Runs SIMP from the uniform design `ρ = f`.
pub fn run_simp<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    lc: &LoadCase<T>,
    config: &SimpConfig<T>,
) -> Result<OptOutcome<T>, RunError<T>> {
    run_simp_with(mesh, params, lc, config, |_| {})
}

/// Like [`run_simp`], calling `observer` after every recorded iteration.
pub fn run_simp_with<T: Scalar>(
    mesh: &GridMesh,
    params: &ElastParams<T>,
    lc: &LoadCase<T>,
    config: &SimpConfig<T>,
    mut observer: impl FnMut(&IterationRow<T>),
) -> Result<OptOutcome<T>, RunError<T>> {
    let mut record = OptRecord::new();
    let setup = || -> Result<_> {
        config.validate()?;
        params.validate()?;
        let kernel = FilterKernel::build(mesh, config.r_min)?;
        let system = StiffnessSystem::new(mesh, lc, config.solver)?;
        Ok((kernel, system))
    };
    let (kernel, system) = setup().map_err(|e| RunError::new(e, OptRecord::new()))?;

    let dv = vec![T::one(); mesh.n_elements()];
    let mut rho = DensityField::uniform(mesh, config.volfrac);
    let mut converged = false;
    for iter in 1..=config.max_iters {
        let step = || -> Result<(T, DensityField<T>)> {
            let u = system.solve(params, &rho)?;
            let c = compliance(mesh, params, &rho, &u)?;
            let dc = element_sensitivities(mesh, params, &rho, &u)?;
            let dc = kernel.filter_sensitivities(&rho, &dc)?;
            Ok((c, oc_update(&rho, &dc, &dv, config)?))
        };
        let (c, next) = match step() {
            Ok(v) => v,
            Err(e) => return Err(RunError::new(e, record)),
        };
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
        rho = next;
        if change < config.change_tol {
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

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(volfrac: f64) -> SimpConfig<f64> {
        SimpConfig::new(volfrac, 1.3)
    }

    #[test]
    fn uniform_fixed_point() {
        let rho = vec![0.4; 10];
        let dc = vec![-2.5; 10];
        let dv = vec![1.0; 10];
        let out = oc_update(&rho, &dc, &dv, &cfg(0.4)).unwrap();
        for v in out.iter() {
            assert!((v - 0.4).abs() < 1e-6);
        }
    }

    #[test]
    fn unreachable_volume_is_constraint_error() {
        // all elements at 0.5 can move at most to 0.7
        let rho = vec![0.5; 4];
        let err = oc_update(&rho, &[-1.0; 4], &[1.0; 4], &cfg(0.9)).unwrap_err();
        assert!(matches!(err, TopOptError::Constraint(_)));
    }

    #[test]
    fn zero_sensitivities_cannot_bracket() {
        // B = 0 everywhere drives every element to its lower bound
        let rho = vec![0.5; 4];
        let err = oc_update(&rho, &[0.0; 4], &[1.0; 4], &cfg(0.5)).unwrap_err();
        assert!(matches!(err, TopOptError::Numerical { .. }));
    }

    #[test]
    fn full_volume_stays_solid() {
        let rho = vec![1.0; 6];
        let dc: Vec<f64> = (0..6).map(|i| -(i as f64) - 0.5).collect();
        let out = oc_update(&rho, &dc, &[1.0; 6], &cfg(1.0)).unwrap();
        assert!(out.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.4).validate().is_ok());
        assert!(cfg(0.0).validate().is_err());
        assert!(cfg(1.2).validate().is_err());
        let mut c = cfg(0.4);
        c.eta = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(0.4);
        c.move_limit = 1.5;
        assert!(c.validate().is_err());
        let mut c = cfg(0.4);
        c.r_min = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(oc_update(&[0.5; 3], &[-1.0; 2], &[1.0; 3], &cfg(0.5)).is_err());
    }
}
