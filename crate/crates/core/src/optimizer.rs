//! Numerical maximization of accessible information over POVMs.
//!
//! The objective is the Shannon mutual information between Eve's bit label
//! and the measurement outcome. Each restart starts from a random valid
//! POVM and climbs by a fixed-point step: every element is conjugated with
//! the exponential of its own reward operator
//!
//! > Rₖ = Σⱼ pⱼ ρⱼ · log₂[ p(j|k) / p(j) ],
//!
//! then the set is projected back onto valid POVMs. The step size
//! backtracks whenever a move would lower the objective, which makes the
//! ascent monotone; the run stops when one accepted step gains less than
//! `tol` bits. Restarts are independent seeded streams, so results are
//! reproducible and independent of scheduling.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eavesdrop::{mutual_information_from_joint, EveEnsemble};
use crate::quantum::Povm;
use crate::{Error, Result, C64};

/// Settings for [`optimize_accessible_info`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Number of POVM elements (2..=16).
    pub n_elements: usize,
    /// Iteration budget per restart (the rank-1 refinement pass gets the
    /// same budget again).
    pub max_iter: usize,
    /// Stop once an accepted step improves the information by less than
    /// this many bits.
    pub tol: f64,
    /// Number of independent random initializations.
    pub restarts: usize,
    /// Root seed; restart `i` draws from stream `i` of this seed.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_elements: 4,
            max_iter: 2000,
            tol: 1e-10,
            restarts: 16,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.n_elements) {
            return Err(Error::ParamOutOfRange {
                name: "n_elements",
                value: self.n_elements as f64,
                min: 2.0,
                max: 16.0,
            });
        }
        if self.tol <= 0.0 {
            return Err(Error::ParamOutOfRange {
                name: "tol",
                value: self.tol,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if self.restarts == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(())
    }
}

/// Result of one seeded restart.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub info: f64,
    pub povm: Povm,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted objective values, one per iteration; nondecreasing.
    pub info_trace: Vec<f64>,
}

/// Best result across all restarts.
#[derive(Debug, Clone)]
pub struct OptimizationReport {
    pub best_info: f64,
    pub best_povm: Povm,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub converged: bool,
}

const STEP_FLOOR: f64 = 1e-8;
const JOINT_FLOOR: f64 = 1e-300;

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
fn eigen_map(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(m.clone());
    let dim = m.nrows();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        out += (v * v.adjoint()) * C64::new(f(lambda), 0.0);
    }
    out
}

/// Clips negative eigenvalues of each operator to zero, then symmetrically
/// rescales the set so it sums to the identity: Mₖ ← S^{−1/2} Mₖ S^{−1/2}.
pub fn project_to_valid_povm(raw: &[DMatrix<C64>]) -> Result<Povm> {
    let Some(first) = raw.first() else {
        return Err(Error::EmptyInput);
    };
    let dim = first.nrows();
    let mut clipped = Vec::with_capacity(raw.len());
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    for m in raw {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: m.nrows(),
            });
        }
        let pos = eigen_map(&hermitize(m), |l| l.max(0.0));
        sum += &pos;
        clipped.push(pos);
    }
    let min_eig = SymmetricEigen::new(sum.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-10 {
        return Err(Error::SingularElementSum);
    }
    let s_inv_half = eigen_map(&sum, |l| 1.0 / l.sqrt());
    Povm::new(
        clipped
            .iter()
            .map(|m| hermitize(&(&s_inv_half * m * &s_inv_half)))
            .collect(),
    )
}

/// Joint distribution p(j,k) = ½·Tr(ρⱼ Mₖ) as rows per bit value.
fn joint_distribution(ens: &EveEnsemble, povm: &Povm) -> Vec<Vec<f64>> {
    ens.states()
        .iter()
        .map(|rho| {
            povm.outcome_probabilities(rho)
                .expect("dimensions checked at entry")
                .into_iter()
                .map(|p| 0.5 * p)
                .collect()
        })
        .collect()
}

/// Reward operators Rₖ and the current objective value.
fn reward_operators(ens: &EveEnsemble, povm: &Povm) -> (Vec<DMatrix<C64>>, f64) {
    let joint = joint_distribution(ens, povm);
    let info = mutual_information_from_joint(&joint);
    let p_label: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let p_outcome: Vec<f64> = (0..povm.len())
        .map(|k| joint.iter().map(|row| row[k]).sum())
        .collect();
    let rewards = (0..povm.len())
        .map(|k| {
            let mut r = DMatrix::<C64>::zeros(povm.dim(), povm.dim());
            for (j, rho) in ens.states().iter().enumerate() {
                let p_jk = joint[j][k];
                if p_jk > JOINT_FLOOR {
                    let weight = 0.5 * (p_jk / (p_label[j] * p_outcome[k])).log2();
                    r += rho.matrix() * C64::new(weight, 0.0);
                }
            }
            r
        })
        .collect();
    (rewards, info)
}

fn ascend(
    ens: &EveEnsemble,
    mut povm: Povm,
    mut info: f64,
    max_iter: usize,
    tol: f64,
    trace: &mut Vec<f64>,
) -> (Povm, f64, usize, bool) {
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let (rewards, _) = reward_operators(ens, &povm);
        let mut accepted = false;
        while step >= STEP_FLOOR {
            let raw: Vec<DMatrix<C64>> = povm
                .elements()
                .iter()
                .zip(&rewards)
                .map(|(m, r)| {
                    let g = eigen_map(r, |l| (step * l).exp());
                    &g * m * &g
                })
                .collect();
            let Ok(candidate) = project_to_valid_povm(&raw) else {
                step *= 0.5;
                continue;
            };
            let candidate_info =
                mutual_information_from_joint(&joint_distribution(ens, &candidate));
            if candidate_info >= info - 1e-15 {
                let gain = candidate_info - info;
                povm = candidate;
                info = info.max(candidate_info);
                trace.push(info);
                accepted = true;
                if gain < tol {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    (povm, info, iterations, converged)
}

/// Splits every element of rank ≥ 2 into its eigenprojector pieces.
/// Element sums are preserved exactly, so the result is still a valid POVM.
fn split_to_rank_one(povm: &Povm) -> (Povm, bool) {
    let mut elements = Vec::new();
    let mut split_any = false;
    for m in povm.elements() {
        let eig = SymmetricEigen::new(m.clone());
        let significant: Vec<usize> = (0..m.nrows())
            .filter(|&i| eig.eigenvalues[i] > 1e-10)
            .collect();
        if significant.len() <= 1 {
            elements.push(m.clone());
            continue;
        }
        split_any = true;
        for &i in &significant {
            let v = eig.eigenvectors.column(i);
            elements.push((v * v.adjoint()) * C64::new(eig.eigenvalues[i], 0.0));
        }
    }
    match Povm::new(elements) {
        Ok(p) if split_any => (p, true),
        _ => (povm.clone(), false),
    }
}

/// One seeded restart: random initialization, monotone ascent, then a
/// rank-1 refinement pass.
pub fn run_restart(
    ens: &EveEnsemble,
    cfg: &OptimizerConfig,
    index: usize,
) -> Result<RestartOutcome> {
    cfg.validate()?;
    let dim = ens.states()[0].dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);

    // Standard-normal entries give a rotation-invariant start distribution.
    let mut normal = move || -> f64 {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let raw: Vec<DMatrix<C64>> = (0..cfg.n_elements)
        .map(|_| {
            let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(normal(), normal()));
            &g * g.adjoint()
        })
        .collect();
    let povm = project_to_valid_povm(&raw)?;
    let info = mutual_information_from_joint(&joint_distribution(ens, &povm));

    let mut trace = vec![info];
    let (povm, info, iters, converged) = ascend(ens, povm, info, cfg.max_iter, cfg.tol, &mut trace);

    // Accessible-information optima are reachable with rank-1 elements;
    // splitting and re-optimizing once sharpens agreement with them.
    let (povm, info, iters, converged) = match split_to_rank_one(&povm) {
        (split, true) => {
            let split_info = mutual_information_from_joint(&joint_distribution(ens, &split));
            let start = split_info.max(info);
            trace.push(start);
            let (p, i, extra, c) = ascend(ens, split, start, cfg.max_iter, cfg.tol, &mut trace);
            (p, i, iters + extra, c)
        }
        (same, false) => (same, info, iters, converged),
    };

    Ok(RestartOutcome {
        info,
        povm,
        iterations: iters,
        converged,
        info_trace: trace,
    })
}

/// Maximizes the ensemble's accessible information: `cfg.restarts` seeded
/// restarts (concurrent under the `parallel` feature), deterministic argmax
/// with the restart index as tie-breaker.
pub fn optimize_accessible_info(
    ens: &EveEnsemble,
    cfg: &OptimizerConfig,
) -> Result<OptimizationReport> {
    cfg.validate()?;
    let indices: Vec<usize> = (0..cfg.restarts).collect();
    let outcomes = crate::sweep::map_grid(&indices, |&i| run_restart(ens, cfg, i))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (restart_index, best) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|(bi, b), (i, o)| if o.info > b.info { (i, o) } else { (bi, b) })
        .expect("restarts >= 1");
    Ok(OptimizationReport {
        best_info: best.info,
        best_povm: best.povm,
        iterations_used: best.iterations,
        restart_index,
        converged: best.converged,
    })
}

/// One row of [`sweep_optimal_info`].
#[derive(Debug, Clone)]
pub struct OptimalInfoPoint {
    pub r: f64,
    pub d: f64,
    pub info_numeric: f64,
    pub info_closed_form: f64,
    /// info_numeric − info_closed_form.
    pub gap: f64,
    pub converged: bool,
}

/// Optimizes the X-basis ensemble on every grid point and compares against
/// the closed-form optimal measurement.
pub fn sweep_optimal_info(r_grid: &[f64], cfg: &OptimizerConfig) -> Result<Vec<OptimalInfoPoint>> {
    let rows = crate::sweep::map_grid(r_grid, |&r| -> Result<OptimalInfoPoint> {
        let d = crate::cloner::disturbance(r)?;
        let ens = crate::eavesdrop::eve_ensemble(r, crate::cloner::Basis::X)?;
        let closed = crate::eavesdrop::mutual_information(
            &ens,
            &crate::eavesdrop::optimal_povm(d, crate::cloner::Basis::X)?,
        )?;
        let report = optimize_accessible_info(&ens, cfg)?;
        Ok(OptimalInfoPoint {
            r,
            d,
            info_numeric: report.best_info,
            info_closed_form: closed,
            gap: report.best_info - closed,
            converged: report.converged,
        })
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::Basis;
    use crate::eavesdrop::{eve_ensemble, mutual_information, optimal_povm, EveEnsemble};
    use crate::quantum::{DensityOperator, PureState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn quick_cfg(restarts: usize) -> OptimizerConfig {
        OptimizerConfig {
            restarts,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(OptimizerConfig {
            n_elements: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            n_elements: 17,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(OptimizerConfig {
            restarts: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn identical_states_optimize_to_zero() {
        let rho = DensityOperator::maximally_mixed(4);
        let ens = EveEnsemble::new(Basis::X, [rho.clone(), rho]).unwrap();
        let report = optimize_accessible_info(&ens, &quick_cfg(3)).unwrap();
        assert_abs_diff_eq!(report.best_info, 0.0, epsilon = 1e-12);
        assert!(report.converged);
    }

    #[test]
    fn orthogonal_pure_states_reach_one_bit() {
        let s00 = PureState::basis(2, 0b00).projector().unwrap();
        let s11 = PureState::basis(2, 0b11).projector().unwrap();
        let ens = EveEnsemble::new(Basis::X, [s00, s11]).unwrap();
        let report = optimize_accessible_info(&ens, &quick_cfg(4)).unwrap();
        assert_abs_diff_eq!(report.best_info, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn cross_validates_closed_form_at_max_disturbance() {
        // The central numerical claim: the optimizer reproduces the
        // closed-form optimal information.
        let ens = eve_ensemble(1.0 / 3.0, Basis::X).unwrap();
        let closed = mutual_information(&ens, &optimal_povm(1.0 / 6.0, Basis::X).unwrap()).unwrap();
        let report = optimize_accessible_info(&ens, &quick_cfg(8)).unwrap();
        assert!(
            report.best_info >= closed - 1e-4,
            "numeric {} vs closed {closed}",
            report.best_info
        );
        assert!(report.best_info <= closed + 1e-3);
    }

    #[test]
    fn projection_is_identity_on_valid_povms() {
        let conv = crate::eavesdrop::conventional_povm();
        let projected = project_to_valid_povm(conv.elements()).unwrap();
        for (a, b) in projected.elements().iter().zip(conv.elements()) {
            assert!((a - b).norm() <= 1e-12);
        }

        let id = nalgebra::DMatrix::<C64>::identity(3, 3);
        let single = project_to_valid_povm(std::slice::from_ref(&id)).unwrap();
        assert!((&single.elements()[0] - id).norm() <= 1e-12);
    }

    #[test]
    fn projection_rejects_singular_sums() {
        let zero = nalgebra::DMatrix::<C64>::zeros(2, 2);
        assert_eq!(
            project_to_valid_povm(&[zero.clone(), zero]),
            Err(Error::SingularElementSum)
        );
    }

    #[test]
    fn determinism_for_fixed_seed() {
        let ens = eve_ensemble(0.2, Basis::X).unwrap();
        let cfg = quick_cfg(4);
        let a = optimize_accessible_info(&ens, &cfg).unwrap();
        let b = optimize_accessible_info(&ens, &cfg).unwrap();
        assert_eq!(a.best_info.to_bits(), b.best_info.to_bits());
        assert_eq!(a.restart_index, b.restart_index);
        assert_eq!(a.iterations_used, b.iterations_used);
        for (x, y) in a.best_povm.elements().iter().zip(b.best_povm.elements()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn ascent_is_monotone_within_restart() {
        let ens = eve_ensemble(0.15, Basis::X).unwrap();
        for index in 0..3 {
            let outcome = run_restart(&ens, &quick_cfg(1), index).unwrap();
            for w in outcome.info_trace.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-12,
                    "trace decreased: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn element_count_has_converged_at_four() {
        for &r in &[0.1, 1.0 / 3.0] {
            let ens = eve_ensemble(r, Basis::X).unwrap();
            let four = optimize_accessible_info(&ens, &quick_cfg(6)).unwrap();
            let eight = optimize_accessible_info(
                &ens,
                &OptimizerConfig {
                    n_elements: 8,
                    restarts: 6,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(
                (four.best_info - eight.best_info).abs() < 1e-4,
                "r={r}: 4 elements {} vs 8 elements {}",
                four.best_info,
                eight.best_info
            );
        }
    }

    #[test]
    fn sweep_reports_tight_gaps() {
        let grid = [0.0, 0.1, 0.25, 1.0 / 3.0];
        let rows = sweep_optimal_info(&grid, &quick_cfg(6)).unwrap();
        assert_abs_diff_eq!(rows[0].info_numeric, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[0].gap, 0.0, epsilon = 1e-9);
        for row in &rows {
            assert!(row.gap >= -1e-4, "r={}: gap {}", row.r, row.gap);
            assert!(row.gap <= 1e-3, "r={}: gap {}", row.r, row.gap);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn projection_yields_valid_povms(
            entries in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3 * 16),
        ) {
            let raw: Vec<nalgebra::DMatrix<C64>> = entries
                .chunks(16)
                .map(|chunk| {
                    let g = nalgebra::DMatrix::from_iterator(
                        4, 4, chunk.iter().map(|&(a, b)| C64::new(a, b)),
                    );
                    &g * g.adjoint()
                })
                .collect();
            match project_to_valid_povm(&raw) {
                Ok(povm) => prop_assert_eq!(povm.len(), 3), // validity enforced by Povm::new
                Err(Error::SingularElementSum) => {}        // explicitly allowed degenerate case
                Err(e) => prop_assert!(false, "unexpected error {:?}", e),
            }
        }
    }
}
