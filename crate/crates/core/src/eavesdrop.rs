//! The attack analysis layer: Bob's error rate and Eve's information.
//!
//! Eve stores her two clones in quantum memory until the basis is revealed,
//! so for each basis she faces a binary discrimination problem between two
//! four-dimensional states with equal priors. This module provides the QBER
//! model with detector dark counts, the ensembles, the Shannon mutual
//! information of a POVM, the conventional product measurement and the
//! closed-form optimal one.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::cloner::{self, Basis, CloneParams, Party};
use crate::optimizer::OptimizerConfig;
use crate::quantum::{DensityOperator, Povm};
use crate::{Error, Result, C64};

/// Detector model for Bob's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Dark-count probability per detection window.
    pub p_dark: f64,
    /// Probability that Bob detects no photon.
    pub p_no_photon: f64,
}

impl ChannelParams {
    pub fn new(p_dark: f64, p_no_photon: f64) -> Result<Self> {
        for (name, value) in [("p_dark", p_dark), ("p_no_photon", p_no_photon)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParamOutOfRange {
                    name,
                    value,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self {
            p_dark,
            p_no_photon,
        })
    }
}

/// Quantum bit error rate for disturbance `d` under the channel model:
/// [(1−p_B(0))·d + p_B(0)·p_d] / [1 − p_B(0) + 2·p_B(0)·p_d].
///
/// Reduces to `d` when dark counts vanish; saturates at 1/2 when dark
/// counts dominate.
pub fn qber(d: f64, ch: &ChannelParams) -> Result<f64> {
    if !(0.0..=cloner::MAX_DISTURBANCE + 1e-12).contains(&d) {
        return Err(Error::ParamOutOfRange {
            name: "disturbance",
            value: d,
            min: 0.0,
            max: cloner::MAX_DISTURBANCE,
        });
    }
    let denom = 1.0 - ch.p_no_photon + 2.0 * ch.p_no_photon * ch.p_dark;
    if denom <= 0.0 {
        return Err(Error::DegenerateChannel);
    }
    Ok(((1.0 - ch.p_no_photon) * d + ch.p_no_photon * ch.p_dark) / denom)
}

/// Eve's binary discrimination problem: two normalized 4-dimensional states
/// with equal priors, one per classical bit.
#[derive(Debug, Clone, PartialEq)]
pub struct EveEnsemble {
    basis: Basis,
    states: [DensityOperator; 2],
}

impl EveEnsemble {
    /// Priors are fixed at (1/2, 1/2): BB84 bits are unbiased.
    pub const PRIORS: [f64; 2] = [0.5, 0.5];

    pub fn new(basis: Basis, states: [DensityOperator; 2]) -> Result<Self> {
        for s in &states {
            if s.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    left: s.dim(),
                    right: 4,
                });
            }
            if !s.is_normalized() {
                return Err(Error::ParamOutOfRange {
                    name: "trace",
                    value: s.trace(),
                    min: 1.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { basis, states })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn states(&self) -> &[DensityOperator; 2] {
        &self.states
    }

    /// Holevo bound on the information extractable from this ensemble.
    pub fn holevo_bound(&self) -> f64 {
        crate::quantum::holevo_bound(&[
            (0.5, self.states[0].clone()),
            (0.5, self.states[1].clone()),
        ])
        .expect("valid two-state ensemble")
    }
}

/// Eve's ensemble for a branching ratio and a revealed basis: the reduced
/// pair states at the basis's two encoding phases.
pub fn eve_ensemble(r: f64, basis: Basis) -> Result<EveEnsemble> {
    let (phi0, phi1) = basis.phases();
    let bit0 = cloner::reduced_state(&CloneParams::new(r, phi0)?, Party::EvePair)?;
    let bit1 = cloner::reduced_state(&CloneParams::new(r, phi1)?, Party::EvePair)?;
    EveEnsemble::new(basis, [bit0, bit1])
}

/// Shannon mutual information (bits) between the bit label and the POVM
/// outcome, from the joint distribution p(j,k) = ½·Tr(ρⱼ Mₖ).
///
/// Zero-probability outcomes contribute nothing (0·log 0 = 0).
pub fn mutual_information(ens: &EveEnsemble, povm: &Povm) -> Result<f64> {
    let joint: Vec<Vec<f64>> = ens
        .states()
        .iter()
        .map(|rho| {
            povm.outcome_probabilities(rho)
                .map(|ps| ps.into_iter().map(|p| 0.5 * p).collect())
        })
        .collect::<Result<_>>()?;
    Ok(mutual_information_from_joint(&joint))
}

pub(crate) fn mutual_information_from_joint(joint: &[Vec<f64>]) -> f64 {
    let n_outcomes = joint[0].len();
    let row_sums: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..n_outcomes)
        .map(|k| joint.iter().map(|row| row[k]).sum())
        .collect();
    let mut info = 0.0;
    for (j, row) in joint.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if p > 0.0 {
                info += p * (p / (row_sums[j] * col_sums[k])).log2();
            }
        }
    }
    // Mutual information is nonnegative; round-off can leave a ~1e-16 deficit.
    info.max(0.0)
}

fn product_projectors(first: [f64; 2], second: [f64; 2]) -> Povm {
    let proj = |phase: f64| -> DMatrix<C64> {
        let psi = cloner::input_state(phase);
        let v = psi.amplitudes();
        v * v.adjoint()
    };
    let mut elements = Vec::with_capacity(4);
    for a in first {
        for b in second {
            elements.push(proj(a).kronecker(&proj(b)));
        }
    }
    Povm::new(elements).expect("orthogonal product projectors are complete")
}

/// The conventional measurement: the same |±x⟩ ⊗ |±x⟩ projectors Bob uses,
/// ordered (++, +−, −+, −−).
pub fn conventional_povm() -> Povm {
    product_projectors([0.0, PI], [0.0, PI])
}

/// Phase θ = arccos(2√d / √(1−2d)) of the optimal measurement.
///
/// Real exactly on d ∈ [0, 1/6]; θ(0) = π/2 and θ(1/6) = 0.
pub fn optimal_phase(d: f64) -> Result<f64> {
    if !(0.0..=cloner::MAX_DISTURBANCE + 1e-12).contains(&d) {
        return Err(Error::ParamOutOfRange {
            name: "disturbance",
            value: d,
            min: 0.0,
            max: cloner::MAX_DISTURBANCE,
        });
    }
    let x = 2.0 * d.sqrt() / (1.0 - 2.0 * d).sqrt();
    // Round-off may push the argument past 1 at the d = 1/6 endpoint.
    Ok(x.min(1.0).acos())
}

/// The closed-form optimal measurement for disturbance `d`: separable
/// rank-1 projectors onto equatorial product states with phases ±θ.
///
/// Which pair factor takes +θ matters; putting it on the first (eve1)
/// factor is the assignment pinned by the dominance and optimizer
/// cross-checks under this crate's slot convention. For the Y basis every
/// phase is shifted by π/2.
pub fn optimal_povm(d: f64, basis: Basis) -> Result<Povm> {
    let theta = optimal_phase(d)?;
    let shift = match basis {
        Basis::X => 0.0,
        Basis::Y => FRAC_PI_2,
    };
    Ok(product_projectors(
        [theta + shift, PI + theta + shift],
        [-theta + shift, PI - theta + shift],
    ))
}

/// Measurement scheme for information curves.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Conventional,
    OptimalClosedForm,
    /// Numerical accessible-information optimization.
    OptimalNumeric(OptimizerConfig),
}

/// One point of a disturbance-information curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoPoint {
    pub r: f64,
    pub d: f64,
    pub info: f64,
    /// Optimizer convergence when the scheme is numeric, `None` otherwise.
    pub converged: Option<bool>,
}

/// Evaluates one grid point: disturbance, X-basis ensemble, information
/// under the scheme.
pub fn info_at(r: f64, scheme: &Scheme) -> Result<InfoPoint> {
    let d = cloner::disturbance(r)?;
    let ens = eve_ensemble(r, Basis::X)?;
    let (info, converged) = match scheme {
        Scheme::Conventional => (mutual_information(&ens, &conventional_povm())?, None),
        Scheme::OptimalClosedForm => (mutual_information(&ens, &optimal_povm(d, Basis::X)?)?, None),
        Scheme::OptimalNumeric(cfg) => {
            let report = crate::optimizer::optimize_accessible_info(&ens, cfg)?;
            (report.best_info, Some(report.converged))
        }
    };
    Ok(InfoPoint {
        r,
        d,
        info,
        converged,
    })
}

/// Information curve over a branching-ratio grid, rows sorted by
/// disturbance (ties broken by r).
pub fn information_curve(r_grid: &[f64], scheme: &Scheme) -> Result<Vec<InfoPoint>> {
    let mut rows = crate::sweep::map_grid(r_grid, |&r| info_at(r, scheme))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (a.d, a.r).partial_cmp(&(b.d, b.r)).unwrap());
    Ok(rows)
}
