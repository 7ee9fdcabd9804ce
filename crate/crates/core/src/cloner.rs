//! Analytic model of the 1→3 phase-covariant cloner.
//!
//! The cloner copies equatorial qubit states (|0⟩ + e^{iφ}|1⟩)/√2. Its
//! post-selected three-qubit output is kept unnormalized so that the squared
//! norm equals the cloning success probability — an identity the tests
//! exploit. Closed-form expressions for the success probability and the
//! single-clone fidelities are provided together with their brute-force
//! partial-trace counterparts.
//!
//! Which output slot belongs to which party is not fixed by the state's
//! algebraic form alone, and the natural left-to-right reading (Bob first)
//! contradicts the fidelity formulas: the slot carrying the perfect clone
//! at r = 0 and r = 1 must be Bob's, and that is the last one.
//! [`SlotAssignment`] therefore carries the label mapping as data; the
//! default assignment is the one verified by the fidelity-identity tests.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::quantum::{DensityOperator, PureState};
use crate::{Error, Result, C64};

/// Largest disturbance the cloner can imprint, reached at r = 1/3.
pub const MAX_DISTURBANCE: f64 = 1.0 / 6.0;

/// Cloner settings: VBS branching ratio `r` in `[0, 1]` and equatorial phase
/// `phi` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneParams {
    pub r: f64,
    pub phi: f64,
}

impl CloneParams {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        check_branching_ratio(r)?;
        if !phi.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { r, phi })
    }
}

fn check_branching_ratio(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::ParamOutOfRange {
            name: "r",
            value: r,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}

/// The two conjugate equatorial bases of BB84.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    X,
    Y,
}

impl Basis {
    /// Phases of (bit 0, bit 1) in this basis.
    pub fn phases(self) -> (f64, f64) {
        match self {
            Basis::X => (0.0, std::f64::consts::PI),
            Basis::Y => (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
        }
    }
}

/// One BB84 symbol: a basis choice and a classical bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bb84Symbol {
    pub basis: Basis,
    pub bit: bool,
}

impl Bb84Symbol {
    /// The equatorial phase encoding this symbol:
    /// X/0 → 0, X/1 → π, Y/0 → −π/2, Y/1 → π/2.
    pub fn phase(self) -> f64 {
        let (zero, one) = self.basis.phases();
        if self.bit {
            one
        } else {
            zero
        }
    }

    /// The qubit state Alice sends for this symbol.
    pub fn state(self) -> PureState {
        input_state(self.phase())
    }
}

/// Which qubit slot of the three-qubit cloner output belongs to which party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotAssignment {
    pub eve1: usize,
    pub eve2: usize,
    pub bob: usize,
}

impl SlotAssignment {
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 3];
        for slot in [self.eve1, self.eve2, self.bob] {
            if slot > 2 || seen[slot] {
                return Err(Error::InvalidPermutation);
            }
            seen[slot] = true;
        }
        Ok(())
    }

    /// The left-to-right reading with Bob on the leading slot. It fails
    /// the fidelity-identity check and is kept as the documented
    /// counterexample.
    pub fn bob_first() -> Self {
        Self {
            bob: 0,
            eve1: 1,
            eve2: 2,
        }
    }
}

impl Default for SlotAssignment {
    /// The corrected assignment: Bob owns the last ket label.
    fn default() -> Self {
        Self {
            eve1: 0,
            eve2: 1,
            bob: 2,
        }
    }
}

/// Parties of the tripartite cloner output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Bob,
    Eve1,
    Eve2,
    /// Eve's joint two-qubit system, eve1 slot first.
    EvePair,
}

/// Which side of the disturbance maximum at r = 1/3 to invert on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisturbanceBranch {
    /// r in [0, 1/3].
    Low,
    /// r in [1/3, 1].
    High,
}

/// The equatorial state (|0⟩ + e^{iφ}|1⟩)/√2.
pub fn input_state(phi: f64) -> PureState {
    PureState::new(
        1,
        vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::from_polar(FRAC_1_SQRT_2, phi),
        ],
    )
    .expect("two finite amplitudes")
}

/// The post-selected three-qubit cloner output, unnormalized.
///
/// Its squared norm equals [`success_probability`]. Slot semantics are
/// given by [`SlotAssignment`], not by position: with the default
/// assignment, slots are (Eve1, Eve2, Bob).
pub fn cloner_state(params: &CloneParams) -> PureState {
    let r = params.r;
    let s = r.sqrt();
    // Six amplitudes, deliberately unnormalized: ‖ξ‖² must equal P_suc.
    let a = C64::new(0.0, (r - 1.0) * s / 2.0);
    let b = C64::new((3.0 * r - 1.0) / 4.0, (2.0 * r * s - 2.0 * s) / 4.0);
    let c = C64::new((1.0 - 3.0 * r) / 4.0, (2.0 * r * s - 2.0 * s) / 4.0);
    let e = C64::from_polar(1.0, params.phi);
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0b001] = a;
    amps[0b010] = b;
    amps[0b100] = c;
    amps[0b110] = e * a;
    amps[0b101] = e * c;
    amps[0b011] = e * b;
    PureState::new(3, amps).expect("finite amplitudes")
}

/// Cloning success probability (1 − 3r² + 6r³)/4.
pub fn success_probability(r: f64) -> Result<f64> {
    check_branching_ratio(r)?;
    Ok((1.0 - 3.0 * r * r + 6.0 * r * r * r) / 4.0)
}

/// Bob's clone fidelity −(−1 + r + r² − 5r³)/(1 − 3r² + 6r³).
pub fn bob_fidelity(r: f64) -> Result<f64> {
    check_branching_ratio(r)?;
    let num = -(-1.0 + r + r * r - 5.0 * r * r * r);
    let den = 1.0 - 3.0 * r * r + 6.0 * r * r * r;
    Ok(num / den)
}

/// Fidelity of either of Eve's clones, (1 + 4r − 11r² + 10r³)/(2 − 6r² + 12r³).
pub fn eve_fidelity(r: f64) -> Result<f64> {
    check_branching_ratio(r)?;
    let num = 1.0 + 4.0 * r - 11.0 * r * r + 10.0 * r * r * r;
    let den = 2.0 - 6.0 * r * r + 12.0 * r * r * r;
    Ok(num / den)
}

/// Disturbance D = 1 − F_Bob imprinted on the channel.
pub fn disturbance(r: f64) -> Result<f64> {
    Ok(1.0 - bob_fidelity(r)?)
}

/// Inverts [`disturbance`] on the requested branch by bisection.
///
/// Disturbance rises from 0 at r = 0 to 1/6 at r = 1/3 and falls back to 0
/// at r = 1; the returned r satisfies |disturbance(r) − d| ≤ 1e-10.
pub fn r_for_disturbance(d: f64, branch: DisturbanceBranch) -> Result<f64> {
    if !(0.0..=MAX_DISTURBANCE + 1e-12).contains(&d) {
        return Err(Error::ParamOutOfRange {
            name: "disturbance",
            value: d,
            min: 0.0,
            max: MAX_DISTURBANCE,
        });
    }
    let (mut lo, mut hi) = match branch {
        DisturbanceBranch::Low => (0.0, 1.0 / 3.0),
        DisturbanceBranch::High => (1.0 / 3.0, 1.0),
    };
    // Signed residual that increases from lo to hi on either branch.
    let f = |r: f64| -> f64 {
        let res = disturbance(r).expect("r stays in [0,1]") - d;
        match branch {
            DisturbanceBranch::Low => res,
            DisturbanceBranch::High => -res,
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    debug_assert!((disturbance(r)? - d).abs() <= 1e-10);
    Ok(r)
}

/// Normalized reduced state of the requested party, using the default
/// slot assignment.
pub fn reduced_state(params: &CloneParams, party: Party) -> Result<DensityOperator> {
    reduced_state_with(params, party, &SlotAssignment::default())
}

/// Normalized reduced state of the requested party under an explicit slot
/// assignment. For [`Party::EvePair`] the eve1 slot is the first factor.
pub fn reduced_state_with(
    params: &CloneParams,
    party: Party,
    slots: &SlotAssignment,
) -> Result<DensityOperator> {
    slots.validate()?;
    let rho = cloner_state(params).projector()?;
    match party {
        Party::Bob => rho.partial_trace(&[slots.bob]),
        Party::Eve1 => rho.partial_trace(&[slots.eve1]),
        Party::Eve2 => rho.partial_trace(&[slots.eve2]),
        Party::EvePair => {
            let pair = rho.partial_trace(&[slots.eve1, slots.eve2])?;
            if slots.eve1 < slots.eve2 {
                Ok(pair)
            } else {
                // partial_trace keeps ascending slots; restore eve1-first order.
                swap_two_qubit_factors(&pair)
            }
        }
    }
}

fn swap_two_qubit_factors(rho: &DensityOperator) -> Result<DensityOperator> {
    let m = rho.matrix();
    let swap = |i: usize| -> usize { ((i & 1) << 1) | (i >> 1) };
    let mut out = nalgebra::DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            out[(swap(i), swap(j))] = m[(i, j)];
        }
    }
    DensityOperator::new(out)
}

/// An `n`-point grid of branching ratios covering one disturbance branch.
pub fn branch_r_grid(branch: DisturbanceBranch, n: usize) -> Vec<f64> {
    let (lo, hi) = match branch {
        DisturbanceBranch::Low => (0.0, 1.0 / 3.0),
        DisturbanceBranch::High => (1.0 / 3.0, 1.0),
    };
    crate::sweep::linspace(lo, hi, n)
}
