//! Time-ordered propagation of the driven Schrödinger equation.
//!
//! Used as an independent check that the controlled evolution tracks the
//! instantaneous ground state, and to evolve uncontrolled drives. Each step
//! applies the exact exponential of the generator at the step midpoint, so
//! the scheme is unitary per step and second order globally.

use nalgebra::DVector;

use crate::control::{ControlScheme, ControlledDrive, DegeneracyPolicy};
use crate::models::{ModelSpec, RampProfile};
use crate::spectral::{eigendecompose, propagator_from, SpectralDecomposition};
use crate::tolerances::MAX_PHASE_PER_STEP;
use crate::workstats::{distribution_from_state, MergeTolerance, WorkDistribution};
use crate::{Error, Result, C64};

/// Number of generator evaluations in the step-size pre-scan.
const PRESCAN_POINTS: usize = 257;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let n = amplitudes.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("amplitudes", format!("norm {n} is not 1")));
        }
        Ok(StateVector(amplitudes))
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `|<other|self>|^2`.
    pub fn fidelity_with(&self, other: &DVector<C64>) -> f64 {
        other.dotc(&self.0).norm_sqr()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, StateVector)>,
    pub steps: usize,
    /// `dt * max ||H||` observed over the run.
    pub max_phase_per_step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &(f64, StateVector) {
        self.samples.last().expect("trajectory always holds the initial state")
    }
}

fn spectral_norm(dec: &SpectralDecomposition) -> f64 {
    let e = dec.eigenvalues();
    e[0].abs().max(e[e.len() - 1].abs())
}

/// Propagates from the ground state of `H0(0)` with `steps` midpoint steps,
/// recording every state.
pub fn propagate(model: &ModelSpec, ramp: &RampProfile, scheme: ControlScheme, steps: usize) -> Result<Trajectory> {
    propagate_strided(model, ramp, scheme, steps, 1, &DegeneracyPolicy::default())
}

/// As [`propagate`], recording every `stride`-th state plus the final one.
pub fn propagate_strided(
    model: &ModelSpec,
    ramp: &RampProfile,
    scheme: ControlScheme,
    steps: usize,
    stride: usize,
    policy: &DegeneracyPolicy,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be positive"));
    }
    if stride == 0 {
        return Err(Error::invalid("stride", "must be positive"));
    }
    let drive = ControlledDrive::new(*model, *ramp, scheme, *policy)?;
    let tau = ramp.tau_q();
    let dt = tau / steps as f64;

    // Coarse scan of the generator norm so that under-resolved runs fail
    // before doing any work.
    let mut scan_max: f64 = 0.0;
    for k in 0..PRESCAN_POINTS {
        let t = tau * (k as f64 + 0.5) / PRESCAN_POINTS as f64;
        let dec = eigendecompose(&drive.at(t)?.generator)?;
        scan_max = scan_max.max(spectral_norm(&dec));
    }
    if dt * scan_max > MAX_PHASE_PER_STEP {
        return Err(Error::StepTooCoarse { product: dt * scan_max, limit: MAX_PHASE_PER_STEP });
    }

    let (_, dec0) = drive.bare(0.0)?;
    let mut psi = dec0.vector(0);
    let mut samples = Vec::with_capacity(steps / stride + 2);
    samples.push((0.0, StateVector(psi.clone())));
    let mut max_phase = 0.0f64;

    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let dec = eigendecompose(&drive.at(t_mid)?.generator)?;
        let phase = dt * spectral_norm(&dec);
        if phase > MAX_PHASE_PER_STEP {
            return Err(Error::StepTooCoarse { product: phase, limit: MAX_PHASE_PER_STEP });
        }
        max_phase = max_phase.max(phase);
        psi = propagator_from(&dec, dt) * psi;
        let done = k + 1;
        if done == steps {
            samples.push((tau, StateVector(psi.clone())));
        } else if done % stride == 0 {
            samples.push((done as f64 * dt, StateVector(psi.clone())));
        }
    }

    Ok(Trajectory { samples, steps, max_phase_per_step: max_phase })
}

/// `F(t) = |<phi_0(t)|psi(t)>|^2` against the instantaneous bare ground state.
pub fn tracking_fidelity(trajectory: &Trajectory, model: &ModelSpec, ramp: &RampProfile) -> Result<Vec<(f64, f64)>> {
    let drive = ControlledDrive::new(*model, *ramp, ControlScheme::NoControl, DegeneracyPolicy::default())?;
    trajectory
        .samples
        .iter()
        .map(|(t, psi)| {
            let (_, dec) = drive.bare(*t)?;
            Ok((*t, psi.fidelity_with(&dec.vector(0))))
        })
        .collect()
}

/// Two-point measurement distribution of a propagated state: first outcome
/// the initial ground energy, second measurement in the generator eigenbasis
/// at `t`.
pub fn propagated_distribution(
    drive: &ControlledDrive,
    t: f64,
    state: &StateVector,
    merge: MergeTolerance,
) -> Result<WorkDistribution> {
    let (_, dec0) = drive.bare(0.0)?;
    let spectrum = eigendecompose(&drive.at(t)?.generator)?;
    distribution_from_state(&spectrum, state.amplitudes(), dec0.ground_energy(), merge)
}
