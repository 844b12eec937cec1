//! Counterdiabatic control terms.
//!
//! Both terms are assembled from matrix elements of `dH0/dt` in the
//! instantaneous eigenbasis, weighted by inverse gaps:
//!
//! ```text
//! H1    = i sum_n sum_{m != n} |m><m| dH0 |n><n| / (e_n - e_m)
//! H1^n  = i [dP_n/dt, P_n],   dP_n/dt = sum_{m != n} |m><m| dH0 |n><n| / (e_n - e_m) + h.c.
//! ```
//!
//! Both expressions are built from projectors and so do not depend on the
//! phase convention of the eigenvectors.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::models::{build_h0, dh0_dg, ModelSpec, RampProfile};
use crate::spectral::{eigendecompose, OperatorMatrix, SpectralDecomposition};
use crate::tolerances::{DEFAULT_COUPLING_TOL, DEFAULT_GAP_TOL};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlScheme {
    NoControl,
    /// Transitionless driving of every eigenstate.
    FullCd,
    /// Control that only suppresses transitions out of eigenstate `n`.
    RestrictedCd(usize),
}

impl fmt::Display for ControlScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlScheme::NoControl => write!(f, "none"),
            ControlScheme::FullCd => write!(f, "full-cd"),
            ControlScheme::RestrictedCd(n) => write!(f, "restricted-cd({n})"),
        }
    }
}

/// How near-degenerate level pairs are treated.
///
/// A pair with `|e_n - e_m| < gap_tol` is skipped when the drive does not
/// couple it (`|<m|dH0|n>| <= coupling_tol`) and rejected otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyPolicy {
    gap_tol: f64,
    coupling_tol: f64,
}

impl Default for DegeneracyPolicy {
    fn default() -> Self {
        DegeneracyPolicy { gap_tol: DEFAULT_GAP_TOL, coupling_tol: DEFAULT_COUPLING_TOL }
    }
}

impl DegeneracyPolicy {
    pub fn new(gap_tol: f64, coupling_tol: f64) -> Result<Self> {
        if !(gap_tol.is_finite() && gap_tol > 0.0) {
            return Err(Error::invalid("gap_tol", "must be positive"));
        }
        if !(coupling_tol.is_finite() && coupling_tol > 0.0) {
            return Err(Error::invalid("coupling_tol", "must be positive"));
        }
        Ok(DegeneracyPolicy { gap_tol, coupling_tol })
    }

    pub fn gap_tol(&self) -> f64 {
        self.gap_tol
    }

    pub fn coupling_tol(&self) -> f64 {
        self.coupling_tol
    }
}

/// `<m| dH0 |n>` for all pairs.
fn drive_in_eigenbasis(dec: &SpectralDecomposition, h0_dot: &OperatorMatrix) -> Result<DMatrix<C64>> {
    if h0_dot.dim() != dec.source_dim() {
        return Err(Error::invalid(
            "h0_dot",
            format!("dimension {} does not match decomposition {}", h0_dot.dim(), dec.source_dim()),
        ));
    }
    let v = dec.eigenvectors();
    Ok(v.adjoint() * h0_dot.matrix() * v)
}

/// Inverse-gap weight `1 / (e_n - e_m)` for the pair, or `None` for a skipped
/// degenerate pair.
fn pair_weight(
    dec: &SpectralDecomposition,
    coupling: C64,
    m: usize,
    n: usize,
    policy: &DegeneracyPolicy,
) -> Result<Option<f64>> {
    let e = dec.eigenvalues();
    let gap = e[n] - e[m];
    if gap.abs() < policy.gap_tol {
        let c = coupling.norm();
        if c > policy.coupling_tol {
            return Err(Error::DegenerateCoupling { m, n, gap: gap.abs(), coupling: c });
        }
        return Ok(None);
    }
    Ok(Some(1.0 / gap))
}

/// Full counterdiabatic term for the decomposition of H0 and its time
/// derivative `h0_dot`.
pub fn cd_full(
    dec: &SpectralDecomposition,
    h0_dot: &OperatorMatrix,
    policy: &DegeneracyPolicy,
) -> Result<OperatorMatrix> {
    let mel = drive_in_eigenbasis(dec, h0_dot)?;
    let dim = dec.source_dim();
    let mut k = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim {
        for m in 0..dim {
            if m == n {
                continue;
            }
            if let Some(w) = pair_weight(dec, mel[(m, n)], m, n, policy)? {
                k[(m, n)] = C64::new(0.0, w) * mel[(m, n)];
            }
        }
    }
    let v = dec.eigenvectors();
    Ok(OperatorMatrix::hermitize(v * k * v.adjoint()))
}

/// `dP_n/dt` from first-order perturbation theory.
pub fn projector_rate(
    dec: &SpectralDecomposition,
    h0_dot: &OperatorMatrix,
    n: usize,
    policy: &DegeneracyPolicy,
) -> Result<DMatrix<C64>> {
    let dim = dec.source_dim();
    if n >= dim {
        return Err(Error::IndexOutOfRange { index: n, dim });
    }
    let mel = drive_in_eigenbasis(dec, h0_dot)?;
    let v = dec.eigenvectors();
    // |d phi_n> restricted to the complement of phi_n
    let mut chi = DVector::<C64>::zeros(dim);
    for m in 0..dim {
        if m == n {
            continue;
        }
        if let Some(w) = pair_weight(dec, mel[(m, n)], m, n, policy)? {
            chi += v.column(m) * (mel[(m, n)] * w);
        }
    }
    let phi = v.column(n);
    Ok(&chi * phi.adjoint() + phi * chi.adjoint())
}

/// Control term suppressing transitions out of eigenstate `n` only.
pub fn cd_restricted(
    dec: &SpectralDecomposition,
    h0_dot: &OperatorMatrix,
    n: usize,
    policy: &DegeneracyPolicy,
) -> Result<OperatorMatrix> {
    let p_dot = projector_rate(dec, h0_dot, n, policy)?;
    let phi = dec.vector(n);
    let p = &phi * phi.adjoint();
    let comm = &p_dot * &p - &p * &p_dot;
    Ok(OperatorMatrix::hermitize(comm * C64::new(0.0, 1.0)))
}

/// Instantaneous data of a controlled drive at one time.
#[derive(Debug, Clone)]
pub struct DriveSnapshot {
    pub t: f64,
    pub g: f64,
    pub g_rate: f64,
    pub h0: OperatorMatrix,
    pub h0_spectrum: SpectralDecomposition,
    /// `H0 + H1` (or `H0` alone without control or at the endpoints).
    pub generator: OperatorMatrix,
}

/// A model, ramp and control scheme bundled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ControlledDrive {
    model: ModelSpec,
    ramp: RampProfile,
    scheme: ControlScheme,
    policy: DegeneracyPolicy,
    h0_slope: OperatorMatrix,
}

impl ControlledDrive {
    pub fn new(
        model: ModelSpec,
        ramp: RampProfile,
        scheme: ControlScheme,
        policy: DegeneracyPolicy,
    ) -> Result<Self> {
        model.validate()?;
        if let ControlScheme::RestrictedCd(n) = scheme {
            if n >= model.dim() {
                return Err(Error::IndexOutOfRange { index: n, dim: model.dim() });
            }
        }
        let h0_slope = dh0_dg(&model)?;
        Ok(ControlledDrive { model, ramp, scheme, policy, h0_slope })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn ramp(&self) -> &RampProfile {
        &self.ramp
    }

    pub fn scheme(&self) -> ControlScheme {
        self.scheme
    }

    pub fn policy(&self) -> &DegeneracyPolicy {
        &self.policy
    }

    /// Bare Hamiltonian and its spectrum at time `t`.
    pub fn bare(&self, t: f64) -> Result<(OperatorMatrix, SpectralDecomposition)> {
        let g = self.ramp.value(t)?;
        let h0 = build_h0(&self.model, g)?;
        let dec = eigendecompose(&h0)?;
        Ok((h0, dec))
    }

    /// The control term at `t`; exactly zero at both ends of the ramp.
    pub fn control_term(&self, t: f64, h0_spectrum: &SpectralDecomposition) -> Result<Option<OperatorMatrix>> {
        if self.scheme == ControlScheme::NoControl || t == 0.0 || t == self.ramp.tau_q() {
            return Ok(None);
        }
        let h0_dot = self.h0_slope.scaled(self.ramp.rate(t)?);
        let h1 = match self.scheme {
            ControlScheme::NoControl => unreachable!(),
            ControlScheme::FullCd => cd_full(h0_spectrum, &h0_dot, &self.policy)?,
            ControlScheme::RestrictedCd(n) => cd_restricted(h0_spectrum, &h0_dot, n, &self.policy)?,
        };
        Ok(Some(h1))
    }

    pub fn at(&self, t: f64) -> Result<DriveSnapshot> {
        let g = self.ramp.value(t)?;
        let g_rate = self.ramp.rate(t)?;
        let (h0, h0_spectrum) = self.bare(t)?;
        let generator = match self.control_term(t, &h0_spectrum)? {
            Some(h1) => &h0 + &h1,
            None => h0.clone(),
        };
        Ok(DriveSnapshot { t, g, g_rate, h0, h0_spectrum, generator })
    }
}

/// `H0(t) + H1(t)` for the chosen scheme, with `H1 = 0` at `t = 0` and `t = tau_q`.
pub fn generator(
    model: &ModelSpec,
    ramp: &RampProfile,
    scheme: ControlScheme,
    t: f64,
    policy: &DegeneracyPolicy,
) -> Result<OperatorMatrix> {
    Ok(ControlledDrive::new(*model, *ramp, scheme, *policy)?.at(t)?.generator)
}
