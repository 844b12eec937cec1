//! Model Hamiltonians and ramp schedules.
//!
//! All three models are affine in the control field `g`, so the time
//! derivative of the bare Hamiltonian is `g'(t) * dH0/dg` with a constant
//! matrix `dH0/dg`.
//!
//! Basis ordering: spin-up is index 0 on every site, site 0 is the most
//! significant bit of the many-body index. The LMG sector uses the collective
//! basis `m = j, j-1, ..., -j` with `j = L/2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::spectral::OperatorMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub const SIGMA_X: [[C64; 2]; 2] = [[ZERO, ONE], [ONE, ZERO]];
pub const SIGMA_Y: [[C64; 2]; 2] = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const SIGMA_Z: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Largest Ising chain handled by the dense kernel (dimension 2^10).
pub const MAX_ISING_LENGTH: usize = 10;
/// Largest LMG system handled (sector dimension L + 1).
pub const MAX_LMG_LENGTH: usize = 512;

pub fn pauli(p: &[[C64; 2]; 2]) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| p[i][j])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampKind {
    Linear,
    Sine,
}

/// Field schedule `g(t)` on `[0, tau_q]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampProfile {
    kind: RampKind,
    g0: f64,
    g_d: f64,
    tau_q: f64,
}

impl RampProfile {
    pub fn new(kind: RampKind, g0: f64, g_d: f64, tau_q: f64) -> Result<Self> {
        if !(tau_q.is_finite() && tau_q > 0.0) {
            return Err(Error::invalid("tau_q", format!("must be positive and finite, got {tau_q}")));
        }
        if !g0.is_finite() {
            return Err(Error::invalid("g0", "must be finite"));
        }
        if !g_d.is_finite() {
            return Err(Error::invalid("g_d", "must be finite"));
        }
        Ok(RampProfile { kind, g0, g_d, tau_q })
    }

    pub fn linear(g0: f64, g_d: f64, tau_q: f64) -> Result<Self> {
        Self::new(RampKind::Linear, g0, g_d, tau_q)
    }

    pub fn sine(g0: f64, g_d: f64, tau_q: f64) -> Result<Self> {
        Self::new(RampKind::Sine, g0, g_d, tau_q)
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn g_d(&self) -> f64 {
        self.g_d
    }

    pub fn tau_q(&self) -> f64 {
        self.tau_q
    }

    /// Same profile with a different duration.
    pub fn with_tau_q(&self, tau_q: f64) -> Result<Self> {
        Self::new(self.kind, self.g0, self.g_d, tau_q)
    }

    fn check_window(&self, t: f64) -> Result<()> {
        if (0.0..=self.tau_q).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfWindow { t, tau_q: self.tau_q })
        }
    }

    /// `g(t)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        Ok(match self.kind {
            RampKind::Linear => self.g0 + self.g_d * (t / self.tau_q),
            RampKind::Sine => {
                let s = (PI * t / (2.0 * self.tau_q)).sin();
                self.g0 + self.g_d * s * s
            }
        })
    }

    /// `dg/dt`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        Ok(match self.kind {
            RampKind::Linear => self.g_d / self.tau_q,
            RampKind::Sine => {
                // sin(pi) is not exactly zero in floating point; pin the endpoints.
                if t == 0.0 || t == self.tau_q {
                    0.0
                } else {
                    self.g_d * (PI / (2.0 * self.tau_q)) * (PI * t / self.tau_q).sin()
                }
            }
        })
    }

    /// Earliest `t_c` in the window with `g(t_c) = 0`, if any.
    pub fn crossing_time(&self) -> Option<f64> {
        if self.g0 == 0.0 {
            return Some(0.0);
        }
        if self.g_d == 0.0 {
            return None;
        }
        let ratio = -self.g0 / self.g_d;
        if !(0.0..=1.0).contains(&ratio) {
            return None;
        }
        Some(match self.kind {
            RampKind::Linear => ratio * self.tau_q,
            RampKind::Sine => (2.0 * self.tau_q / PI) * ratio.sqrt().asin(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// `(delta/2) sx + (g/2) sz`.
    LandauZener { delta: f64 },
    /// Periodic transverse-field chain `-sum_i [g sz_i - sx_i sx_{i+1}]`.
    IsingChain { length: usize },
    /// `-g sum_i sz_i - (1/L) sum_{i<j} sx_i sx_j`, maximal-spin sector.
    Lmg { length: usize },
}

impl ModelSpec {
    pub fn landau_zener(delta: f64) -> Result<Self> {
        let m = ModelSpec::LandauZener { delta };
        m.validate()?;
        Ok(m)
    }

    pub fn ising(length: usize) -> Result<Self> {
        let m = ModelSpec::IsingChain { length };
        m.validate()?;
        Ok(m)
    }

    pub fn lmg(length: usize) -> Result<Self> {
        let m = ModelSpec::Lmg { length };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::LandauZener { delta } => {
                if !(delta.is_finite() && delta >= 0.0) {
                    return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
                }
            }
            ModelSpec::IsingChain { length } => {
                if length < 3 {
                    return Err(Error::UnsupportedSize { model: "ising", size: length, min: 3 });
                }
                if length > MAX_ISING_LENGTH {
                    return Err(Error::invalid(
                        "length",
                        format!("ising chains above {MAX_ISING_LENGTH} sites exceed the dense kernel"),
                    ));
                }
            }
            ModelSpec::Lmg { length } => {
                if length < 2 {
                    return Err(Error::UnsupportedSize { model: "lmg", size: length, min: 2 });
                }
                if length > MAX_LMG_LENGTH {
                    return Err(Error::invalid(
                        "length",
                        format!("lmg systems above {MAX_LMG_LENGTH} spins are not supported"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::LandauZener { .. } => 2,
            ModelSpec::IsingChain { length } => 1 << length,
            ModelSpec::Lmg { length } => length + 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LandauZener { .. } => "lz",
            ModelSpec::IsingChain { .. } => "ising",
            ModelSpec::Lmg { .. } => "lmg",
        }
    }
}

/// Bare Hamiltonian at field value `g`.
pub fn build_h0(model: &ModelSpec, g: f64) -> Result<OperatorMatrix> {
    model.validate()?;
    if !g.is_finite() {
        return Err(Error::invalid("g", "must be finite"));
    }
    Ok(match *model {
        ModelSpec::LandauZener { delta } => {
            let m = pauli(&SIGMA_X) * C64::new(delta / 2.0, 0.0)
                + pauli(&SIGMA_Z) * C64::new(g / 2.0, 0.0);
            OperatorMatrix::hermitize(m)
        }
        ModelSpec::IsingChain { length } => ising_h0(length, g),
        ModelSpec::Lmg { length } => lmg_h0(length, g),
    })
}

/// `dH0/dg`, constant because every model is affine in `g`.
pub fn dh0_dg(model: &ModelSpec) -> Result<OperatorMatrix> {
    model.validate()?;
    Ok(match *model {
        ModelSpec::LandauZener { .. } => OperatorMatrix::from_real_diagonal(&[0.5, -0.5]),
        ModelSpec::IsingChain { length } => {
            let diag: Vec<f64> = (0..1usize << length).map(|s| -magnetization(s, length)).collect();
            OperatorMatrix::from_real_diagonal(&diag)
        }
        ModelSpec::Lmg { length } => {
            let diag: Vec<f64> = sector_m_values(length).map(|m| -2.0 * m).collect();
            OperatorMatrix::from_real_diagonal(&diag)
        }
    })
}

/// Sum of sz over sites for a many-body basis index (bit 0 = spin up).
fn magnetization(state: usize, length: usize) -> f64 {
    let down = (state & ((1 << length) - 1)).count_ones() as f64;
    length as f64 - 2.0 * down
}

fn site_bit(site: usize, length: usize) -> usize {
    1 << (length - 1 - site)
}

fn ising_h0(length: usize, g: f64) -> OperatorMatrix {
    let dim = 1usize << length;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] += C64::new(-g * magnetization(s, length), 0.0);
        for i in 0..length {
            let flip = site_bit(i, length) | site_bit((i + 1) % length, length);
            m[(s ^ flip, s)] += ONE;
        }
    }
    OperatorMatrix::hermitize(m)
}

fn sector_m_values(length: usize) -> impl Iterator<Item = f64> {
    let j = length as f64 / 2.0;
    (0..=length).map(move |k| j - k as f64)
}

/// Collective spin operators `(S_z, S_x)` on the spin-`L/2` multiplet.
pub fn collective_spin(length: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let j = length as f64 / 2.0;
    let m: Vec<f64> = sector_m_values(length).collect();
    let dim = length + 1;
    let sz = DMatrix::from_fn(dim, dim, |a, b| if a == b { C64::new(m[a], 0.0) } else { ZERO });
    // <m+1| S+ |m> sits at (k-1, k) in the descending-m basis.
    let mut sx = DMatrix::<C64>::zeros(dim, dim);
    for k in 1..dim {
        let mk = m[k];
        let amp = 0.5 * (j * (j + 1.0) - mk * (mk + 1.0)).sqrt();
        sx[(k - 1, k)] = C64::new(amp, 0.0);
        sx[(k, k - 1)] = C64::new(amp, 0.0);
    }
    (sz, sx)
}

fn lmg_h0(length: usize, g: f64) -> OperatorMatrix {
    let (sz, sx) = collective_spin(length);
    let l = length as f64;
    let dim = length + 1;
    // sum_{i<j} sx_i sx_j = 2 Sx^2 - L/2 on the maximal-spin sector.
    let pair = &sx * &sx * C64::new(2.0, 0.0) - DMatrix::<C64>::identity(dim, dim) * C64::new(l / 2.0, 0.0);
    let m = sz * C64::new(-2.0 * g, 0.0) - pair * C64::new(1.0 / l, 0.0);
    OperatorMatrix::hermitize(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn kron_site(op: &DMatrix<C64>, site: usize, length: usize) -> DMatrix<C64> {
        let mut acc = DMatrix::<C64>::identity(1, 1);
        for k in 0..length {
            let factor = if k == site { op.clone() } else { DMatrix::identity(2, 2) };
            acc = acc.kronecker(&factor);
        }
        acc
    }

    /// Full 2^L space LMG Hamiltonian built from Kronecker products.
    fn lmg_full_space(length: usize, g: f64) -> DMatrix<C64> {
        let dim = 1 << length;
        let sx = pauli(&SIGMA_X);
        let sz = pauli(&SIGMA_Z);
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..length {
            h -= kron_site(&sz, i, length) * C64::new(g, 0.0);
            for j in i + 1..length {
                h -= kron_site(&sx, i, length) * kron_site(&sx, j, length) * C64::new(1.0 / length as f64, 0.0);
            }
        }
        h
    }

    fn ising_kron(length: usize, g: f64) -> DMatrix<C64> {
        let dim = 1 << length;
        let sx = pauli(&SIGMA_X);
        let sz = pauli(&SIGMA_Z);
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..length {
            h -= kron_site(&sz, i, length) * C64::new(g, 0.0);
            h += kron_site(&sx, i, length) * kron_site(&sx, (i + 1) % length, length);
        }
        h
    }

    #[test]
    fn linear_ramp_hits_zero_at_midpoint() {
        let r = RampProfile::linear(-10.0, 20.0, 1.0).unwrap();
        assert_eq!(r.value(0.5).unwrap(), 0.0);
        assert_eq!(r.rate(0.3).unwrap(), 20.0);
        assert_eq!(r.crossing_time(), Some(0.5));
    }

    #[test]
    fn sine_ramp_values() {
        let r = RampProfile::sine(2.0, -1.2, 1.0).unwrap();
        assert_abs_diff_eq!(r.value(1.0).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(r.value(0.0).unwrap(), 2.0);
        assert_eq!(r.rate(0.0).unwrap(), 0.0);
        assert_eq!(r.rate(1.0).unwrap(), 0.0);
        assert_eq!(r.crossing_time(), None);
    }

    #[test]
    fn sine_rate_matches_finite_difference() {
        let r = RampProfile::sine(2.0, -1.2, 1.0).unwrap();
        let h = 1e-5;
        let fd = (r.value(0.5 + h).unwrap() - r.value(0.5 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(fd, -1.884_955_592, epsilon = 1e-8);
        assert_abs_diff_eq!(r.rate(0.5).unwrap(), fd, epsilon = 1e-8);
    }

    #[test]
    fn ramp_rejects_out_of_window() {
        let r = RampProfile::linear(-10.0, 20.0, 1.0).unwrap();
        assert!(matches!(r.value(1.0 + 1e-12), Err(Error::OutOfWindow { .. })));
        assert!(matches!(r.rate(-1e-12), Err(Error::OutOfWindow { .. })));
        assert!(RampProfile::linear(0.0, 1.0, 0.0).is_err());
        assert!(RampProfile::sine(0.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn sine_crossing_time() {
        let r = RampProfile::sine(1.0, -2.0, 3.0).unwrap();
        let tc = r.crossing_time().unwrap();
        assert_abs_diff_eq!(r.value(tc).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn lz_literal_matrices() {
        let m = ModelSpec::landau_zener(0.5).unwrap();
        let h = build_h0(&m, 0.0).unwrap();
        let expect = OperatorMatrix::from_real_rows(&[&[0.0, 0.25], &[0.25, 0.0]]).unwrap();
        assert_eq!(h.max_abs_diff(&expect), 0.0);

        let m = ModelSpec::landau_zener(0.0).unwrap();
        let h = build_h0(&m, 2.0).unwrap();
        assert_eq!(h.max_abs_diff(&OperatorMatrix::from_real_diagonal(&[1.0, -1.0])), 0.0);

        let d = dh0_dg(&m).unwrap();
        assert_eq!(d.max_abs_diff(&OperatorMatrix::from_real_diagonal(&[0.5, -0.5])), 0.0);
    }

    #[test]
    fn ising_derivative_counts_spins() {
        let d = dh0_dg(&ModelSpec::ising(3).unwrap()).unwrap();
        let diag: Vec<f64> = (0..8).map(|s| d.matrix()[(s, s)].re).collect();
        // index 0 = all up -> -(3 - 0); index 7 = all down -> -(0 - 3)
        assert_eq!(diag, vec![-3.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 3.0]);
        assert_eq!(d.max_abs_diff(&OperatorMatrix::from_real_diagonal(&diag)), 0.0);
    }

    #[test]
    fn ising_size_validation() {
        assert!(matches!(ModelSpec::ising(2), Err(Error::UnsupportedSize { .. })));
        let raw = ModelSpec::IsingChain { length: 2 };
        assert!(matches!(build_h0(&raw, 1.0), Err(Error::UnsupportedSize { .. })));
        assert!(ModelSpec::lmg(1).is_err());
    }

    #[test]
    fn ising_matches_kronecker_construction() {
        for length in 3..=5 {
            let h = build_h0(&ModelSpec::ising(length).unwrap(), 0.7).unwrap();
            let k = ising_kron(length, 0.7);
            assert!(crate::spectral::max_abs(&(h.matrix() - k)) < 1e-14);
        }
    }

    #[test]
    fn lmg_affine_check() {
        let m = ModelSpec::lmg(6).unwrap();
        let diff = &build_h0(&m, 2.0).unwrap() - &build_h0(&m, 0.0).unwrap();
        let d = dh0_dg(&m).unwrap().scaled(2.0);
        assert!(diff.max_abs_diff(&d) <= 1e-12);
    }

    #[test]
    fn lmg_sector_spectrum_l4() {
        let length = 4;
        let sector = eigendecompose(&build_h0(&ModelSpec::lmg(length).unwrap(), 2.0).unwrap()).unwrap();
        let full = eigendecompose(&OperatorMatrix::new(lmg_full_space(length, 2.0)).unwrap()).unwrap();
        for e in sector.eigenvalues() {
            let hit = full.eigenvalues().iter().any(|f| (f - e).abs() <= 1e-10);
            assert!(hit, "sector eigenvalue {e} missing from full space");
        }
        // the ground state lives in the symmetric sector
        assert_abs_diff_eq!(sector.ground_energy(), full.ground_energy(), epsilon = 1e-10);
    }

    #[test]
    fn lmg_sector_fidelity_up_to_six() {
        for length in 2..=6 {
            for &g in &[0.0, 0.4, 1.0, 2.0] {
                let sector = eigendecompose(&build_h0(&ModelSpec::lmg(length).unwrap(), g).unwrap()).unwrap();
                let full = eigendecompose(&OperatorMatrix::new(lmg_full_space(length, g)).unwrap()).unwrap();
                for e in sector.eigenvalues() {
                    assert!(full.eigenvalues().iter().any(|f| (f - e).abs() <= 1e-10), "L={length} g={g} e={e}");
                }
            }
        }
    }

    #[test]
    fn ising_translation_symmetry() {
        for length in 3..=6 {
            let h = build_h0(&ModelSpec::ising(length).unwrap(), 0.9).unwrap();
            let dim = 1usize << length;
            // cyclic shift of sites: site i -> i+1
            let mut p = DMatrix::<C64>::zeros(dim, dim);
            for s in 0..dim {
                let mut t = 0;
                for i in 0..length {
                    if s & site_bit(i, length) != 0 {
                        t |= site_bit((i + 1) % length, length);
                    }
                }
                p[(t, s)] = ONE;
            }
            let conj = &p * h.matrix() * p.transpose();
            assert!(crate::spectral::max_abs(&(conj - h.matrix())) < 1e-14);
            let a = eigendecompose(&h).unwrap();
            let b = eigendecompose(&OperatorMatrix::new(&p * h.matrix() * p.transpose()).unwrap()).unwrap();
            for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn every_model_is_affine(
            which in 0usize..3,
            size in 3usize..=6,
            delta in 0.0f64..3.0,
            g1 in -5.0f64..5.0,
            g2 in -5.0f64..5.0,
        ) {
            prop_assume!(g1 != g2);
            let model = match which {
                0 => ModelSpec::landau_zener(delta).unwrap(),
                1 => ModelSpec::ising(size).unwrap(),
                _ => ModelSpec::lmg(size).unwrap(),
            };
            let lhs = &build_h0(&model, g2).unwrap() - &build_h0(&model, g1).unwrap();
            let rhs = dh0_dg(&model).unwrap().scaled(g2 - g1);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }
}
