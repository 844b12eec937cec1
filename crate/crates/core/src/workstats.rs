//! Two-point measurement work statistics of the controlled evolution.
//!
//! The system starts in the ground state of `H0(0)`. Under counterdiabatic
//! control the evolved state equals the instantaneous ground state
//! `|phi_0(t)>`, so the second measurement in the eigenbasis `{E_m, |Phi_m>}`
//! of the generator gives outcome `W_m = E_m(t) - e_0(0)` with probability
//! `|<Phi_m(t)|phi_0(t)>|^2`.

use nalgebra::DVector;

use crate::control::{ControlScheme, ControlledDrive, DegeneracyPolicy};
use crate::models::{build_h0, ModelSpec, RampProfile};
use crate::spectral::{eigendecompose, SpectralDecomposition};
use crate::tolerances::{DEFAULT_MERGE_REL, NORMALIZATION_TOL, PROBABILITY_FLOOR};
use crate::{Error, Result, C64};

/// Tolerance below which two work values are treated as the same outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MergeTolerance {
    /// Multiple of the generator's spectral range.
    Relative(f64),
    Absolute(f64),
}

impl Default for MergeTolerance {
    fn default() -> Self {
        MergeTolerance::Relative(DEFAULT_MERGE_REL)
    }
}

impl MergeTolerance {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            MergeTolerance::Relative(v) | MergeTolerance::Absolute(v) => v,
        };
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("merge_tol", format!("must be finite and non-negative, got {v}")))
        }
    }

    pub fn resolve(&self, spectral_range: f64) -> f64 {
        match *self {
            MergeTolerance::Relative(r) => r * spectral_range,
            MergeTolerance::Absolute(a) => a,
        }
    }
}

/// One atom of a discrete work distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkOutcome {
    pub work: f64,
    pub probability: f64,
}

/// Discrete `P(W)`: ascending, pairwise separated work values.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    outcomes: Vec<WorkOutcome>,
    merge_tol: f64,
}

impl WorkDistribution {
    /// Sorts, merges outcomes closer than `merge_tol`, drops negligible
    /// weights and renormalizes.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = WorkOutcome>, merge_tol: f64) -> Result<Self> {
        if !(merge_tol.is_finite() && merge_tol >= 0.0) {
            return Err(Error::invalid("merge_tol", "must be finite and non-negative"));
        }
        let mut raw: Vec<WorkOutcome> = outcomes.into_iter().collect();
        for o in &raw {
            if !o.work.is_finite() || !o.probability.is_finite() || o.probability < 0.0 {
                return Err(Error::invalid("outcomes", format!("bad outcome {o:?}")));
            }
        }
        raw.sort_by(|a, b| a.work.total_cmp(&b.work));

        let mut merged: Vec<WorkOutcome> = Vec::with_capacity(raw.len());
        let mut cluster: Vec<WorkOutcome> = Vec::new();
        for o in raw {
            if let Some(last) = cluster.last() {
                if o.work - last.work > merge_tol {
                    merged.push(collapse(&cluster));
                    cluster.clear();
                }
            }
            cluster.push(o);
        }
        if !cluster.is_empty() {
            merged.push(collapse(&cluster));
        }

        merged.retain(|o| o.probability >= PROBABILITY_FLOOR);
        let total: f64 = merged.iter().map(|o| o.probability).sum();
        if merged.is_empty() || total <= 0.0 {
            return Err(Error::invalid("outcomes", "distribution carries no probability"));
        }
        for o in &mut merged {
            o.probability /= total;
        }
        debug_assert!((merged.iter().map(|o| o.probability).sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL);
        Ok(WorkDistribution { outcomes: merged, merge_tol })
    }

    pub fn outcomes(&self) -> &[WorkOutcome] {
        &self.outcomes
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Re-applies merging with the stored tolerance.
    pub fn remerged(&self) -> Result<Self> {
        Self::from_outcomes(self.outcomes.iter().copied(), self.merge_tol)
    }
}

fn collapse(cluster: &[WorkOutcome]) -> WorkOutcome {
    if cluster.len() == 1 {
        return cluster[0];
    }
    let p: f64 = cluster.iter().map(|o| o.probability).sum();
    let work = if p > 0.0 {
        cluster.iter().map(|o| o.probability * o.work).sum::<f64>() / p
    } else {
        cluster.iter().map(|o| o.work).sum::<f64>() / cluster.len() as f64
    };
    WorkOutcome { work, probability: p }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(d: &WorkDistribution) -> f64 {
    let h: f64 = d
        .outcomes
        .iter()
        .filter(|o| o.probability > 0.0)
        .map(|o| -o.probability * o.probability.ln())
        .sum();
    h.max(0.0)
}

pub fn mean_work(d: &WorkDistribution) -> f64 {
    d.outcomes.iter().map(|o| o.probability * o.work).sum()
}

pub fn work_variance(d: &WorkDistribution) -> f64 {
    let mean = mean_work(d);
    let second: f64 = d.outcomes.iter().map(|o| o.probability * o.work * o.work).sum();
    (second - mean * mean).max(0.0)
}

/// Total-variation distance; outcomes within `tol` of each other are paired.
pub fn total_variation(a: &WorkDistribution, b: &WorkDistribution, tol: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = a
        .outcomes
        .iter()
        .map(|o| (o.work, o.probability))
        .chain(b.outcomes.iter().map(|o| (o.work, -o.probability)))
        .collect();
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut dist = 0.0;
    let mut acc = 0.0;
    let mut last: Option<f64> = None;
    for (w, p) in atoms {
        if let Some(prev) = last {
            if w - prev > tol {
                dist += f64::abs(acc);
                acc = 0.0;
            }
        }
        acc += p;
        last = Some(w);
    }
    dist += f64::abs(acc);
    0.5 * dist
}

/// `e_0(t) - e_0(0)` of the bare Hamiltonian.
pub fn adiabatic_work(model: &ModelSpec, ramp: &RampProfile, t: f64) -> Result<f64> {
    let e_t = eigendecompose(&build_h0(model, ramp.value(t)?)?)?.ground_energy();
    let e_0 = eigendecompose(&build_h0(model, ramp.value(0.0)?)?)?.ground_energy();
    Ok(e_t - e_0)
}

/// Work distribution of an arbitrary state measured in `generator_spectrum`,
/// relative to the initial energy `e_initial`.
pub fn distribution_from_state(
    generator_spectrum: &SpectralDecomposition,
    state: &DVector<C64>,
    e_initial: f64,
    merge: MergeTolerance,
) -> Result<WorkDistribution> {
    merge.validate()?;
    let overlaps = generator_spectrum.eigenvectors().adjoint() * state;
    let outcomes = generator_spectrum
        .eigenvalues()
        .iter()
        .zip(overlaps.iter())
        .map(|(&e, z)| WorkOutcome { work: e - e_initial, probability: z.norm_sqr() });
    WorkDistribution::from_outcomes(outcomes, merge.resolve(generator_spectrum.spectral_range()))
}

/// Repeated evaluation of the controlled work distribution along one ramp.
#[derive(Debug, Clone)]
pub struct WorkStatistics {
    drive: ControlledDrive,
    initial_ground_energy: f64,
    merge: MergeTolerance,
}

/// Everything computed at one time sample.
#[derive(Debug, Clone)]
pub struct WorkSample {
    pub t: f64,
    pub distribution: WorkDistribution,
    pub adiabatic_work: f64,
}

impl WorkStatistics {
    pub fn new(drive: ControlledDrive, merge: MergeTolerance) -> Result<Self> {
        match drive.scheme() {
            ControlScheme::FullCd | ControlScheme::RestrictedCd(0) => {}
            other => return Err(Error::UnsupportedScheme(other.to_string())),
        }
        merge.validate()?;
        let (_, dec0) = drive.bare(0.0)?;
        Ok(WorkStatistics { initial_ground_energy: dec0.ground_energy(), drive, merge })
    }

    pub fn drive(&self) -> &ControlledDrive {
        &self.drive
    }

    pub fn initial_ground_energy(&self) -> f64 {
        self.initial_ground_energy
    }

    pub fn sample(&self, t: f64) -> Result<WorkSample> {
        let snap = self.drive.at(t)?;
        let spectrum = eigendecompose(&snap.generator)?;
        let tracked = snap.h0_spectrum.vector(0);
        let distribution = distribution_from_state(&spectrum, &tracked, self.initial_ground_energy, self.merge)?;
        Ok(WorkSample {
            t,
            distribution,
            adiabatic_work: snap.h0_spectrum.ground_energy() - self.initial_ground_energy,
        })
    }

    /// `P(W)` with `p_{m|0} = |<Phi_m(t)|phi_0(t)>|^2`.
    pub fn distribution(&self, t: f64) -> Result<WorkDistribution> {
        Ok(self.sample(t)?.distribution)
    }
}

/// Two-point measurement work distribution of the controlled evolution at `t`.
pub fn tpm_distribution(
    model: &ModelSpec,
    ramp: &RampProfile,
    scheme: ControlScheme,
    t: f64,
    policy: &DegeneracyPolicy,
    merge: MergeTolerance,
) -> Result<WorkDistribution> {
    let drive = ControlledDrive::new(*model, *ramp, scheme, *policy)?;
    WorkStatistics::new(drive, merge)?.distribution(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn dist(pairs: &[(f64, f64)]) -> WorkDistribution {
        WorkDistribution::from_outcomes(
            pairs.iter().map(|&(work, probability)| WorkOutcome { work, probability }),
            1e-9,
        )
        .unwrap()
    }

    /// Closed-form LZ distribution under full CD: the generator is
    /// `(D/2) n0 . sigma + c sy` with `n0` in the x-z plane and `c` the CD
    /// coefficient, so the ground state of H0 splits over the two generator
    /// eigenstates with weights `(1 +- h/sqrt(h^2 + c^2)) / 2`, `h = E/2`.
    fn lz_oracle(delta: f64, g: f64, rate: f64, g_initial: f64) -> [(f64, f64); 2] {
        let e = (delta * delta + g * g).sqrt();
        let h = e / 2.0;
        let c = delta * rate / (2.0 * e * e);
        let r = (h * h + c * c).sqrt();
        let e0 = -(delta * delta + g_initial * g_initial).sqrt() / 2.0;
        let p_low = 0.5 * (1.0 + h / r);
        [(-r - e0, p_low), (r - e0, 1.0 - p_low)]
    }

    fn fig1() -> (ModelSpec, RampProfile) {
        (ModelSpec::landau_zener(0.5).unwrap(), RampProfile::linear(-10.0, 20.0, 1.0).unwrap())
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&dist(&[(3.0, 1.0)])), 0.0);
        assert_abs_diff_eq!(shannon_entropy(&dist(&[(-1.0, 0.5), (1.0, 0.5)])), LN_2, epsilon = 1e-15);
        let four = dist(&[(0.0, 0.25), (1.0, 0.25), (2.0, 0.25), (3.0, 0.25)]);
        assert_abs_diff_eq!(shannon_entropy(&four), 4f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(mean_work(&dist(&[(0.0, 1.0)])), 0.0);
        let sym = dist(&[(-1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(mean_work(&sym), 0.0);
        assert_eq!(work_variance(&sym), 1.0);
        assert_eq!(work_variance(&dist(&[(2.5, 1.0)])), 0.0);
    }

    #[test]
    fn merging_collapses_close_values() {
        let d = dist(&[(1.0, 0.25), (1.0 + 5e-10, 0.25), (2.0, 0.5)]);
        assert_eq!(d.len(), 2);
        assert_abs_diff_eq!(d.outcomes()[0].work, 1.0 + 2.5e-10, epsilon = 1e-15);
        assert_abs_diff_eq!(d.outcomes()[0].probability, 0.5, epsilon = 1e-15);
        assert_eq!(d.remerged().unwrap().len(), d.len());
    }

    #[test]
    fn negligible_weights_are_dropped() {
        let d = dist(&[(0.0, 1.0), (4.0, 1e-30)]);
        assert_eq!(d.len(), 1);
        assert_eq!(d.outcomes()[0].probability, 1.0);
    }

    #[test]
    fn lz_endpoints_are_delta_peaked() {
        let (m, r) = fig1();
        let p = DegeneracyPolicy::default();
        let d0 = tpm_distribution(&m, &r, ControlScheme::FullCd, 0.0, &p, MergeTolerance::default()).unwrap();
        assert_eq!(d0.outcomes(), &[WorkOutcome { work: 0.0, probability: 1.0 }]);
        let d1 = tpm_distribution(&m, &r, ControlScheme::FullCd, 1.0, &p, MergeTolerance::default()).unwrap();
        assert_eq!(d1.len(), 1);
        assert_eq!(d1.outcomes()[0].probability, 1.0);
        assert_abs_diff_eq!(d1.outcomes()[0].work, 0.0, epsilon = 1e-12);
        assert_eq!(shannon_entropy(&d1), 0.0);
    }

    #[test]
    fn lz_midpoint_matches_closed_form() {
        let oracle = lz_oracle(0.5, 0.0, 20.0, -10.0);
        assert_abs_diff_eq!(oracle[0].0, -14.995_315, epsilon = 1e-5);
        assert_abs_diff_eq!(oracle[0].1, 0.506_249_5, epsilon = 1e-6);
        assert_abs_diff_eq!(oracle[1].0, 25.007_808, epsilon = 1e-5);

        let (m, r) = fig1();
        let d = tpm_distribution(&m, &r, ControlScheme::FullCd, 0.5, &DegeneracyPolicy::default(), MergeTolerance::default())
            .unwrap();
        assert_eq!(d.len(), 2);
        for (o, (w, p)) in d.outcomes().iter().zip(oracle) {
            assert_abs_diff_eq!(o.work, w, epsilon = 1e-10);
            assert_abs_diff_eq!(o.probability, p, epsilon = 1e-12);
        }
        let mean = mean_work(&d);
        assert_abs_diff_eq!(mean, 4.756_246_098_625_197, epsilon = 1e-9);
        assert_abs_diff_eq!(mean, adiabatic_work(&m, &r, 0.5).unwrap(), epsilon = 1e-9);
        let var_oracle = oracle[0].1 * oracle[0].0.powi(2) + oracle[1].1 * oracle[1].0.powi(2) - mean * mean;
        assert_abs_diff_eq!(work_variance(&d), var_oracle, epsilon = 1e-8);
    }

    #[test]
    fn lz_off_crossing_matches_closed_form() {
        let (m, r) = fig1();
        for &t in &[0.1, 0.37, 0.62, 0.93] {
            let g = r.value(t).unwrap();
            let oracle = lz_oracle(0.5, g, 20.0, -10.0);
            let d = tpm_distribution(&m, &r, ControlScheme::FullCd, t, &DegeneracyPolicy::default(), MergeTolerance::default())
                .unwrap();
            let probe: Vec<(f64, f64)> = d.outcomes().iter().map(|o| (o.work, o.probability)).collect();
            let weights: Vec<f64> = oracle.iter().map(|x| x.1).collect();
            assert_eq!(probe.len(), 2, "t={t}");
            for (got, want) in probe.iter().zip(oracle.iter()) {
                assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(probe[0].1, weights[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn adiabatic_work_examples() {
        let (m, r) = fig1();
        assert_eq!(adiabatic_work(&m, &r, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(adiabatic_work(&m, &r, 0.5).unwrap(), 4.756_246_098_6, epsilon = 1e-9);
        assert_abs_diff_eq!(adiabatic_work(&m, &r, 1.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn no_control_is_unsupported() {
        let (m, r) = fig1();
        let e = tpm_distribution(&m, &r, ControlScheme::NoControl, 0.5, &DegeneracyPolicy::default(), MergeTolerance::default());
        assert!(matches!(e, Err(Error::UnsupportedScheme(_))));
        let e = tpm_distribution(&m, &r, ControlScheme::RestrictedCd(1), 0.5, &DegeneracyPolicy::default(), MergeTolerance::default());
        assert!(matches!(e, Err(Error::UnsupportedScheme(_))));
    }

    #[test]
    fn total_variation_basics() {
        let a = dist(&[(0.0, 0.5), (1.0, 0.5)]);
        let b = dist(&[(0.0, 0.25), (1.0, 0.75)]);
        assert_abs_diff_eq!(total_variation(&a, &b, 1e-9), 0.25, epsilon = 1e-15);
        assert_eq!(total_variation(&a, &a, 1e-9), 0.0);
        let c = dist(&[(5.0, 1.0)]);
        assert_abs_diff_eq!(total_variation(&a, &c, 1e-9), 1.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn merge_is_idempotent_and_normalized(
            works in prop::collection::vec(-5.0f64..5.0, 1..40),
            weights in prop::collection::vec(0.0f64..1.0, 40),
            tol in 0.0f64..0.5,
        ) {
            prop_assume!(weights.iter().take(works.len()).sum::<f64>() > 1e-6);
            let d = WorkDistribution::from_outcomes(
                works.iter().zip(&weights).map(|(&work, &probability)| WorkOutcome { work, probability }),
                tol,
            ).unwrap();
            prop_assert!((d.total_probability() - 1.0).abs() <= 1e-12);
            prop_assert!(d.outcomes().windows(2).all(|w| w[1].work - w[0].work > tol));
            let again = d.remerged().unwrap();
            prop_assert_eq!(again.len(), d.len());
            for (x, y) in again.outcomes().iter().zip(d.outcomes()) {
                prop_assert_eq!(x.work, y.work);
                prop_assert!((x.probability - y.probability).abs() <= 1e-15);
            }
            let h = shannon_entropy(&d);
            prop_assert!(h >= 0.0 && h <= (d.len() as f64).ln() + 1e-12);
        }
    }
}
