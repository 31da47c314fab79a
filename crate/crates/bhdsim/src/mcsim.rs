//! Monte Carlo oracle for the homodyne statistics.
//!
//! Shots are sampled directly from the operator structure of the balanced
//! detector output: per source, a Gaussian quadrature draw around the
//! coherent first-order-mode amplitude (with the mode's own shot noise),
//! attenuated by the channel and detector losses, plus the vacuum draws the
//! loss ports inject. The closed-form moments never enter the sampler; this
//! module's whole point is to catch algebra errors in them, so it shares
//! only the operator weights and the displacement decomposition with the
//! analytic path. Callers hand [`validate`] the analytic moments to test
//! against.
//!
//! Reproducibility: shot `i` of a plan draws from the ChaCha substream
//! `(seed, i)`, so results are identical whether shots run sequentially or
//! in parallel, and identical plans give bitwise identical reports.
//!
//! Draw order within one shot is part of the contract (it pins the stream
//! layout): optional jitter displacement first, then per source (+ then −)
//! the signal quadrature, then that source's vacuum draw(s) — one for the
//! lumped model, channel then detector for the independent model.

use crate::beam::{self, BeamGeometry};
use crate::bhd::{MeasurementStats, Receiver, SourcePair};
use crate::channel::ChannelLeg;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Quadrature variance of a vacuum (or coherent) mode in the ħ = 2
/// convention. The whole phase-space model is normalized to this single
/// auditable constant.
pub const VACUUM_QUADRATURE_VARIANCE: f64 = 1.0;

/// How the two loss ports (channel transmissivity, detector efficiency)
/// inject vacuum noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VacuumModel {
    /// One vacuum mode per source with the combined weight
    /// `√(η(1−T)) + √(1−η)`, exactly as the detector output operator is
    /// printed. Its square carries the cross-term `2√(η(1−η)(1−T))` that
    /// appears in the closed-form variance.
    Lumped,
    /// Two independent vacua per source with weights `√(η(1−T))` and
    /// `√(1−η)`: the textbook beam-splitter cascade, which keeps the
    /// background variance at exactly `2𝓔⁴N_lo`. Kept as a named option for
    /// sensitivity analysis against [`VacuumModel::Lumped`].
    Independent,
}

/// Everything one shot needs: sources, optics, receiver, channel legs,
/// vacuum model, path phases, and the (signed) effective displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McScenario {
    pair: SourcePair,
    geometry: BeamGeometry,
    receiver: Receiver,
    legs: (ChannelLeg, ChannelLeg),
    vacuum: VacuumModel,
    path_phase: (f64, f64),
    displacement: f64,
}

impl McScenario {
    /// Defaults: lumped vacuum, path phases (π, 0), displacement taken from
    /// the pair's separation.
    ///
    /// The accumulated propagation phases enter only modulo 2π and are
    /// tuning parameters in practice (at kilometer distances their literal
    /// values are not resolvable in f64), so they are explicit fields. The
    /// default (π, 0) is the aligned choice under which the ∓ displacement
    /// couplings of the two sources add constructively, matching the sign
    /// convention of the closed-form mean.
    pub fn new(
        pair: SourcePair,
        geometry: BeamGeometry,
        receiver: Receiver,
        legs: (ChannelLeg, ChannelLeg),
    ) -> Self {
        Self {
            pair,
            geometry,
            receiver,
            legs,
            vacuum: VacuumModel::Lumped,
            path_phase: (std::f64::consts::PI, 0.0),
            displacement: pair.d(),
        }
    }

    pub fn with_vacuum(mut self, vacuum: VacuumModel) -> Self {
        self.vacuum = vacuum;
        self
    }

    pub fn with_path_phase(mut self, path_phase: (f64, f64)) -> Result<Self> {
        if !path_phase.0.is_finite() || !path_phase.1.is_finite() {
            return Err(Error::domain(format!(
                "path phases must be finite, got ({}, {})",
                path_phase.0, path_phase.1
            )));
        }
        self.path_phase = path_phase;
        Ok(self)
    }

    /// Override the effective displacement (signed; a fixed centroid offset
    /// makes the residual separation d − δ_x, which may be negative).
    pub fn with_displacement(mut self, displacement: f64) -> Result<Self> {
        if !displacement.is_finite() {
            return Err(Error::domain(format!(
                "displacement must be finite, got {displacement}"
            )));
        }
        self.displacement = displacement;
        Ok(self)
    }

    pub fn pair(&self) -> &SourcePair {
        &self.pair
    }
    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }
    pub fn receiver(&self) -> &Receiver {
        &self.receiver
    }
    pub fn legs(&self) -> (ChannelLeg, ChannelLeg) {
        self.legs
    }
    pub fn vacuum(&self) -> VacuumModel {
        self.vacuum
    }
    pub fn path_phase(&self) -> (f64, f64) {
        self.path_phase
    }
    pub fn displacement(&self) -> f64 {
        self.displacement
    }
}

/// Shot count, RNG seed, and optional per-shot centroid jitter width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
    /// When set, each shot resamples the displacement as
    /// `N(displacement, jitter²)` before simulating.
    pub jitter: Option<f64>,
}

impl ShotPlan {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots < 1 {
            return Err(Error::domain("shot count must be >= 1".to_string()));
        }
        Ok(Self {
            shots,
            seed,
            jitter: None,
        })
    }

    pub fn with_jitter(mut self, sigma_d: f64) -> Result<Self> {
        if !(sigma_d.is_finite() && sigma_d >= 0.0) {
            return Err(Error::domain(format!(
                "jitter width must be finite and >= 0, got {sigma_d}"
            )));
        }
        self.jitter = Some(sigma_d);
        Ok(self)
    }
}

/// Analytic reference moments handed to [`validate`] by the caller (the
/// sampler itself never computes them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl From<MeasurementStats> for Moments {
    fn from(s: MeasurementStats) -> Self {
        Self {
            mean: s.mean,
            variance: s.variance,
        }
    }
}

/// Sample statistics of a shot batch against the analytic reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    pub shots: u64,
    pub sample_mean: f64,
    /// Shot-centered variance: squared deviations from each shot's own
    /// conditional mean, the estimator of the background-fluctuation
    /// variance the closed forms quote (it excludes the classical wander of
    /// the mean under jitter, which belongs to the mean's standard error).
    pub sample_variance: f64,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub mean_z_score: f64,
    pub variance_z_score: f64,
}

/// One shot's (outcome, conditional mean). The conditional mean comes from
/// the sampler's internal amplitudes, not from the closed forms, so a bug
/// in the amplitude model shows up in both columns.
fn shot_core(sc: &McScenario, displacement: f64, stream: &mut RngStream) -> Result<(f64, f64)> {
    let g = &sc.geometry;
    let rx = &sc.receiver;
    let n_lo = rx.n_lo();
    let eta = rx.eta();
    let phi_lo = rx.phi_lo();
    let vacuum_std = VACUUM_QUADRATURE_VARIANCE.sqrt();

    // ∓ first-order couplings of the two oppositely displaced sources
    let dec = beam::decompose_displacement(g, displacement, sc.pair.theta_d())?;
    let couplings = [dec.c10, dec.opposite_source().c10];
    let photons = [sc.pair.n_plus(), sc.pair.n_minus()];
    let phases = [
        sc.pair.phi_plus() + sc.path_phase.0,
        sc.pair.phi_minus() + sc.path_phase.1,
    ];
    let legs = [sc.legs.0, sc.legs.1];

    let mut value = 0.0;
    let mut cond_mean = 0.0;
    for s in 0..2 {
        let t = legs[s].transmissivity();
        let c10 = couplings[s];
        // coherent quadrature mean of this source in the measured mode,
        // and its own shot noise on top of the vacuum variance
        let m = 2.0 * c10 * photons[s].sqrt() * (phases[s] - phi_lo).cos();
        let var_x = VACUUM_QUADRATURE_VARIANCE + c10 * c10 * photons[s] / n_lo;
        let x = stream.sample_gaussian(m, var_x.sqrt())?;

        let through = (eta * t).sqrt();
        value += through * x;
        cond_mean += through * m;

        match sc.vacuum {
            VacuumModel::Lumped => {
                let kappa = (eta * (1.0 - t)).sqrt() + (1.0 - eta).sqrt();
                value += kappa * stream.sample_gaussian(0.0, vacuum_std)?;
            }
            VacuumModel::Independent => {
                value += (eta * (1.0 - t)).sqrt() * stream.sample_gaussian(0.0, vacuum_std)?;
                value += (1.0 - eta).sqrt() * stream.sample_gaussian(0.0, vacuum_std)?;
            }
        }
    }

    let scale = rx.field_norm() * rx.field_norm() * n_lo.sqrt();
    Ok((scale * value, scale * cond_mean))
}

/// Draw one homodyne outcome from the given stream (no jitter; the
/// scenario's displacement is used as-is).
pub fn simulate_shot(sc: &McScenario, stream: &mut RngStream) -> Result<f64> {
    Ok(shot_core(sc, sc.displacement, stream)?.0)
}

fn run_one(sc: &McScenario, plan: &ShotPlan, index: u64) -> Result<(f64, f64)> {
    let mut stream = RngStream::with_substream(plan.seed, index);
    let displacement = match plan.jitter {
        Some(sigma) => stream.sample_gaussian(sc.displacement, sigma)?,
        None => sc.displacement,
    };
    shot_core(sc, displacement, &mut stream)
}

fn collect_shots_sequential(sc: &McScenario, plan: &ShotPlan) -> Result<Vec<(f64, f64)>> {
    (0..plan.shots).map(|i| run_one(sc, plan, i)).collect()
}

#[cfg(feature = "parallel")]
fn collect_shots(sc: &McScenario, plan: &ShotPlan) -> Result<Vec<(f64, f64)>> {
    (0..plan.shots as usize)
        .into_par_iter()
        .map(|i| run_one(sc, plan, i as u64))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_shots(sc: &McScenario, plan: &ShotPlan) -> Result<Vec<(f64, f64)>> {
    collect_shots_sequential(sc, plan)
}

fn report_from(outcomes: &[(f64, f64)], reference: Moments) -> Result<McReport> {
    let m = outcomes.len();
    if m < 2 {
        return Err(Error::domain(format!(
            "sample variance undefined with {m} shot(s); need at least 2"
        )));
    }
    if !(reference.mean.is_finite() && reference.variance.is_finite() && reference.variance > 0.0)
    {
        return Err(Error::domain(format!(
            "reference moments must be finite with positive variance, got mean {}, variance {}",
            reference.mean, reference.variance
        )));
    }
    let mf = m as f64;
    let sample_mean = outcomes.iter().map(|&(v, _)| v).sum::<f64>() / mf;
    // marginal spread around the pooled mean: the standard error base for
    // the mean estimator (includes classical wander under jitter)
    let pooled_variance = outcomes
        .iter()
        .map(|&(v, _)| (v - sample_mean) * (v - sample_mean))
        .sum::<f64>()
        / (mf - 1.0);
    // shot-centered spread: estimator of the conditional (background)
    // variance the closed forms quote
    let sample_variance = outcomes
        .iter()
        .map(|&(v, c)| (v - c) * (v - c))
        .sum::<f64>()
        / (mf - 1.0);

    let se_mean = (pooled_variance / mf).sqrt();
    let se_variance = (2.0 / (mf - 1.0)).sqrt() * reference.variance;
    Ok(McReport {
        shots: m as u64,
        sample_mean,
        sample_variance,
        analytic_mean: reference.mean,
        analytic_variance: reference.variance,
        mean_z_score: (sample_mean - reference.mean) / se_mean,
        variance_z_score: (sample_variance - reference.variance) / se_variance,
    })
}

/// Run the plan's shots (in parallel when the `parallel` feature is on) and
/// score the sample moments against the caller-supplied analytic reference.
pub fn validate(sc: &McScenario, plan: &ShotPlan, reference: Moments) -> Result<McReport> {
    report_from(&collect_shots(sc, plan)?, reference)
}

/// [`validate`] forced onto one thread; bitwise identical to the parallel
/// path (shots own their substreams and the reduction runs in shot order
/// either way).
pub fn validate_sequential(
    sc: &McScenario,
    plan: &ShotPlan,
    reference: Moments,
) -> Result<McReport> {
    report_from(&collect_shots_sequential(sc, plan)?, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bhd;
    use crate::channel::Aperture;

    fn optics() -> BeamGeometry {
        BeamGeometry::new(600e-9, 0.1).unwrap()
    }

    fn receiver(eta: f64) -> Receiver {
        Receiver::new(Aperture::new(0.2).unwrap(), eta, 1e6, 0.0).unwrap()
    }

    fn legs_at(ell: f64) -> (ChannelLeg, ChannelLeg) {
        let g = optics();
        let a = Aperture::new(0.2).unwrap();
        let leg = ChannelLeg::new(&g, &a, ell).unwrap();
        (leg, leg)
    }

    fn lossless_legs(ell: f64) -> (ChannelLeg, ChannelLeg) {
        let g = optics();
        let a = Aperture::new(20.0 * g.beam_width(ell)).unwrap();
        let leg = ChannelLeg::new(&g, &a, ell).unwrap();
        assert_eq!(leg.transmissivity(), 1.0);
        (leg, leg)
    }

    fn pair(n: f64, d: f64) -> SourcePair {
        SourcePair::symmetric(n, 1e5, 0.0, d, 0.0).unwrap()
    }

    fn table_scenario(eta: f64, d: f64) -> McScenario {
        McScenario::new(pair(1e3, d), optics(), receiver(eta), legs_at(1e5))
    }

    fn analytic_reference(sc: &McScenario) -> Moments {
        Moments {
            mean: bhd::mean_output(sc.pair(), sc.geometry(), sc.receiver(), sc.legs()).unwrap(),
            variance: bhd::variance_output(sc.receiver(), sc.legs()),
        }
    }

    #[test]
    fn zero_displacement_has_zero_mean() {
        let sc = table_scenario(0.9, 0.0);
        let plan = ShotPlan::new(20_000, 91).unwrap();
        let report = validate(&sc, &plan, analytic_reference(&sc)).unwrap();
        assert_eq!(report.analytic_mean, 0.0);
        assert!(
            report.mean_z_score.abs() <= 4.0,
            "mean z = {}",
            report.mean_z_score
        );
    }

    #[test]
    fn ideal_case_recovers_vacuum_limited_variance() {
        // eta = 1, T = 1: variance must sit at 2·N_lo
        let sc = McScenario::new(pair(1e3, 1e-3), optics(), receiver(1.0), lossless_legs(1e5));
        let plan = ShotPlan::new(100_000, 7).unwrap();
        let reference = analytic_reference(&sc);
        assert_eq!(reference.variance, 2e6);
        let report = validate(&sc, &plan, reference).unwrap();
        assert!(
            report.variance_z_score.abs() <= 3.0,
            "variance z = {}",
            report.variance_z_score
        );
        assert!(report.mean_z_score.abs() <= 4.0);
    }

    #[test]
    fn lossy_case_matches_closed_forms() {
        let sc = table_scenario(0.9, 1e-3);
        let plan = ShotPlan::new(100_000, 1234).unwrap();
        let report = validate(&sc, &plan, analytic_reference(&sc)).unwrap();
        assert!(
            report.mean_z_score.abs() <= 4.0,
            "mean z = {}",
            report.mean_z_score
        );
        assert!(
            report.variance_z_score.abs() <= 4.0,
            "variance z = {}",
            report.variance_z_score
        );
        // the loss cross-term is enormous compared to the standard error;
        // dropping it must be flagged (this is the oracle's whole power)
        let naive = Moments {
            mean: report.analytic_mean,
            variance: 2e6,
        };
        let naive_report = validate(&sc, &plan, naive).unwrap();
        assert!(
            naive_report.variance_z_score > 4.0,
            "cross-term not detected: z = {}",
            naive_report.variance_z_score
        );
    }

    #[test]
    fn jitter_reproduces_inflated_variance() {
        // strong-signal regime so the jitter term towers over the standard
        // error: N± = 4e6 photons, sigma_d = 0.02 m
        let p = SourcePair::symmetric(4e6, 1e5, 0.0, 1e-3, 0.0).unwrap();
        let sc = McScenario::new(p, optics(), receiver(0.9), legs_at(1e5));
        let sigma_d = 0.02;
        let plan = ShotPlan::new(100_000, 42).unwrap().with_jitter(sigma_d).unwrap();

        let stats = bhd::stats_fluctuating(
            sc.pair(),
            sc.geometry(),
            sc.receiver(),
            sc.legs(),
            sigma_d,
            p.d(),
        )
        .unwrap();
        let report = validate(&sc, &plan, Moments::from(stats)).unwrap();
        assert!(
            report.mean_z_score.abs() <= 4.0,
            "mean z = {}",
            report.mean_z_score
        );
        assert!(
            report.variance_z_score.abs() <= 4.0,
            "variance z = {}",
            report.variance_z_score
        );

        // negative control: without the jitter term the reference is off by
        // orders of magnitude more than the standard error
        let aligned = analytic_reference(&sc);
        let aligned_report = validate(&sc, &plan, aligned).unwrap();
        assert!(
            aligned_report.variance_z_score > 4.0,
            "jitter inflation not detected: z = {}",
            aligned_report.variance_z_score
        );
    }

    #[test]
    fn independent_vacuum_keeps_unit_background() {
        let sc = table_scenario(0.9, 0.0).with_vacuum(VacuumModel::Independent);
        let plan = ShotPlan::new(100_000, 5).unwrap();
        // textbook two-port model: variance exactly 2·N_lo, no cross-term
        let reference = Moments {
            mean: 0.0,
            variance: 2e6,
        };
        let report = validate(&sc, &plan, reference).unwrap();
        assert!(
            report.variance_z_score.abs() <= 4.0,
            "variance z = {}",
            report.variance_z_score
        );

        // the printed lumped model differs from it by far more than noise
        let lumped_reference = analytic_reference(&sc);
        assert!(lumped_reference.variance > 2.5e6);
        let crossed = validate(&sc, &plan, lumped_reference).unwrap();
        assert!(
            crossed.variance_z_score < -4.0,
            "models indistinguishable: z = {}",
            crossed.variance_z_score
        );
    }

    #[test]
    fn loss_weights_satisfy_variance_identity() {
        // ηT + (√(η(1−T)) + √(1−η))² = 1 + 2√(η(1−η)(1−T)): the algebra
        // connecting the lumped sampler weights to the closed-form variance
        for eta in [0.1f64, 0.5, 0.9, 1.0] {
            for t in [0.0f64, 0.3, 0.671_725, 1.0] {
                let kappa = (eta * (1.0 - t)).sqrt() + (1.0 - eta).sqrt();
                let lhs = eta * t + kappa * kappa;
                let rhs = 1.0 + 2.0 * (eta * (1.0 - eta) * (1.0 - t)).sqrt();
                assert!(
                    (lhs - rhs).abs() <= 1e-12,
                    "eta = {eta}, T = {t}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn identical_plans_give_identical_reports() {
        let sc = table_scenario(0.9, 1e-3);
        let plan = ShotPlan::new(5_000, 77).unwrap().with_jitter(1e-3).unwrap();
        let reference = analytic_reference(&sc);
        let a = validate(&sc, &plan, reference).unwrap();
        let b = validate(&sc, &plan, reference).unwrap();
        assert_eq!(a, b);

        let other_seed = ShotPlan::new(5_000, 78).unwrap().with_jitter(1e-3).unwrap();
        let c = validate(&sc, &plan, reference).unwrap();
        let d = validate(&sc, &other_seed, reference).unwrap();
        assert_eq!(a, c);
        assert_ne!(a.sample_mean, d.sample_mean);
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let sc = table_scenario(0.9, 1e-3);
        let plan = ShotPlan::new(30_000, 99).unwrap().with_jitter(2e-3).unwrap();
        let reference = analytic_reference(&sc);
        let par = validate(&sc, &plan, reference).unwrap();
        let seq = validate_sequential(&sc, &plan, reference).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn doubling_displacement_doubles_the_mean() {
        let sc1 = table_scenario(0.9, 1e-3);
        let sc2 = table_scenario(0.9, 2e-3);
        let plan = ShotPlan::new(100_000, 321).unwrap();
        let r1 = validate(&sc1, &plan, analytic_reference(&sc1)).unwrap();
        let r2 = validate(&sc2, &plan, analytic_reference(&sc2)).unwrap();
        let se1 = (r1.sample_variance / plan.shots as f64).sqrt();
        let se2 = (r2.sample_variance / plan.shots as f64).sqrt();
        let tol = 4.0 * (se2 * se2 + 4.0 * se1 * se1).sqrt();
        assert!(
            (r2.sample_mean - 2.0 * r1.sample_mean).abs() <= tol,
            "means {} vs {}",
            r1.sample_mean,
            r2.sample_mean
        );
    }

    #[test]
    fn corrupted_references_are_flagged() {
        let sc = table_scenario(0.9, 1e-3);
        let plan = ShotPlan::new(100_000, 2718).unwrap();
        let good = analytic_reference(&sc);
        let report = validate(&sc, &plan, good).unwrap();
        assert!(report.mean_z_score.abs() <= 4.0);
        assert!(report.variance_z_score.abs() <= 4.0);

        let bad_variance = Moments {
            mean: good.mean,
            variance: 1.1 * good.variance,
        };
        let r_var = validate(&sc, &plan, bad_variance).unwrap();
        assert!(r_var.variance_z_score.abs() > 4.0, "z = {}", r_var.variance_z_score);

        let bad_mean = Moments {
            mean: 1.1 * good.mean,
            variance: good.variance,
        };
        let r_mean = validate(&sc, &plan, bad_mean).unwrap();
        assert!(r_mean.mean_z_score.abs() > 4.0, "z = {}", r_mean.mean_z_score);
    }

    #[test]
    fn rejects_degenerate_plans() {
        let sc = table_scenario(0.9, 1e-3);
        assert!(ShotPlan::new(0, 1).is_err());
        assert!(ShotPlan::new(10, 1).unwrap().with_jitter(-1.0).is_err());

        // a single shot cannot produce a sample variance
        let one = ShotPlan::new(1, 1).unwrap();
        assert!(validate(&sc, &one, analytic_reference(&sc)).is_err());

        // reference moments must be usable
        let plan = ShotPlan::new(100, 1).unwrap();
        let bad = Moments {
            mean: 0.0,
            variance: 0.0,
        };
        assert!(validate(&sc, &plan, bad).is_err());
    }

    #[test]
    fn single_shot_simulation_is_deterministic() {
        let sc = table_scenario(0.9, 1e-3);
        let mut s1 = RngStream::with_substream(5, 0);
        let mut s2 = RngStream::with_substream(5, 0);
        let a = simulate_shot(&sc, &mut s1).unwrap();
        let b = simulate_shot(&sc, &mut s2).unwrap();
        assert_eq!(a, b);
        // lumped model: one signal + one vacuum draw per source
        assert_eq!(s1.draws(), 4);

        let mut s3 = RngStream::with_substream(5, 0);
        let ind = sc.with_vacuum(VacuumModel::Independent);
        simulate_shot(&ind, &mut s3).unwrap();
        assert_eq!(s3.draws(), 6);
    }
}
