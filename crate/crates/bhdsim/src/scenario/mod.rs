//! Scenario layer: configuration, parameter sweeps, file emission, CLI.
//!
//! A [`ScenarioConfig`] is the single mutable description of an operating
//! point (optics, sources, receiver, misalignment, vacuum model) plus any
//! sweep axes. Sweeps take the Cartesian product of the axes in declaration
//! order (last axis fastest), evaluate each cell through the closed-form
//! estimation core, and emit rows whose order is deterministic, so a given
//! config file always produces a byte-identical CSV.

pub mod cli;
mod config;
mod emit;

pub use config::load_config;
pub use emit::{emit_csv, emit_plot, render_csv, render_plot};

use crate::beam::BeamGeometry;
use crate::bhd::{self, MisalignmentModel, Receiver, SourcePair, SuperResolution};
use crate::channel::{Aperture, ChannelLeg};
use crate::error::{Error, Result};
use crate::mcsim::VacuumModel;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Parameters that may be swept. The whitelist is deliberately small: each
/// entry has a well-defined meaning for every cell independent of the
/// others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Ell,
    NPlus,
    NMinus,
    Eta,
    SigmaD,
    DeltaX,
    R,
}

impl SweepParam {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "ell" => Self::Ell,
            "n_plus" => Self::NPlus,
            "n_minus" => Self::NMinus,
            "eta" => Self::Eta,
            "sigma_d" => Self::SigmaD,
            "delta_x" => Self::DeltaX,
            "r" => Self::R,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ell => "ell",
            Self::NPlus => "n_plus",
            Self::NMinus => "n_minus",
            Self::Eta => "eta",
            Self::SigmaD => "sigma_d",
            Self::DeltaX => "delta_x",
            Self::R => "r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep dimension: `points` values from `min` to `max` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub spacing: Spacing,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn new(param: SweepParam, spacing: Spacing, min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::domain(format!(
                "sweep axis {} requires finite min < max, got [{min}, {max}]",
                param.name()
            )));
        }
        if points < 2 {
            return Err(Error::domain(format!(
                "sweep axis {} requires at least 2 points, got {points}",
                param.name()
            )));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::domain(format!(
                "log-spaced sweep axis {} requires min > 0, got {min}",
                param.name()
            )));
        }
        Ok(Self {
            param,
            spacing,
            min,
            max,
            points,
        })
    }

    /// Grid values; the endpoints are exactly `min` and `max`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let v = match self.spacing {
                Spacing::Linear => self.min + t * (self.max - self.min),
                Spacing::Log => {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                }
            };
            out.push(v);
        }
        out[0] = self.min;
        out[n - 1] = self.max;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisalignmentKind {
    None,
    Fluctuating,
    Fixed,
}

/// Complete operating-point description plus sweep axes. Fields default to
/// the reference setup: λ = 600 nm, w0 = 0.1 m, r = 0.2 m, η = 0.9,
/// N_lo = 10⁶, N± = 10³, φ = 0 everywhere, ℓ± = 10⁵ m, d = 10⁻³ m,
/// aligned centroid, lumped vacuum model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub lambda: f64,
    pub w0: f64,
    pub r: f64,
    pub eta: f64,
    pub n_lo: f64,
    pub phi_lo: f64,
    pub n_plus: f64,
    pub n_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub ell_plus: f64,
    pub ell_minus: f64,
    pub d: f64,
    pub theta_d: f64,
    pub misalignment: MisalignmentKind,
    pub sigma_d: f64,
    pub delta_x: f64,
    pub vacuum: VacuumModel,
    pub axes: Vec<SweepAxis>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            lambda: 600e-9,
            w0: 0.1,
            r: 0.2,
            eta: 0.9,
            n_lo: 1e6,
            phi_lo: 0.0,
            n_plus: 1e3,
            n_minus: 1e3,
            phi_plus: 0.0,
            phi_minus: 0.0,
            ell_plus: 1e5,
            ell_minus: 1e5,
            d: 1e-3,
            theta_d: 0.0,
            misalignment: MisalignmentKind::None,
            sigma_d: 0.0,
            delta_x: 0.0,
            vacuum: VacuumModel::Lumped,
            axes: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn misalignment_model(&self) -> MisalignmentModel {
        match self.misalignment {
            MisalignmentKind::None => MisalignmentModel::None,
            MisalignmentKind::Fluctuating => MisalignmentModel::Fluctuating {
                sigma_d: self.sigma_d,
            },
            MisalignmentKind::Fixed => MisalignmentModel::Fixed {
                delta_x: self.delta_x,
            },
        }
    }

    pub fn geometry(&self) -> Result<BeamGeometry> {
        BeamGeometry::new(self.lambda, self.w0)
    }

    pub fn aperture(&self) -> Result<Aperture> {
        Aperture::new(self.r)
    }

    pub fn source_pair(&self) -> Result<SourcePair> {
        SourcePair::new(
            self.n_plus,
            self.n_minus,
            self.ell_plus,
            self.ell_minus,
            self.phi_plus,
            self.phi_minus,
            self.d,
            self.theta_d,
        )
    }

    pub fn receiver(&self) -> Result<Receiver> {
        Receiver::new(self.aperture()?, self.eta, self.n_lo, self.phi_lo)
    }

    pub fn legs(&self) -> Result<(ChannelLeg, ChannelLeg)> {
        let g = self.geometry()?;
        let a = self.aperture()?;
        Ok((
            ChannelLeg::new(&g, &a, self.ell_plus)?,
            ChannelLeg::new(&g, &a, self.ell_minus)?,
        ))
    }

    fn apply(&mut self, param: SweepParam, value: f64) {
        match param {
            SweepParam::Ell => {
                self.ell_plus = value;
                self.ell_minus = value;
            }
            SweepParam::NPlus => self.n_plus = value,
            SweepParam::NMinus => self.n_minus = value,
            SweepParam::Eta => self.eta = value,
            SweepParam::SigmaD => self.sigma_d = value,
            SweepParam::DeltaX => self.delta_x = value,
            SweepParam::R => self.r = value,
        }
    }
}

/// One evaluated sweep cell. A cell whose evaluation failed keeps its axis
/// values, reports NaN quantities and `resolved = false`, and carries the
/// failure text; the sweep itself never aborts on cell errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// (param, value) pairs in axis declaration order.
    pub axis_values: Vec<(SweepParam, f64)>,
    /// Mean propagation distance of the cell (the Rayleigh benchmark's ℓ).
    pub ell: f64,
    pub d_min: f64,
    pub d_rayleigh: f64,
    pub resolved: bool,
    pub margin: f64,
    pub error: Option<String>,
}

/// Evaluate the configured operating point once.
pub fn evaluate_point(cfg: &ScenarioConfig) -> Result<SuperResolution> {
    let g = cfg.geometry()?;
    let pair = cfg.source_pair()?;
    let rx = cfg.receiver()?;
    let legs = cfg.legs()?;
    bhd::super_resolution_check(&pair, &g, &rx, legs, &cfg.misalignment_model())
}

fn check_axes(cfg: &ScenarioConfig) -> Result<()> {
    for (i, axis) in cfg.axes.iter().enumerate() {
        if cfg.axes[..i].iter().any(|a| a.param == axis.param) {
            return Err(Error::domain(format!(
                "sweep axis {} declared more than once",
                axis.param.name()
            )));
        }
        match axis.param {
            SweepParam::SigmaD if cfg.misalignment != MisalignmentKind::Fluctuating => {
                return Err(Error::domain(
                    "sweeping sigma_d requires `misalignment = fluctuating`".to_string(),
                ));
            }
            SweepParam::DeltaX if cfg.misalignment != MisalignmentKind::Fixed => {
                return Err(Error::domain(
                    "sweeping delta_x requires `misalignment = fixed`".to_string(),
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

fn cell_row(cfg: &ScenarioConfig, assignment: &[(SweepParam, f64)]) -> SweepRow {
    let mut cell = cfg.clone();
    for &(param, value) in assignment {
        cell.apply(param, value);
    }
    let ell = 0.5 * (cell.ell_plus + cell.ell_minus);
    match evaluate_point(&cell) {
        Ok(out) => SweepRow {
            axis_values: assignment.to_vec(),
            ell,
            d_min: out.d_min,
            d_rayleigh: out.d_rayleigh,
            resolved: out.resolved,
            margin: out.margin,
            error: None,
        },
        Err(e) => SweepRow {
            axis_values: assignment.to_vec(),
            ell,
            d_min: f64::NAN,
            d_rayleigh: f64::NAN,
            resolved: false,
            margin: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// All cell assignments in row-major order (first axis outermost, last
/// axis fastest). No axes means a single cell at the base config.
fn assignments(cfg: &ScenarioConfig) -> Vec<Vec<(SweepParam, f64)>> {
    let grids: Vec<(SweepParam, Vec<f64>)> = cfg
        .axes
        .iter()
        .map(|a| (a.param, a.values()))
        .collect();
    let total: usize = grids.iter().map(|(_, v)| v.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; grids.len()];
    loop {
        out.push(
            grids
                .iter()
                .zip(&idx)
                .map(|((p, vals), &i)| (*p, vals[i]))
                .collect(),
        );
        // odometer increment, last axis fastest
        let mut k = grids.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < grids[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Run the configured sweep; cells evaluate in parallel when the
/// `parallel` feature is on, with identical output either way.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    check_axes(cfg)?;
    let cells = assignments(cfg);
    #[cfg(feature = "parallel")]
    {
        Ok(cells
            .par_iter()
            .map(|assignment| cell_row(cfg, assignment))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(cells
            .iter()
            .map(|assignment| cell_row(cfg, assignment))
            .collect())
    }
}

/// [`run_sweep`] pinned to one thread.
pub fn run_sweep_sequential(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    check_axes(cfg)?;
    Ok(assignments(cfg)
        .iter()
        .map(|assignment| cell_row(cfg, assignment))
        .collect())
}
