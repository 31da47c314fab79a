//! Estimation core: Fisher information and the standard quantum limit,
//! loss-degraded homodyne statistics, SNR, and the minimum resolvable
//! separation d_min with its two misalignment variants.
//!
//! Unit conventions. The overall field normalization 𝓔 (absorbing physical
//! constants and the quantization volume) is carried as a plain factor,
//! default 1: raw means are in 𝓔² units and variances in 𝓔⁴ units, and
//! every acceptance-grade quantity (SNR, each d_min) is invariant under
//! rescaling 𝓔. Variances are the d = 0 background fluctuations, so the SNR
//! denominator does not depend on the separation.

use crate::beam::BeamGeometry;
use crate::channel::{self, Aperture, ChannelLeg};
use crate::error::{Error, Result};

/// The two sources: photon numbers, path lengths, path phases, and their
/// transverse separation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePair {
    n_plus: f64,
    n_minus: f64,
    ell_plus: f64,
    ell_minus: f64,
    phi_plus: f64,
    phi_minus: f64,
    d: f64,
    theta_d: f64,
}

impl SourcePair {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_plus: f64,
        n_minus: f64,
        ell_plus: f64,
        ell_minus: f64,
        phi_plus: f64,
        phi_minus: f64,
        d: f64,
        theta_d: f64,
    ) -> Result<Self> {
        for (name, v) in [("n_plus", n_plus), ("n_minus", n_minus)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!(
                    "photon number {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("ell_plus", ell_plus), ("ell_minus", ell_minus)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "path length {name} must be finite and > 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("phi_plus", phi_plus),
            ("phi_minus", phi_minus),
            ("theta_d", theta_d),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!(
                    "angle {name} must be finite, got {v}"
                )));
            }
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::domain(format!(
                "separation d must be finite and >= 0, got {d}"
            )));
        }
        Ok(Self {
            n_plus,
            n_minus,
            ell_plus,
            ell_minus,
            phi_plus,
            phi_minus,
            d,
            theta_d,
        })
    }

    /// Both sources with the same photon number, distance, and phase.
    pub fn symmetric(n: f64, ell: f64, phi: f64, d: f64, theta_d: f64) -> Result<Self> {
        Self::new(n, n, ell, ell, phi, phi, d, theta_d)
    }

    pub fn n_plus(&self) -> f64 {
        self.n_plus
    }
    pub fn n_minus(&self) -> f64 {
        self.n_minus
    }
    pub fn ell_plus(&self) -> f64 {
        self.ell_plus
    }
    pub fn ell_minus(&self) -> f64 {
        self.ell_minus
    }
    pub fn phi_plus(&self) -> f64 {
        self.phi_plus
    }
    pub fn phi_minus(&self) -> f64 {
        self.phi_minus
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn theta_d(&self) -> f64 {
        self.theta_d
    }
}

/// Detector side: aperture, photodetection efficiency, local oscillator
/// strength and phase, and the field normalization 𝓔.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    aperture: Aperture,
    eta: f64,
    n_lo: f64,
    phi_lo: f64,
    field_norm: f64,
}

impl Receiver {
    pub fn new(aperture: Aperture, eta: f64, n_lo: f64, phi_lo: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain(format!(
                "photodetection efficiency must be in (0, 1], got {eta}"
            )));
        }
        if !(n_lo.is_finite() && n_lo > 0.0) {
            return Err(Error::domain(format!(
                "local oscillator photon number must be finite and > 0, got {n_lo}"
            )));
        }
        if !phi_lo.is_finite() {
            return Err(Error::domain(format!(
                "local oscillator phase must be finite, got {phi_lo}"
            )));
        }
        Ok(Self {
            aperture,
            eta,
            n_lo,
            phi_lo,
            field_norm: 1.0,
        })
    }

    /// Override the field normalization 𝓔 (default 1).
    pub fn with_field_norm(mut self, field_norm: f64) -> Result<Self> {
        if !(field_norm.is_finite() && field_norm > 0.0) {
            return Err(Error::domain(format!(
                "field normalization must be finite and > 0, got {field_norm}"
            )));
        }
        self.field_norm = field_norm;
        Ok(self)
    }

    pub fn aperture(&self) -> Aperture {
        self.aperture
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn n_lo(&self) -> f64 {
        self.n_lo
    }
    pub fn phi_lo(&self) -> f64 {
        self.phi_lo
    }
    pub fn field_norm(&self) -> f64 {
        self.field_norm
    }
}

/// Centroid misalignment between the sources' midpoint and the local
/// oscillator axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MisalignmentModel {
    /// Perfectly aligned centroid.
    None,
    /// Zero-mean Gaussian jitter of the centroid with standard deviation
    /// `sigma_d` (meters), independent shot to shot.
    Fluctuating { sigma_d: f64 },
    /// Constant centroid offset `delta_x` (meters) along the measured axis.
    Fixed { delta_x: f64 },
}

/// First and second moment of the homodyne output, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementStats {
    /// ⟨Ĵ⟩ in 𝓔² units.
    pub mean: f64,
    /// ⟨δĴ²⟩ in 𝓔⁴ units (background fluctuations, d = 0 convention).
    pub variance: f64,
    /// mean/√variance; invariant under 𝓔 rescaling.
    pub snr: f64,
}

/// Outcome of the super-resolution test at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperResolution {
    pub d_min: f64,
    pub d_rayleigh: f64,
    /// d_min < d_rayleigh
    pub resolved: bool,
    /// d_rayleigh − d_min (positive when resolved)
    pub margin: f64,
}

/// Fisher information of the first-order-mode homodyne measurement,
/// evaluated exactly as printed:
/// `F = (2/w0²)·(√N₋·cos(φ₋ + 2πℓ₋/λ) − √N₊·cos(φ₊ + 2πℓ₊/λ))²`.
///
/// The path-phase combination maximizing this is not representable by a
/// single side condition; use [`fisher_information_max`] for the envelope.
pub fn fisher_information(p: &SourcePair, g: &BeamGeometry) -> f64 {
    let w0 = g.waist();
    let k = 2.0 * std::f64::consts::PI / g.wavelength();
    let term_minus = p.n_minus.sqrt() * (p.phi_minus + k * p.ell_minus).cos();
    let term_plus = p.n_plus.sqrt() * (p.phi_plus + k * p.ell_plus).cos();
    2.0 / (w0 * w0) * (term_minus - term_plus) * (term_minus - term_plus)
}

/// Envelope of [`fisher_information`] over the path phases:
/// `(2/w0²)·(√N₊ + √N₋)²`, attained when the two cosines sit at opposite
/// extremes.
pub fn fisher_information_max(p: &SourcePair, g: &BeamGeometry) -> f64 {
    let w0 = g.waist();
    let s = p.n_plus.sqrt() + p.n_minus.sqrt();
    2.0 / (w0 * w0) * s * s
}

/// Standard quantum limit of the separation estimate,
/// `d_SQL = w0/(√2·(√N₊ + √N₋))`.
pub fn d_sql(p: &SourcePair, g: &BeamGeometry) -> Result<f64> {
    if p.n_plus + p.n_minus <= 0.0 {
        return Err(Error::domain(
            "standard quantum limit undefined with zero photons in both sources".to_string(),
        ));
    }
    Ok(g.waist() / (2.0f64.sqrt() * (p.n_plus.sqrt() + p.n_minus.sqrt())))
}

fn require_common_phase(p: &SourcePair, rx: &Receiver) -> Result<()> {
    // Exact comparison on purpose: the closed-form moments are only valid
    // with both path phases locked to the local oscillator.
    if p.phi_plus != rx.phi_lo || p.phi_minus != rx.phi_lo {
        return Err(Error::PhaseContract {
            phi_plus: p.phi_plus,
            phi_minus: p.phi_minus,
            phi_lo: rx.phi_lo,
        });
    }
    Ok(())
}

fn mean_at(p: &SourcePair, g: &BeamGeometry, rx: &Receiver, legs: (ChannelLeg, ChannelLeg), displacement: f64) -> f64 {
    let e2 = rx.field_norm * rx.field_norm;
    let captured = (legs.0.transmissivity() * p.n_plus).sqrt()
        + (legs.1.transmissivity() * p.n_minus).sqrt();
    2.0 * e2 * (rx.eta * rx.n_lo).sqrt() * (displacement / g.waist()) * captured
}

/// Homodyne mean `⟨Ĵ⟩ = 2𝓔²√(η·N_lo)·(d/w0)·(√(T₊N₊) + √(T₋N₋))`.
///
/// Valid only with φ₊ = φ₋ = φ_lo; any other phase combination fails with
/// [`Error::PhaseContract`], whose message points to the Monte Carlo path
/// that handles free phases.
pub fn mean_output(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
) -> Result<f64> {
    require_common_phase(p, rx)?;
    Ok(mean_at(p, g, rx, legs, p.d))
}

/// Homodyne background variance (d = 0 convention)
/// `⟨δĴ²⟩ = 2𝓔⁴N_lo·(1 + √(η(1−η))·(√(1−T₊) + √(1−T₋)))`.
pub fn variance_output(rx: &Receiver, legs: (ChannelLeg, ChannelLeg)) -> f64 {
    let e4 = rx.field_norm.powi(4);
    let loss_mix = (rx.eta * (1.0 - rx.eta)).sqrt()
        * ((1.0 - legs.0.transmissivity()).sqrt() + (1.0 - legs.1.transmissivity()).sqrt());
    2.0 * e4 * rx.n_lo * (1.0 + loss_mix)
}

/// SNR at separation `d`: mean over the square root of the d-independent
/// background variance. 𝓔 cancels.
pub fn snr(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    d: f64,
) -> Result<f64> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::domain(format!(
            "separation must be finite and >= 0, got {d}"
        )));
    }
    require_common_phase(p, rx)?;
    Ok(mean_at(p, g, rx, legs, d) / variance_output(rx, legs).sqrt())
}

/// Minimum resolvable separation (SNR = 1 threshold):
/// `d_min = w0·(1 + √(η(1−η))·(√(1−T₊) + √(1−T₋)))^{1/2}
///          / (√(2η)·(√(T₊N₊) + √(T₋N₋)))`.
///
/// Recovers `d_sql` exactly at η = 1, T± = 1.
pub fn d_min(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
) -> Result<f64> {
    let captured = (legs.0.transmissivity() * p.n_plus).sqrt()
        + (legs.1.transmissivity() * p.n_minus).sqrt();
    if captured <= 0.0 {
        return Err(Error::domain(
            "minimum separation undefined with zero captured photons \
             (T₊N₊ + T₋N₋ = 0)"
                .to_string(),
        ));
    }
    let loss_mix = (rx.eta * (1.0 - rx.eta)).sqrt()
        * ((1.0 - legs.0.transmissivity()).sqrt() + (1.0 - legs.1.transmissivity()).sqrt());
    Ok(g.waist() * (1.0 + loss_mix).sqrt() / ((2.0 * rx.eta).sqrt() * captured))
}

/// Common offset scale of both misalignment variants:
/// `√(T₊N₊ + T₋N₋) / (2√N_lo·(√(T₊N₊) + √(T₋N₋)))`.
fn misalignment_offset_factor(p: &SourcePair, rx: &Receiver, legs: (ChannelLeg, ChannelLeg)) -> f64 {
    let tn_plus = legs.0.transmissivity() * p.n_plus;
    let tn_minus = legs.1.transmissivity() * p.n_minus;
    (tn_plus + tn_minus).sqrt() / (2.0 * rx.n_lo.sqrt() * (tn_plus.sqrt() + tn_minus.sqrt()))
}

/// Excess variance from a centroid offset scale `offset` (jitter width or
/// fixed offset): `𝓔⁴·η·offset²·(T₊N₊ + T₋N₋)/w0²`, the shot noise of the
/// captured signal photons leaking through the first-order mode.
fn misalignment_excess_variance(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    offset: f64,
) -> f64 {
    let e4 = rx.field_norm.powi(4);
    let tn = legs.0.transmissivity() * p.n_plus + legs.1.transmissivity() * p.n_minus;
    e4 * rx.eta * offset * offset * tn / (g.waist() * g.waist())
}

/// Measurement statistics with shot-to-shot Gaussian centroid jitter of
/// width `sigma_d`, at mean separation `d_bar`.
pub fn stats_fluctuating(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    sigma_d: f64,
    d_bar: f64,
) -> Result<MeasurementStats> {
    if !(sigma_d.is_finite() && sigma_d >= 0.0) {
        return Err(Error::domain(format!(
            "jitter width must be finite and >= 0, got {sigma_d}"
        )));
    }
    if !d_bar.is_finite() {
        return Err(Error::domain(format!(
            "mean separation must be finite, got {d_bar}"
        )));
    }
    require_common_phase(p, rx)?;
    let mean = mean_at(p, g, rx, legs, d_bar);
    let variance =
        variance_output(rx, legs) + misalignment_excess_variance(p, g, rx, legs, sigma_d);
    Ok(MeasurementStats {
        mean,
        variance,
        snr: mean / variance.sqrt(),
    })
}

/// Minimum resolvable mean separation under centroid jitter:
/// `d_min + σ_d·√(T₊N₊ + T₋N₋)/(2√N_lo·(√(T₊N₊) + √(T₋N₋)))`.
pub fn d_min_fluctuating(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    sigma_d: f64,
) -> Result<f64> {
    if !(sigma_d.is_finite() && sigma_d >= 0.0) {
        return Err(Error::domain(format!(
            "jitter width must be finite and >= 0, got {sigma_d}"
        )));
    }
    Ok(d_min(p, g, rx, legs)? + sigma_d * misalignment_offset_factor(p, rx, legs))
}

/// Measurement statistics with a fixed centroid offset `delta_x`: the mean
/// is proportional to the residual separation d − δ_x, and the offset's
/// signal shot noise adds to the variance.
///
/// The underlying mode expansion needs |d − δ_x| < w0.
pub fn stats_fixed(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    delta_x: f64,
) -> Result<MeasurementStats> {
    if !delta_x.is_finite() {
        return Err(Error::domain(format!(
            "fixed offset must be finite, got {delta_x}"
        )));
    }
    let residual = p.d - delta_x;
    if residual.abs() >= g.waist() {
        return Err(Error::truncation(format!(
            "residual separation |d - delta_x| = {} is not small against the \
             waist {}; the low-order mode expansion requires |d - delta_x| < w0",
            residual.abs(),
            g.waist()
        )));
    }
    require_common_phase(p, rx)?;
    let mean = mean_at(p, g, rx, legs, residual);
    let variance =
        variance_output(rx, legs) + misalignment_excess_variance(p, g, rx, legs, delta_x);
    Ok(MeasurementStats {
        mean,
        variance,
        snr: mean / variance.sqrt(),
    })
}

/// Minimum resolvable separation with a fixed centroid offset:
/// `d_min + δ_x·(√(T₊N₊ + T₋N₋)/(2√N_lo·(√(T₊N₊) + √(T₋N₋))) + 1)`.
/// The `+1` is the direct bias of the offset itself, which is why a fixed
/// misalignment costs strictly more than jitter of the same size.
pub fn d_min_fixed(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    delta_x: f64,
) -> Result<f64> {
    if !delta_x.is_finite() {
        return Err(Error::domain(format!(
            "fixed offset must be finite, got {delta_x}"
        )));
    }
    if (p.d - delta_x).abs() >= g.waist() {
        return Err(Error::truncation(format!(
            "residual separation |d - delta_x| = {} is not small against the \
             waist {}; the low-order mode expansion requires |d - delta_x| < w0",
            (p.d - delta_x).abs(),
            g.waist()
        )));
    }
    Ok(d_min(p, g, rx, legs)? + delta_x * (misalignment_offset_factor(p, rx, legs) + 1.0))
}

/// Compare the (misalignment-appropriate) minimum separation against the
/// Rayleigh benchmark at the mean propagation distance.
pub fn super_resolution_check(
    p: &SourcePair,
    g: &BeamGeometry,
    rx: &Receiver,
    legs: (ChannelLeg, ChannelLeg),
    mis: &MisalignmentModel,
) -> Result<SuperResolution> {
    let d_min_variant = match *mis {
        MisalignmentModel::None => d_min(p, g, rx, legs)?,
        MisalignmentModel::Fluctuating { sigma_d } => {
            d_min_fluctuating(p, g, rx, legs, sigma_d)?
        }
        MisalignmentModel::Fixed { delta_x } => d_min_fixed(p, g, rx, legs, delta_x)?,
    };
    let ell_bar = 0.5 * (legs.0.ell() + legs.1.ell());
    if !(ell_bar > 0.0) {
        return Err(Error::domain(format!(
            "Rayleigh benchmark undefined at mean distance {ell_bar}"
        )));
    }
    let d_rayleigh = channel::rayleigh_limit(g, ell_bar);
    let margin = d_rayleigh - d_min_variant;
    Ok(SuperResolution {
        d_min: d_min_variant,
        d_rayleigh,
        resolved: margin > 0.0,
        margin,
    })
}
