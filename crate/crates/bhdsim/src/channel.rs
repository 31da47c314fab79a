//! Diffraction loss of a propagated beam at a finite receiver aperture,
//! modeled as a beam splitter of transmissivity T, plus the classical
//! Rayleigh benchmark the resolved/unresolved verdict is measured against.
//!
//! The aperture integral is one-dimensional, a slit of half-width `r` in
//! the measured transverse coordinate: T is the captured fraction of the
//! first-order mode intensity, `∫_{-r}^{r} |u_1(x, ell)|² dx`, which has the
//! closed form `erf(√2·r/w) − 2^{3/2}·r·exp(−2r²/w²)/(√π·w)` with
//! `w = w(ell)`. Both routes are implemented; the quadrature one exists to
//! check the closed one and is never on the hot path.

use crate::beam::{self, BeamGeometry};
use crate::error::{Error, Result};
use crate::numerics::{self, erf, Quadrature};
use std::f64::consts::{PI, SQRT_2};

/// Receiver aperture half-width (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aperture {
    r: f64,
}

impl Aperture {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!(
                "aperture radius must be finite and > 0, got {r}"
            )));
        }
        Ok(Self { r })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }
}

/// One propagation path to the receiver: distance and its cached
/// transmissivity. T is always derived from (geometry, aperture, distance)
/// at construction, never set directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLeg {
    ell: f64,
    t: f64,
}

impl ChannelLeg {
    pub fn new(g: &BeamGeometry, a: &Aperture, ell: f64) -> Result<Self> {
        if !(ell.is_finite() && ell >= 0.0) {
            return Err(Error::domain(format!(
                "propagation distance must be finite and >= 0, got {ell}"
            )));
        }
        Ok(Self {
            ell,
            t: transmissivity_closed(g, a, ell),
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn transmissivity(&self) -> f64 {
        self.t
    }
}

/// Closed-form slit transmissivity at distance `ell >= 0`.
///
/// Mathematically T ∈ [0, 1); rounding may exit the interval by strictly
/// less than 1e-12 and only that much is clamped away.
pub fn transmissivity_closed(g: &BeamGeometry, a: &Aperture, ell: f64) -> f64 {
    assert!(
        ell.is_finite() && ell >= 0.0,
        "propagation distance must be finite and >= 0, got {ell}"
    );
    let w = g.beam_width(ell);
    let r = a.radius();
    let t = erf(SQRT_2 * r / w) - 2.0 * SQRT_2 * r * (-2.0 * r * r / (w * w)).exp() / (PI.sqrt() * w);
    if t > 1.0 {
        assert!(t - 1.0 < 1e-12, "transmissivity {t} exceeds 1 beyond rounding");
        1.0
    } else if t < 0.0 {
        assert!(t > -1e-12, "transmissivity {t} below 0 beyond rounding");
        0.0
    } else {
        t
    }
}

/// Transmissivity as the captured first-order mode intensity
/// `∫_{-r}^{r} |u_1(x, ell)|² dx`, by adaptive quadrature. Oracle for
/// [`transmissivity_closed`].
pub fn transmissivity_numeric(
    g: &BeamGeometry,
    a: &Aperture,
    ell: f64,
    quad: &Quadrature,
) -> Result<f64> {
    if !(ell.is_finite() && ell >= 0.0) {
        return Err(Error::domain(format!(
            "propagation distance must be finite and >= 0, got {ell}"
        )));
    }
    numerics::integrate(
        |x: f64| beam::hg_1d_unchecked(g, 1, x, ell).norm_sqr(),
        -a.radius(),
        a.radius(),
        quad,
    )
}

/// Classical Rayleigh resolution benchmark `λ·ell/w0` at distance
/// `ell > 0`.
pub fn rayleigh_limit(g: &BeamGeometry, ell: f64) -> f64 {
    assert!(
        ell.is_finite() && ell > 0.0,
        "propagation distance must be finite and > 0, got {ell}"
    );
    g.wavelength() * ell / g.waist()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn optics() -> BeamGeometry {
        BeamGeometry::new(600e-9, 0.1).unwrap()
    }

    fn table_aperture() -> Aperture {
        Aperture::new(0.2).unwrap()
    }

    const Q: Quadrature = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let g = optics();
        let a = table_aperture();
        for &ell in &[0.0, 1.0e4, 1.0e5, 1.0e6] {
            let closed = transmissivity_closed(&g, &a, ell);
            let numeric = transmissivity_numeric(&g, &a, ell, &Q).unwrap();
            assert!(
                (closed - numeric).abs() <= 1e-10,
                "ell = {ell}: closed {closed}, numeric {numeric}"
            );
        }
    }

    #[test]
    fn reference_values() {
        let g = optics();
        let a = table_aperture();
        let t0 = transmissivity_closed(&g, &a, 0.0);
        assert!((t0 - 0.998_866_015_710_215).abs() <= 1e-12, "T(0) = {t0}");
        let t5 = transmissivity_closed(&g, &a, 1.0e5);
        assert!((t5 - 0.671_725_203_262_209).abs() <= 1e-12, "T(1e5) = {t5}");
    }

    #[test]
    fn capture_saturates_with_wide_aperture() {
        let g = optics();
        let w = g.beam_width(1.0e5);
        let wide = Aperture::new(10.0 * w).unwrap();
        let t = transmissivity_closed(&g, &wide, 1.0e5);
        assert!((t - 1.0).abs() <= 1e-12, "T = {t}");

        // at 20 widths both terms saturate in f64 and T is exactly 1
        let wider = Aperture::new(20.0 * w).unwrap();
        assert_eq!(transmissivity_closed(&g, &wider, 1.0e5), 1.0);
    }

    #[test]
    fn narrow_aperture_captures_nothing() {
        let g = optics();
        let pin = Aperture::new(1e-8).unwrap();
        assert!(transmissivity_closed(&g, &pin, 0.0) <= 1e-12);

        let small = Aperture::new(1e-4 * g.waist()).unwrap();
        let closed = transmissivity_closed(&g, &small, 0.0);
        let numeric = transmissivity_numeric(&g, &small, 0.0, &Q).unwrap();
        assert!((closed - numeric).abs() <= 1e-10);
    }

    #[test]
    fn non_increasing_in_distance() {
        let g = optics();
        let a = table_aperture();
        let mut prev = transmissivity_closed(&g, &a, 0.0);
        for k in 1..=60 {
            let ell = 1.0e6 * k as f64 / 60.0;
            let t = transmissivity_closed(&g, &a, ell);
            assert!(t <= prev, "T rose from {prev} to {t} at ell = {ell}");
            prev = t;
        }
    }

    #[test]
    fn leg_caches_its_transmissivity() {
        let g = optics();
        let a = table_aperture();
        let leg = ChannelLeg::new(&g, &a, 1.0e5).unwrap();
        assert_eq!(leg.ell(), 1.0e5);
        assert_eq!(leg.transmissivity(), transmissivity_closed(&g, &a, 1.0e5));
        assert!(leg.transmissivity() >= 0.0 && leg.transmissivity() <= 1.0);
    }

    #[test]
    fn rayleigh_values_and_linearity() {
        let g = optics();
        assert!((rayleigh_limit(&g, 1.0e5) - 0.6).abs() <= 1e-12);
        assert!((rayleigh_limit(&g, 1.0e4) - 0.06).abs() <= 1e-12);
        let one = rayleigh_limit(&g, 1.7e4);
        assert_eq!(rayleigh_limit(&g, 3.4e4), 2.0 * one);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let g = optics();
        let a = table_aperture();
        assert!(Aperture::new(0.0).is_err());
        assert!(Aperture::new(-0.1).is_err());
        assert!(Aperture::new(f64::INFINITY).is_err());
        assert!(ChannelLeg::new(&g, &a, -1.0).is_err());
        assert!(ChannelLeg::new(&g, &a, f64::NAN).is_err());
        assert!(transmissivity_numeric(&g, &a, -1.0, &Q).is_err());
    }

    #[test]
    #[should_panic(expected = "propagation distance")]
    fn rayleigh_at_zero_distance_panics() {
        rayleigh_limit(&optics(), 0.0);
    }

    proptest! {
        #[test]
        fn transmissivity_increases_with_aperture(r1 in 0.05f64..0.4, r2 in 0.05f64..0.4) {
            let g = optics();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assume!(hi - lo > 1e-6);
            let t_lo = transmissivity_closed(&g, &Aperture::new(lo).unwrap(), 1.0e5);
            let t_hi = transmissivity_closed(&g, &Aperture::new(hi).unwrap(), 1.0e5);
            prop_assert!(t_lo < t_hi, "T({lo}) = {t_lo} !< T({hi}) = {t_hi}");
        }

        #[test]
        fn transmissivity_stays_in_unit_interval(
            r in 0.01f64..2.0,
            ell in 0.0f64..1.0e7,
        ) {
            let g = optics();
            let t = transmissivity_closed(&g, &Aperture::new(r).unwrap(), ell);
            prop_assert!((0.0..=1.0).contains(&t), "T = {t}");
        }
    }
}

