//! Hermite–Gauss transverse modes and the mode decomposition of a
//! transversely displaced fundamental beam.
//!
//! Conventions, fixed once here and relied on everywhere downstream:
//!
//! * Geometry: waist `w0` at `z = 0`, width `w(z) = w0·√(1 + (z/z_R)²)`,
//!   Rayleigh range `z_R = π·w0²/λ`, Gouy phase `Ψ(z) = atan(z/z_R)`,
//!   wavefront curvature radius `R_c(z) = z·(1 + (z_R/z)²)` (infinite at the
//!   waist, where the `1/R_c` term drops out exactly).
//! * 1D amplitude:
//!   `u_n(x,z) = (2/π)^{1/4} · (2^n n! w(z))^{-1/2} · H_n(√2·x/w(z))
//!    · exp(i(2n+1)Ψ(z)/2) · exp(-x²(1/w²(z) + ik/(2R_c(z))))`.
//!   The Gouy factor carries half of (2n+1)Ψ because the mode norm square
//!   rotates by the full (2n+1)Ψ; the phase is built analytically rather
//!   than through a square root so it stays continuous in z.
//! * Displacement sign: `displaced_fundamental(g, x, d, z)` is
//!   `u_0(x + d, z)`, the convention in which the first-order coupling into
//!   `u_1` is `-(d/w0)` at the waist. [`decompose_displacement`] uses the
//!   same sign, and [`DisplacementDecomposition::opposite_source`] flips the
//!   two first-order coefficients for the source displaced the other way.

use crate::error::{Error, Result};
use crate::numerics::{self, Quadrature, MAX_HERMITE_ORDER};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

/// Highest transverse mode order handled by the amplitude evaluators.
pub const MAX_MODE_ORDER: u32 = MAX_HERMITE_ORDER;

/// Wavelength and waist of the (common) transverse mode basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    lambda: f64,
    w0: f64,
}

impl BeamGeometry {
    pub fn new(lambda: f64, w0: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain(format!(
                "wavelength must be finite and > 0, got {lambda}"
            )));
        }
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::domain(format!(
                "waist must be finite and > 0, got {w0}"
            )));
        }
        Ok(Self { lambda, w0 })
    }

    pub fn wavelength(&self) -> f64 {
        self.lambda
    }

    pub fn waist(&self) -> f64 {
        self.w0
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0 * self.w0 / self.lambda
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    /// Beam width at axial distance `z >= 0` from the waist.
    pub fn beam_width(&self, z: f64) -> f64 {
        assert!(
            z.is_finite() && z >= 0.0,
            "axial distance must be finite and >= 0, got {z}"
        );
        let zr = self.rayleigh_range();
        self.w0 * (1.0 + (z / zr) * (z / zr)).sqrt()
    }

    /// Gouy phase `Ψ(z) = atan(z/z_R)`.
    pub fn gouy_phase(&self, z: f64) -> f64 {
        assert!(
            z.is_finite() && z >= 0.0,
            "axial distance must be finite and >= 0, got {z}"
        );
        (z / self.rayleigh_range()).atan()
    }

    /// Wavefront curvature radius; infinite (flat front) at the waist.
    pub fn radius_curvature(&self, z: f64) -> f64 {
        assert!(
            z.is_finite() && z >= 0.0,
            "axial distance must be finite and >= 0, got {z}"
        );
        if z == 0.0 {
            f64::INFINITY
        } else {
            let zr = self.rayleigh_range();
            z * (1.0 + (zr / z) * (zr / z))
        }
    }
}

/// Transverse mode indices (n along x, m along y), bounded by
/// [`MAX_MODE_ORDER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndex {
    n: u32,
    m: u32,
}

impl ModeIndex {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n > MAX_MODE_ORDER || m > MAX_MODE_ORDER {
            return Err(Error::domain(format!(
                "mode index ({n}, {m}) exceeds supported order {MAX_MODE_ORDER}"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Amplitude and phase of `u_n` at one point; assumes the caller has already
/// validated `n`, `x`, `z`.
pub(crate) fn hg_1d_unchecked(g: &BeamGeometry, n: u32, x: f64, z: f64) -> Complex64 {
    let w = g.beam_width(z);
    // 1/R_c is exactly zero at the waist, where R_c is infinite.
    let inv_rc = if z == 0.0 {
        0.0
    } else {
        1.0 / g.radius_curvature(z)
    };
    let norm = (2.0 / PI).powf(0.25) / (((1u64 << n) as f64 * factorial(n)).sqrt() * w.sqrt());
    let h = numerics::hermite_phys(n, SQRT_2 * x / w).expect("order validated by caller");
    let magnitude = norm * h * (-x * x / (w * w)).exp();
    let phase = (2 * n + 1) as f64 * g.gouy_phase(z) / 2.0 - x * x * g.wavenumber() * inv_rc / 2.0;
    magnitude * Complex64::new(phase.cos(), phase.sin())
}

/// 1D Hermite–Gauss amplitude `u_n(x, z)`.
pub fn hg_amplitude_1d(g: &BeamGeometry, n: u32, x: f64, z: f64) -> Result<Complex64> {
    if n > MAX_MODE_ORDER {
        return Err(Error::domain(format!(
            "mode order {n} exceeds supported order {MAX_MODE_ORDER}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "transverse coordinate must be finite, got {x}"
        )));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::domain(format!(
            "axial distance must be finite and >= 0, got {z}"
        )));
    }
    Ok(hg_1d_unchecked(g, n, x, z))
}

/// 2D separable amplitude `u_{n,m}(x, y, z) = u_n(x, z)·u_m(y, z)`.
pub fn hg_amplitude_2d(
    g: &BeamGeometry,
    idx: ModeIndex,
    x: f64,
    y: f64,
    z: f64,
) -> Result<Complex64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::domain(format!(
            "transverse coordinates must be finite, got ({x}, {y})"
        )));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::domain(format!(
            "axial distance must be finite and >= 0, got {z}"
        )));
    }
    Ok(hg_1d_unchecked(g, idx.n, x, z) * hg_1d_unchecked(g, idx.m, y, z))
}

/// Fundamental mode displaced by `d`: `u_0(x + d, z)`. The sign matches
/// [`decompose_displacement`], whose `c10` is `-(d/w0)·cos θ_d`.
pub fn displaced_fundamental(g: &BeamGeometry, x: f64, d: f64, z: f64) -> Result<Complex64> {
    if !d.is_finite() {
        return Err(Error::domain(format!(
            "displacement must be finite, got {d}"
        )));
    }
    hg_amplitude_1d(g, 0, x + d, z)
}

/// Mode content of a displaced fundamental beam to first order in `d/w0`,
/// plus the leading second-order cross term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementDecomposition {
    /// Fundamental, unity to the retained order.
    pub c00: f64,
    /// Coupling into u_{1,0}: `-(d/w0)·cos θ_d`.
    pub c10: f64,
    /// Coupling into u_{0,1}: `-(d/w0)·sin θ_d`.
    pub c01: f64,
    /// Coupling into u_{1,1}: `(d²/2w0²)·sin 2θ_d`.
    pub c11: f64,
}

impl DisplacementDecomposition {
    /// Coefficients of the source displaced in the opposite direction:
    /// first-order terms flip sign, the second-order term does not.
    pub fn opposite_source(self) -> Self {
        Self {
            c00: self.c00,
            c10: -self.c10,
            c01: -self.c01,
            c11: self.c11,
        }
    }
}

/// Decompose a fundamental beam displaced by `d` at in-plane angle
/// `theta_d` into the lowest Hermite–Gauss modes of the undisplaced basis.
///
/// The expansion needs `|d| < w0`; beyond that the truncated series no
/// longer represents the beam and the call fails with
/// [`Error::Truncation`]. The first-order remainder is bounded by
/// `(|d|/w0)³/2`.
pub fn decompose_displacement(
    g: &BeamGeometry,
    d: f64,
    theta_d: f64,
) -> Result<DisplacementDecomposition> {
    if !d.is_finite() || !theta_d.is_finite() {
        return Err(Error::domain(format!(
            "displacement parameters must be finite, got d {d}, theta_d {theta_d}"
        )));
    }
    let w0 = g.waist();
    if d.abs() >= w0 {
        return Err(Error::truncation(format!(
            "displacement magnitude {} is not small against the waist {w0}; \
             the low-order mode expansion requires |d| < w0",
            d.abs()
        )));
    }
    let ratio = d / w0;
    Ok(DisplacementDecomposition {
        c00: 1.0,
        c10: -ratio * theta_d.cos(),
        c01: -ratio * theta_d.sin(),
        c11: 0.5 * ratio * ratio * (2.0 * theta_d).sin(),
    })
}

/// Overlap `∫ u_n*(x,z) · u_0(x + d, z) dx` by adaptive quadrature: the
/// independent check on [`decompose_displacement`]. At the waist the n = 1
/// overlap is exactly `-(d/w0)·exp(-d²/2w0²)`.
pub fn overlap_coefficient(
    g: &BeamGeometry,
    n: u32,
    d: f64,
    z: f64,
    quad: &Quadrature,
) -> Result<Complex64> {
    if n > MAX_MODE_ORDER {
        return Err(Error::domain(format!(
            "mode order {n} exceeds supported order {MAX_MODE_ORDER}"
        )));
    }
    if !d.is_finite() {
        return Err(Error::domain(format!(
            "displacement must be finite, got {d}"
        )));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::domain(format!(
            "axial distance must be finite and >= 0, got {z}"
        )));
    }
    // Gaussian tails are below 1e-15 of peak past 6 widths; widen for the
    // polynomial growth of H_n and for the displaced center.
    let half_width = g.beam_width(z) * (6.0 + 1.5 * f64::from(n).sqrt()) + d.abs();
    numerics::integrate(
        |x: f64| hg_1d_unchecked(g, n, x, z).conj() * hg_1d_unchecked(g, 0, x + d, z),
        -half_width,
        half_width,
        quad,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn optics() -> BeamGeometry {
        BeamGeometry::new(600e-9, 0.1).unwrap()
    }

    const Q: Quadrature = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };

    #[test]
    fn geometry_scales() {
        let g = optics();
        assert_relative_eq!(g.rayleigh_range(), 52_359.877_559_829_88, max_relative = 1e-12);
        assert_relative_eq!(
            g.beam_width(1e5),
            0.1 * (1.0 + (1e5 / g.rayleigh_range()).powi(2)).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(g.beam_width(0.0), 0.1);
        assert_eq!(g.radius_curvature(0.0), f64::INFINITY);
        assert_eq!(1.0 / g.radius_curvature(0.0), 0.0);
        assert_eq!(g.gouy_phase(0.0), 0.0);
        assert_relative_eq!(
            g.gouy_phase(g.rayleigh_range()),
            FRAC_PI_4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn fundamental_peak_value() {
        let g = optics();
        let u0 = hg_amplitude_1d(&g, 0, 0.0, 0.0).unwrap();
        let expected = (2.0 / PI).powf(0.25) / 0.1f64.sqrt();
        assert_relative_eq!(u0.re, expected, max_relative = 1e-14);
        assert_eq!(u0.im, 0.0);
    }

    #[test]
    fn orthonormal_at_waist_and_beyond() {
        let g = optics();
        let zr = g.rayleigh_range();
        for &z in &[0.0, zr, 10.0 * zr] {
            for n in 0..=4u32 {
                for k in 0..=4u32 {
                    let half =
                        g.beam_width(z) * (6.0 + 1.5 * f64::from(n.max(k)).sqrt());
                    let ip: Complex64 = numerics::integrate(
                        |x: f64| {
                            hg_1d_unchecked(&g, n, x, z).conj()
                                * hg_1d_unchecked(&g, k, x, z)
                        },
                        -half,
                        half,
                        &Q,
                    )
                    .unwrap();
                    let expected = if n == k { 1.0 } else { 0.0 };
                    assert!(
                        (ip - Complex64::new(expected, 0.0)).norm() <= 1e-8,
                        "<u_{n}|u_{k}> at z = {z}: {ip}"
                    );
                }
            }
        }
    }

    #[test]
    fn axis_phase_is_half_scaled_gouy() {
        let g = optics();
        let zr = g.rayleigh_range();
        // Odd orders vanish on axis; H_2(0) = -2 contributes a sign flip.
        for &n in &[0u32, 2, 4] {
            for &z in &[0.5 * zr, zr, 3.0 * zr] {
                let u = hg_amplitude_1d(&g, n, 0.0, z).unwrap();
                let mut expected = (2 * n + 1) as f64 * g.gouy_phase(z) / 2.0;
                if numerics::hermite_phys(n, 0.0).unwrap() < 0.0 {
                    expected += PI;
                }
                let diff = (u.arg() - expected).rem_euclid(2.0 * PI);
                let dist = diff.min(2.0 * PI - diff);
                assert!(dist <= 1e-12, "n = {n}, z = {z}: arg {} vs {expected}", u.arg());
            }
        }
    }

    #[test]
    fn mode_norm_square_rotates_by_full_gouy() {
        // |u_n|² carries no phase, but u_n² rotates by (2n+1)Ψ: the half
        // phase per factor is the invariant being pinned here.
        let g = optics();
        let z = 2.0 * g.rayleigh_range();
        for n in [0u32, 2] {
            let u = hg_amplitude_1d(&g, n, 0.0, z).unwrap();
            let square_arg = (u * u).arg();
            let expected = ((2 * n + 1) as f64 * g.gouy_phase(z)).rem_euclid(2.0 * PI);
            let diff = (square_arg - expected).rem_euclid(2.0 * PI);
            let dist = diff.min(2.0 * PI - diff);
            assert!(dist <= 1e-12, "n = {n}: u² arg {square_arg} vs {expected}");
        }
    }

    #[test]
    fn waist_overlap_matches_closed_form() {
        let g = optics();
        let d = 0.01;
        let c1 = overlap_coefficient(&g, 1, d, 0.0, &Q).unwrap();
        let exact = -(d / 0.1) * (-d * d / (2.0 * 0.1 * 0.1)).exp();
        assert!((c1.re - exact).abs() <= 1e-10, "got {}, want {exact}", c1.re);
        assert!(c1.im.abs() <= 1e-12);
        assert_relative_eq!(exact, -0.099_501_247_919_268_24, max_relative = 1e-12);

        let c0 = overlap_coefficient(&g, 0, d, 0.0, &Q).unwrap();
        let exact0 = (-d * d / (2.0 * 0.1 * 0.1)).exp();
        assert!((c0.re - exact0).abs() <= 1e-10);
    }

    #[test]
    fn first_order_coefficient_has_cubic_remainder() {
        let g = optics();
        for &ratio in &[0.01, 0.1, 0.3] {
            let d = ratio * g.waist();
            let numeric = overlap_coefficient(&g, 1, d, 0.0, &Q).unwrap().re;
            let c10 = decompose_displacement(&g, d, 0.0).unwrap().c10;
            assert!(
                (numeric - c10).abs() <= ratio.powi(3),
                "d/w0 = {ratio}: numeric {numeric}, first order {c10}"
            );
        }
    }

    #[test]
    fn decomposition_values_and_flip() {
        let g = optics();
        let d = 0.02;
        let theta = 0.7;
        let c = decompose_displacement(&g, d, theta).unwrap();
        assert_eq!(c.c00, 1.0);
        assert_relative_eq!(c.c10, -(d / 0.1) * theta.cos(), max_relative = 1e-15);
        assert_relative_eq!(c.c01, -(d / 0.1) * theta.sin(), max_relative = 1e-15);
        assert_relative_eq!(
            c.c11,
            0.5 * (d / 0.1) * (d / 0.1) * (2.0 * theta).sin(),
            max_relative = 1e-15
        );

        let o = c.opposite_source();
        assert_eq!(o.c10, -c.c10);
        assert_eq!(o.c01, -c.c01);
        assert_eq!(o.c11, c.c11);
        assert_eq!(o.c00, c.c00);
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let g = optics();
        assert!(BeamGeometry::new(0.0, 0.1).is_err());
        assert!(BeamGeometry::new(600e-9, -0.1).is_err());
        assert!(BeamGeometry::new(f64::NAN, 0.1).is_err());
        assert!(ModeIndex::new(31, 0).is_err());
        assert!(ModeIndex::new(0, 31).is_err());
        assert!(hg_amplitude_1d(&g, 31, 0.0, 0.0).is_err());
        assert!(hg_amplitude_1d(&g, 0, f64::NAN, 0.0).is_err());
        assert!(hg_amplitude_1d(&g, 0, 0.0, -1.0).is_err());
        assert!(matches!(
            decompose_displacement(&g, 0.1, 0.0),
            Err(Error::Truncation(_))
        ));
        assert!(matches!(
            decompose_displacement(&g, -0.25, 0.0),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    #[should_panic(expected = "axial distance")]
    fn negative_axial_distance_panics() {
        optics().beam_width(-1.0);
    }

    proptest! {
        // H_n parity makes u_n(-x) = (-1)^n u_n(x) bit-exact: every term in
        // the recurrence is an exact negation.
        #[test]
        fn amplitude_parity(n in 0u32..=6, x in -0.3f64..0.3) {
            let g = optics();
            for &z in &[0.0, 1.0e4] {
                let plus = hg_amplitude_1d(&g, n, x, z).unwrap();
                let minus = hg_amplitude_1d(&g, n, -x, z).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert_eq!(minus.re, sign * plus.re);
                prop_assert_eq!(minus.im, sign * plus.im);
            }
        }

        #[test]
        fn first_order_terms_are_odd_in_d(d in -0.09f64..0.09, theta in 0.0f64..std::f64::consts::TAU) {
            let g = optics();
            let c = decompose_displacement(&g, d, theta).unwrap();
            let r = decompose_displacement(&g, -d, theta).unwrap();
            prop_assert_eq!(r.c10, -c.c10);
            prop_assert_eq!(r.c01, -c.c01);
            prop_assert_eq!(r.c11, c.c11);
        }

        #[test]
        fn width_monotone_in_z(z1 in 0.0f64..2.0e5, z2 in 0.0f64..2.0e5) {
            let g = optics();
            let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
            prop_assert!(g.beam_width(lo) <= g.beam_width(hi));
        }
    }
}
