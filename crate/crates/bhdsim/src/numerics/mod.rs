//! Foundation layer: special functions, adaptive quadrature, and
//! reproducible random sampling.
//!
//! Everything downstream leans on three guarantees made here:
//!
//! * [`hermite_phys`] evaluates the physicist's Hermite polynomials through
//!   the three-term recurrence, guarded to order 30 where the recurrence is
//!   still far from overflow at the argument ranges the mode engine uses.
//! * [`integrate`] is an adaptive 7/15-point Gauss–Kronrod scheme, generic
//!   over real- and complex-valued integrands, used as the independent
//!   numerical oracle for every closed-form overlap and transmissivity
//!   expression in the crate.
//! * [`RngStream`] is a counter-seeded ChaCha generator: a (seed, substream)
//!   pair fully determines the sample sequence, so Monte Carlo runs are
//!   reproducible regardless of thread scheduling.

pub mod erf;
mod rng;

pub use erf::erf;
pub use rng::RngStream;

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Highest Hermite order accepted anywhere in the crate.
///
/// The three-term recurrence is numerically benign well past this, but the
/// mode machinery has no physical use for orders beyond low tens, and the
/// guard keeps 2^n·n! (the mode normalization) comfortably inside f64 range.
pub const MAX_HERMITE_ORDER: u32 = 30;

/// Physicist's Hermite polynomial H_n(x) by the recurrence
/// H_{n+1}(x) = 2x·H_n(x) − 2n·H_{n−1}(x).
pub fn hermite_phys(n: u32, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::domain(format!(
            "Hermite order {n} exceeds the supported maximum {MAX_HERMITE_ORDER}"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut h_prev = 1.0; // H_0
    let mut h = 2.0 * x; // H_1
    for k in 1..n {
        let h_next = 2.0 * x * h - 2.0 * (k as f64) * h_prev;
        h_prev = h;
        h = h_next;
    }
    Ok(h)
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::domain(format!("abs_tol must be > 0, got {abs_tol}")));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::domain(format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be >= 1".to_string()));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

impl Default for Quadrature {
    /// Tight enough that the oracle comparisons at 1e-10 are limited by the
    /// closed forms, not by the quadrature.
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

/// Codomain of an integrand: the handful of vector-space operations the
/// Gauss–Kronrod kernel needs, implemented for `f64` and `Complex64`.
pub trait IntegrandValue: Copy {
    fn zero() -> Self;
    fn add(self, rhs: Self) -> Self;
    fn sub(self, rhs: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
    fn describe(self) -> String;
}

impl IntegrandValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn describe(self) -> String {
        format!("{self:e}")
    }
}

impl IntegrandValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn describe(self) -> String {
        format!("{:e}{:+e}i", self.re, self.im)
    }
}

// 15-point Kronrod abscissae on [-1, 1] (odd indices are the embedded
// 7-point Gauss nodes) with the matching Gauss and Kronrod weights.
// Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

/// QUADPACK's error rescaling: trust |K15 − G7| only until it is comparable
/// to the interval's own variation estimate, and never report below the
/// roundoff floor of the absolute integral.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if floor > err {
            err = floor;
        }
    }
    err
}

fn qk15_panel<T, F>(f: &mut F, a: f64, b: f64) -> Panel<T>
where
    T: IntegrandValue,
    F: FnMut(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut fv1 = [fc; 7];
    let mut fv2 = [fc; 7];

    let mut resg = fc.scale(WG[3]);
    let mut resk = fc.scale(WGK[7]);
    let mut resabs = fc.norm() * WGK[7];

    for j in 0..3 {
        let jtw = 2 * j + 1; // Gauss points sit at the odd Kronrod indices
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        let fsum = f1.add(f2);
        resg = resg.add(fsum.scale(WG[j]));
        resk = resk.add(fsum.scale(WGK[jtw]));
        resabs += WGK[jtw] * (f1.norm() + f2.norm());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        let fsum = f1.add(f2);
        resk = resk.add(fsum.scale(WGK[jtwm1]));
        resabs += WGK[jtwm1] * (f1.norm() + f2.norm());
    }

    let mean = resk.scale(0.5);
    let mut resasc = WGK[7] * fc.sub(mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * (fv1[j].sub(mean).norm() + fv2[j].sub(mean).norm());
    }

    let value = resk.scale(half);
    let raw_err = resk.sub(resg).norm() * half.abs();
    let error = rescale_error(raw_err, resabs * half.abs(), resasc * half.abs());

    Panel {
        a,
        b,
        value,
        error,
    }
}

fn convergence_error<T: IntegrandValue>(
    panels: &[Panel<T>],
    subdivisions: usize,
) -> Error {
    let mut total = T::zero();
    let mut err = 0.0;
    for p in panels {
        total = total.add(p.value);
        err += p.error;
    }
    Error::Convergence {
        best_estimate: total.describe(),
        error_bound: err,
        subdivisions,
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over the finite interval
/// `[a, b]`, bisecting the worst panel until the summed error estimate is
/// within `max(abs_tol, rel_tol·|result|)`.
///
/// Infinite mode-overlap domains are the caller's business: the Gaussian
/// envelope exp(−2x²/w²) is below 1e-15 of its peak beyond |x| = 6·w(z), so
/// callers truncate there (widened with the mode order and any displacement).
///
/// Exhausting `max_subdivisions` returns [`Error::Convergence`] carrying the
/// best estimate and its error bound.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, q: &Quadrature) -> Result<T>
where
    T: IntegrandValue,
    F: FnMut(f64) -> T,
{
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if !(a < b) {
        return Err(Error::domain(format!(
            "integration requires a < b, got [{a}, {b}]"
        )));
    }

    let mut panels = vec![qk15_panel(&mut f, a, b)];
    let mut subdivisions = 0usize;

    loop {
        let mut total = T::zero();
        let mut total_err = 0.0;
        for p in &panels {
            total = total.add(p.value);
            total_err += p.error;
        }
        let tol = q.abs_tol.max(q.rel_tol * total.norm());
        if total_err <= tol {
            return Ok(total);
        }
        if subdivisions >= q.max_subdivisions {
            return Err(convergence_error(&panels, subdivisions));
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if !(pa < mid && mid < pb) {
            // interval no longer splittable in f64; give up honestly
            panels.push(qk15_panel(&mut f, pa, pb));
            return Err(convergence_error(&panels, subdivisions));
        }
        panels.push(qk15_panel(&mut f, pa, mid));
        panels.push(qk15_panel(&mut f, mid, pb));
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q: Quadrature = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 200,
    };

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_phys(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite_phys(1, 2.0).unwrap(), 4.0);
        // H_3(x) = 8x^3 - 12x
        assert_eq!(hermite_phys(3, 1.0).unwrap(), -4.0);
        assert!(hermite_phys(31, 0.0).is_err());
        assert!(hermite_phys(30, 0.5).is_ok());
    }

    proptest! {
        #[test]
        fn hermite_recurrence_identity(n in 1u32..=9, x in -5.0f64..5.0) {
            let lhs = hermite_phys(n + 1, x).unwrap();
            let rhs = 2.0 * x * hermite_phys(n, x).unwrap()
                - 2.0 * (n as f64) * hermite_phys(n - 1, x).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        #[test]
        fn erf_odd_symmetry(x in -10.0f64..10.0) {
            prop_assert_eq!(erf(x), -erf(-x));
            prop_assert!((erf(x) + erf(-x)).abs() <= 1e-14);
        }

        // G7K15 integrates low-degree polynomials exactly on one panel.
        #[test]
        fn polynomial_exactness(coeffs in proptest::array::uniform7(-3.0f64..3.0)) {
            let f = |x: f64| {
                coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, &c| acc * x + c)
            };
            // exact integral over [-1, 1]: only even powers survive
            let mut exact = 0.0;
            for (k, &c) in coeffs.iter().enumerate() {
                if k % 2 == 0 {
                    exact += 2.0 * c / (k as f64 + 1.0);
                }
            }
            let got: f64 = integrate(f, -1.0, 1.0, &Q).unwrap();
            prop_assert!((got - exact).abs() <= 1e-12, "got {got}, want {exact}");
        }
    }

    #[test]
    fn constant_and_gaussian() {
        let one: f64 = integrate(|_| 1.0, 0.0, 1.0, &Q).unwrap();
        assert!((one - 1.0).abs() <= 1e-14);

        let gauss: f64 = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, &Q).unwrap();
        assert!(
            (gauss - std::f64::consts::PI.sqrt()).abs() <= 1e-12,
            "got {gauss}"
        );
    }

    #[test]
    fn complex_codomain() {
        // ∫_0^{π/2} e^{ix} dx = 1 + i(1 - cos(π/2)) = 1 + i
        let val: Complex64 = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::FRAC_PI_2,
            &Q,
        )
        .unwrap();
        assert!((val - Complex64::new(1.0, 1.0)).norm() <= 1e-12, "got {val}");
    }

    #[test]
    fn erf_against_quadrature_oracle() {
        // erf(x) = (2/√π) ∫_0^x e^{-t²} dt, the defining integral
        for &x in &[0.2, 0.5, 1.0, 1.7, 2.5, 4.0] {
            let integral: f64 = integrate(|t: f64| (-t * t).exp(), 0.0, x, &Q).unwrap();
            let oracle = 2.0 / std::f64::consts::PI.sqrt() * integral;
            assert!(
                (erf(x) - oracle).abs() <= 1e-12,
                "erf({x}) = {}, oracle {oracle}",
                erf(x)
            );
        }
    }

    #[test]
    fn budget_exhaustion_carries_estimate() {
        let tiny = Quadrature {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 1,
        };
        let err = integrate(|x: f64| (50.0 * x).cos().abs(), 0.0, 10.0, &tiny).unwrap_err();
        match err {
            Error::Convergence {
                best_estimate,
                error_bound,
                subdivisions,
            } => {
                assert_eq!(subdivisions, 1);
                assert!(error_bound > 1e-14);
                assert!(!best_estimate.is_empty());
            }
            other => panic!("expected convergence error, got {other}"),
        }
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(integrate(|_| 1.0f64, 1.0, 1.0, &Q).is_err());
        assert!(integrate(|_| 1.0f64, 2.0, 1.0, &Q).is_err());
        assert!(integrate(|_| 1.0f64, 0.0, f64::INFINITY, &Q).is_err());
        assert!(Quadrature::new(0.0, 1e-6, 10).is_err());
        assert!(Quadrature::new(1e-6, -1.0, 10).is_err());
        assert!(Quadrature::new(1e-6, 1e-6, 0).is_err());
    }
}
