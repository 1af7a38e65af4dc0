//! Finite Fourier series on the unit circle, and the quadrature rules the
//! rest of the crate builds on.
//!
//! A [`PeriodicFn1`] is a 1-periodic function
//!
//! ```text
//! g(s) = mean + Σ_k ( cos_k · cos(2πks) + sin_k · sin(2πks) )
//! ```
//!
//! held as its coefficients, so first and second derivatives are exact and
//! periodic averages of band-limited expressions are exact once the midpoint
//! rule sees more than twice the top harmonic. Piecewise-smooth integrands
//! (positive parts of curvatures) go through [`split_quadrature`] on
//! subintervals separated at bisection-refined sign changes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One Fourier mode: `cos_coeff·cos(2πks) + sin_coeff·sin(2πks)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic<T> {
    pub k: u32,
    #[serde(rename = "cos")]
    pub cos_coeff: T,
    #[serde(rename = "sin")]
    pub sin_coeff: T,
}

/// A real 1-periodic function stored as a finite Fourier series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFn1<T> {
    pub mean: T,
    #[serde(default = "Vec::new")]
    pub harmonics: Vec<Harmonic<T>>,
}

impl<T: Real> PeriodicFn1<T> {
    pub fn constant(mean: T) -> Self {
        PeriodicFn1 {
            mean,
            harmonics: Vec::new(),
        }
    }

    /// Convenience builder: add one mode to an existing series.
    pub fn with_harmonic(mut self, k: u32, cos_coeff: T, sin_coeff: T) -> Self {
        self.harmonics.push(Harmonic {
            k,
            cos_coeff,
            sin_coeff,
        });
        self
    }

    /// `mean + amp·sin(2πks)`, the workhorse profile in the examples.
    pub fn offset_sine(mean: T, k: u32, amp: T) -> Self {
        Self::constant(mean).with_harmonic(k, T::zero(), amp)
    }

    pub fn value(&self, s: T) -> T {
        let two_pi = T::TAU();
        let mut acc = self.mean;
        for h in &self.harmonics {
            let arg = two_pi * T::of_usize(h.k as usize) * s;
            acc = acc + h.cos_coeff * arg.cos() + h.sin_coeff * arg.sin();
        }
        acc
    }

    pub fn derivative1(&self, s: T) -> T {
        let two_pi = T::TAU();
        let mut acc = T::zero();
        for h in &self.harmonics {
            let w = two_pi * T::of_usize(h.k as usize);
            let arg = w * s;
            acc = acc + w * (h.sin_coeff * arg.cos() - h.cos_coeff * arg.sin());
        }
        acc
    }

    pub fn derivative2(&self, s: T) -> T {
        let two_pi = T::TAU();
        let mut acc = T::zero();
        for h in &self.harmonics {
            let w = two_pi * T::of_usize(h.k as usize);
            let arg = w * s;
            acc = acc - w * w * (h.cos_coeff * arg.cos() + h.sin_coeff * arg.sin());
        }
        acc
    }

    /// Largest mode number present (0 for a constant).
    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.iter().map(|h| h.k).max().unwrap_or(0)
    }

    /// The series of `s ↦ g(-s)`: cosine coefficients kept, sine negated.
    pub fn time_reversed(&self) -> Self {
        PeriodicFn1 {
            mean: self.mean,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    k: h.k,
                    cos_coeff: h.cos_coeff,
                    sin_coeff: -h.sin_coeff,
                })
                .collect(),
        }
    }
}

/// Composite midpoint rule for the average of `g` over one period,
/// `∫₀¹ g(s) ds ≈ (1/n)·Σ g((i+½)/n)`.
///
/// For band-limited `g` this is exact as soon as `n` exceeds the top
/// harmonic; for smooth periodic `g` it converges spectrally.
pub fn periodic_quadrature<T: Real>(g: impl Fn(T) -> T, n: usize) -> T {
    assert!(n > 0, "quadrature needs at least one panel");
    let inv = T::one() / T::of_usize(n);
    let half = T::of(0.5);
    let mut acc = T::zero();
    for i in 0..n {
        acc += g((T::of_usize(i) + half) * inv);
    }
    acc * inv
}

/// Midpoint rule refined by doubling from 512 up to 8192 panels, stopping
/// early when one more doubling no longer moves the value.
pub fn adaptive_periodic_quadrature<T: Real>(g: impl Fn(T) -> T) -> T {
    let mut n = 512;
    let mut prev = periodic_quadrature(&g, n);
    while n < 8192 {
        n *= 2;
        let next = periodic_quadrature(&g, n);
        let close = (next - prev).abs() <= T::of(1e-13) * (T::one() + next.abs());
        prev = next;
        if close {
            break;
        }
    }
    prev
}

/// Bisection-refined zeros of `h` on [0, 1), located from `samples` uniform
/// cells. Tangential touches (no sign change) are deliberately not reported:
/// the positive-part integrands this feeds stay smooth across them.
pub fn sign_change_points<T: Real>(h: impl Fn(T) -> T, samples: usize) -> Vec<T> {
    assert!(samples >= 2);
    let n = T::of_usize(samples);
    let mut roots = Vec::new();
    let mut prev_s = T::zero();
    let mut prev_v = h(prev_s);
    for i in 1..=samples {
        let s = T::of_usize(i) / n;
        let v = h(s);
        if prev_v == T::zero() {
            roots.push(prev_s);
        } else if (prev_v < T::zero()) != (v < T::zero()) && v != T::zero() {
            let (mut lo, mut hi, mut flo) = (prev_s, s, prev_v);
            for _ in 0..100 {
                let mid = (lo + hi) * T::of(0.5);
                let fmid = h(mid);
                if fmid == T::zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fmid < T::zero()) == (flo < T::zero()) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::of(1e-15) {
                    break;
                }
            }
            roots.push((lo + hi) * T::of(0.5));
        }
        prev_s = s;
        prev_v = v;
    }
    roots.retain(|r| *r > T::zero() && *r < T::one());
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::of(1e-12));
    roots
}

/// 16-point Gauss–Legendre abscissas (positive half) and weights on [-1, 1].
const GL16: [(f64, f64); 8] = [
    (0.0950125098376374, 0.1894506104550685),
    (0.2816035507792589, 0.1826034150449236),
    (0.4580167776572274, 0.1691565193950025),
    (0.6178762444026438, 0.1495959888165767),
    (0.7554044083550030, 0.1246289712555339),
    (0.8656312023878318, 0.0951585116824928),
    (0.9445750230732326, 0.0622535239386479),
    (0.9894009349916499, 0.0271524594117541),
];

fn gauss_panel<T: Real>(g: &impl Fn(T) -> T, a: T, b: T) -> T {
    let c = (a + b) * T::of(0.5);
    let r = (b - a) * T::of(0.5);
    let mut acc = T::zero();
    for (x, w) in GL16 {
        let (x, w) = (T::of(x), T::of(w));
        acc += w * (g(c + r * x) + g(c - r * x));
    }
    acc * r
}

/// ∫₀¹ g, with [0, 1] split at the given interior breakpoints and each smooth
/// piece integrated by composite 16-point Gauss–Legendre.
pub fn split_quadrature<T: Real>(g: impl Fn(T) -> T, breaks: &[T]) -> T {
    let mut edges = vec![T::zero()];
    edges.extend(breaks.iter().copied().filter(|b| *b > T::zero() && *b < T::one()));
    edges.push(T::one());
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));

    let mut acc = T::zero();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let width = (b - a).as_f64();
        let panels = (width * 64.0).ceil().max(4.0) as usize;
        let pw = (b - a) / T::of_usize(panels);
        for p in 0..panels {
            let pa = a + pw * T::of_usize(p);
            acc += gauss_panel(&g, pa, pa + pw);
        }
    }
    acc
}

/// Minimum (or maximum) of a smooth 1-periodic `f`: scan `samples` uniform
/// points, then polish the best bracket by golden-section search.
pub fn refined_extremum<T: Real>(f: impl Fn(T) -> T, samples: usize, maximize: bool) -> (T, T) {
    assert!(samples >= 8);
    let n = T::of_usize(samples);
    let score = |v: T| if maximize { -v } else { v };
    let mut best_i = 0usize;
    let mut best = score(f(T::zero()));
    for i in 1..samples {
        let v = score(f(T::of_usize(i) / n));
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section on the bracket formed by the two neighbouring samples.
    let step = T::one() / n;
    let mut a = T::of_usize(best_i) / n - step;
    let mut b = T::of_usize(best_i) / n + step;
    let phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = score(f(x1));
    let mut f2 = score(f(x2));
    for _ in 0..90 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = score(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = score(f(x2));
        }
        if b - a <= T::of(1e-14) {
            break;
        }
    }
    let arg = (a + b) * T::of(0.5);
    (arg, f(arg))
}

pub(crate) fn validate_finite_series<T: Real>(g: &PeriodicFn1<T>, name: &'static str) -> Result<()> {
    if !g.mean.is_finite() {
        return Err(Error::invalid(name, "mean coefficient is not finite"));
    }
    for h in &g.harmonics {
        if !(h.cos_coeff.is_finite() && h.sin_coeff.is_finite()) {
            return Err(Error::invalid(name, format!("mode k = {} has non-finite coefficients", h.k)));
        }
        if h.k == 0 {
            return Err(Error::invalid(name, "mode k = 0 belongs in the mean"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn breathing() -> PeriodicFn1<f64> {
        PeriodicFn1::offset_sine(1.0, 1, 0.5)
    }

    #[test]
    fn value_and_derivatives_of_offset_sine() {
        let l = breathing();
        assert_relative_eq!(l.value(0.25), 1.5, max_relative = 1e-15);
        // d/ds [1 + 0.5 sin(2πs)] at 0 = π; second derivative at 1/4 = -2π².
        assert_relative_eq!(l.derivative1(0.0), std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(
            l.derivative2(0.25),
            -2.0 * std::f64::consts::PI.powi(2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn quadrature_of_inverse_square_breathing_profile() {
        // ∫₀¹ (1 + ε sin 2πs)^{-2} ds = (1-ε²)^{-3/2}; at ε = 0.5 this is
        // 1.539600717839002, quoted to 6 figures as 1.539601.
        let l = breathing();
        let exact = (1.0 - 0.25f64).powf(-1.5);
        let q = periodic_quadrature(|s| l.value(s).powi(-2), 256);
        assert_relative_eq!(q, exact, max_relative = 1e-12);
        assert_relative_eq!(q, 1.539601, max_relative = 1e-6);
    }

    #[test]
    fn quadrature_of_squared_derivative_is_two_pi_squared() {
        // ∫₀¹ (2π cos 2πs)² ds = 2π².
        let a: PeriodicFn1<f64> = PeriodicFn1::offset_sine(0.0, 1, 1.0);
        let q = periodic_quadrature(|s| a.derivative1(s).powi(2), 512);
        assert_relative_eq!(q, 2.0 * std::f64::consts::PI.powi(2), max_relative = 1e-13);
    }

    #[test]
    fn zero_mean_oscillation_averages_to_zero() {
        let g = PeriodicFn1::constant(0.0).with_harmonic(3, 0.7, -0.2);
        let q: f64 = periodic_quadrature(|s| g.value(s), 64);
        assert!(q.abs() < 1e-15, "average of a pure mode must vanish, got {q}");
    }

    #[test]
    fn adaptive_quadrature_matches_plain_on_smooth_integrand() {
        let l = breathing();
        let a = adaptive_periodic_quadrature(|s| l.value(s).powi(-2));
        let exact = (1.0 - 0.25f64).powf(-1.5);
        assert_relative_eq!(a, exact, max_relative = 1e-13);
    }

    #[test]
    fn midpoint_is_spectrally_exact_once_resolving_the_band() {
        // (1 + 0.5 sin 2πs + 0.25 cos 8πs)² has top harmonic 8: n = 32 vs 64
        // must agree to near machine precision.
        let g: PeriodicFn1<f64> = PeriodicFn1::constant(1.0)
            .with_harmonic(1, 0.0, 0.5)
            .with_harmonic(4, 0.25, 0.0);
        let q32 = periodic_quadrature(|s| g.value(s).powi(2), 32);
        let q64 = periodic_quadrature(|s| g.value(s).powi(2), 64);
        assert!((q32 - q64).abs() <= 1e-12, "doubling moved the value by {}", q32 - q64);
    }

    #[test]
    fn sign_changes_of_sine_curvature() {
        // d²/ds² sin(2πs) = -4π² sin(2πs): zeros at 0.5 (and the endpoints).
        let a = PeriodicFn1::offset_sine(0.0, 1, 1.0);
        let roots = sign_change_points(|s| a.derivative2(s), 4096);
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn split_quadrature_integrates_positive_part_of_sine_curvature() {
        // ∫₀¹ [ -4π² sin(2πs) ]⁺ ds = 4π² · ∫_{1/2}^{1} |sin| = 4π.
        let a: PeriodicFn1<f64> = PeriodicFn1::offset_sine(0.0, 1, 1.0);
        let kinks = sign_change_points(|s| a.derivative2(s), 4096);
        let v = split_quadrature(|s| a.derivative2(s).max(0.0), &kinks);
        assert_relative_eq!(v, 4.0 * std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn refined_extremum_finds_interior_minimum() {
        let l = breathing();
        let (arg, val) = refined_extremum(|s| l.value(s), 4096, false);
        // The argument of a smooth extremum is only determined to ~√ε.
        assert_relative_eq!(arg, 0.75, epsilon = 1e-7);
        assert_relative_eq!(val, 0.5, epsilon = 1e-12);
        let (_, vmax) = refined_extremum(|s| l.value(s), 4096, true);
        assert_relative_eq!(vmax, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn json_schema_round_trips() {
        let text = r#"{"mean":1.0,"harmonics":[{"k":1,"cos":0.0,"sin":0.5}]}"#;
        let g: PeriodicFn1<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(g, breathing());
        let back = serde_json::to_string(&g).unwrap();
        let again: PeriodicFn1<f64> = serde_json::from_str(&back).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn reversal_is_an_involution_and_mirrors_values() {
        let g = PeriodicFn1::constant(0.3)
            .with_harmonic(1, 0.1, 0.4)
            .with_harmonic(3, -0.2, 0.05);
        let r = g.time_reversed();
        assert_eq!(r.time_reversed(), g);
        for i in 0..17 {
            let s = i as f64 / 17.0;
            assert_relative_eq!(r.value(s), g.value(-s), max_relative = 1e-13);
        }
    }

    #[test]
    fn single_precision_evaluation_is_consistent() {
        let g: PeriodicFn1<f32> = PeriodicFn1::offset_sine(1.0, 1, 0.5);
        assert_relative_eq!(g.value(0.25), 1.5f32, max_relative = 1e-6);
        let q = periodic_quadrature(|s| g.value(s), 256);
        assert_relative_eq!(q, 1.0f32, max_relative = 1e-5);
    }

    proptest! {
        // Shifting the argument by whole periods must not change the value.
        #[test]
        fn shift_invariance(mean in -2.0f64..2.0, c in -1.0f64..1.0, s in -1.0f64..1.0,
                            k in 1u32..6, shift in -5i32..5) {
            let g = PeriodicFn1::constant(mean).with_harmonic(k, c, s);
            for probe in [0.0, 0.125, 0.333, 0.75] {
                let v0 = g.value(probe);
                let v1 = g.value(probe + shift as f64);
                prop_assert!((v0 - v1).abs() <= 1e-10 * (1.0 + v0.abs()));
            }
        }

        // Coefficient derivatives agree with centered finite differences.
        #[test]
        fn derivatives_match_finite_differences(c in -1.0f64..1.0, s in -1.0f64..1.0,
                                                k in 1u32..5, probe in 0.0f64..1.0) {
            let g = PeriodicFn1::constant(0.5).with_harmonic(k, c, s);
            let h = 1e-6;
            let fd1 = (g.value(probe + h) - g.value(probe - h)) / (2.0 * h);
            let fd2 = (g.value(probe + h) - 2.0 * g.value(probe) + g.value(probe - h)) / (h * h);
            prop_assert!((g.derivative1(probe) - fd1).abs() <= 1e-6 * (1.0 + fd1.abs()));
            prop_assert!((g.derivative2(probe) - fd2).abs() <= 2e-3 * (1.0 + fd2.abs()));
        }
    }
}
