//! Poles of the scattering matrix in the strip `-pi < Re k <= pi` of the
//! complex wave-number plane: closed-form branch solutions, a generic
//! companion-matrix root finder, quadrant classification, parameter sweeps,
//! critical values, and the physical-relevance verdict.
//!
//! A pole in the open first quadrant is a bound state whose amplitude grows
//! in time; its presence makes stationary reflection/transmission
//! coefficients meaningless for actual wave-packet dynamics.

use faer::Mat;
use num_complex::Complex;
use rayon::prelude::*;

use crate::assign::min_cost_assignment;
use crate::model::{complex_dispersion, CenterModel, ModelFamily};
use crate::{real, Error, Result, Scalar};

/// Poles with `|Im k|` below this count as sitting on the real axis.
pub const REAL_AXIS_TOLERANCE: f64 = 1e-9;

/// Probe value used to decide whether a family becomes invalid for any
/// positive non-Hermiticity (critical value zero).
pub const FIRST_QUADRANT_PROBE: f64 = 1e-9;

/// Upper end of the default critical-value search range.
pub const DEFAULT_SWEEP_MAX: f64 = 8.0;

/// Character of a pole, set by its location in the complex-k plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleClass {
    /// First quadrant: outgoing bound state growing in time.
    GrowingBound,
    /// Second quadrant: incoming bound state decaying in time.
    DecayingBound,
    /// Third quadrant.
    Antiresonant,
    /// Fourth quadrant.
    Resonant,
    /// On the positive real axis: stationary amplitudes diverge there.
    SpectralSingularity,
    /// On the real axis at the origin or to the left, or on the imaginary
    /// axis; excluded from the validity verdict.
    RealAxisVirtual,
}

impl PoleClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PoleClass::GrowingBound => "growing_bound",
            PoleClass::DecayingBound => "decaying_bound",
            PoleClass::Antiresonant => "antiresonant",
            PoleClass::Resonant => "resonant",
            PoleClass::SpectralSingularity => "spectral_singularity",
            PoleClass::RealAxisVirtual => "real_axis_virtual",
        }
    }
}

impl std::fmt::Display for PoleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scattering-matrix pole. Stores only the wave number; energy and class
/// are derived on demand so they can never drift out of sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole<T> {
    k: Complex<T>,
}

impl<T: Scalar> Pole<T> {
    /// Wraps `Re k` into `(-pi, pi]`; a value exactly on the `-pi` boundary
    /// maps to the `+pi` side.
    pub fn new(k: Complex<T>) -> Self {
        Self { k: Complex::new(wrap_re(k.re), k.im) }
    }

    pub fn k(&self) -> Complex<T> {
        self.k
    }

    /// Complex energy `E = -2 cos k`.
    pub fn energy(&self) -> Complex<T> {
        complex_dispersion(self.k)
    }

    pub fn class(&self) -> PoleClass {
        let tol = real::<T>(REAL_AXIS_TOLERANCE);
        let (re, im) = (self.k.re, self.k.im);
        if im.abs() < tol {
            if re > tol {
                PoleClass::SpectralSingularity
            } else {
                PoleClass::RealAxisVirtual
            }
        } else if re.abs() < tol {
            PoleClass::RealAxisVirtual
        } else if re > T::zero() && im > T::zero() {
            PoleClass::GrowingBound
        } else if re < T::zero() && im > T::zero() {
            PoleClass::DecayingBound
        } else if re < T::zero() {
            PoleClass::Antiresonant
        } else {
            PoleClass::Resonant
        }
    }

    pub fn is_growing_bound(&self) -> bool {
        self.class() == PoleClass::GrowingBound
    }
}

fn wrap_re<T: Scalar>(re: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut r = re;
    while r > pi {
        r = r - two_pi;
    }
    while r < -pi {
        r = r + two_pi;
    }
    if r == -pi {
        pi
    } else {
        r
    }
}

/// Distance between wave numbers, with the real parts compared modulo 2 pi
/// so that poles on opposite sides of the branch cut stay close.
pub fn pole_distance<T: Scalar>(a: Complex<T>, b: Complex<T>) -> T {
    let pi = T::PI();
    let mut dre = wrap_re(a.re - b.re).abs();
    if dre > pi {
        dre = (dre - (pi + pi)).abs();
    }
    dre.hypot(a.im - b.im)
}

/// Evaluates the pole condition of `model` at complex `k`; its zeros in the
/// strip `-pi < Re k <= pi` are the S-matrix poles.
pub fn pole_equation_value<T: Scalar>(model: &CenterModel<T>, k: Complex<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let two = real::<T>(2.0);
    match *model {
        CenterModel::ImaginaryOnsite { gamma0, gamma1 } => {
            let g0 = Complex::new(gamma0, T::zero());
            let g1 = Complex::new(gamma1, T::zero());
            g0 - g1 + i * g0 * g1 * (i * k).exp() + k.sin() * two
        }
        _ => {
            let (kl, kr) = model.hoppings();
            one - kl * kr * (i * k * two).exp()
        }
    }
}

/// Coefficients `[c0, c1, c2]` (ascending powers) of the pole condition
/// rewritten as a polynomial in `z = e^{ik}`.
pub fn pole_polynomial<T: Scalar>(model: &CenterModel<T>) -> [Complex<T>; 3] {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    match *model {
        // the pole condition times i z:
        // (1 - g0 g1) z^2 + i (g0 - g1) z - 1 = 0
        CenterModel::ImaginaryOnsite { gamma0, gamma1 } => [
            -one,
            i * Complex::new(gamma0 - gamma1, T::zero()),
            Complex::new(T::one() - gamma0 * gamma1, T::zero()),
        ],
        // 1 - kappa_L kappa_R z^2 = 0
        _ => {
            let (kl, kr) = model.hoppings();
            [one, Complex::new(T::zero(), T::zero()), -(kl * kr)]
        }
    }
}

/// All roots of a polynomial in ascending-coefficient form, found as the
/// eigenvalues of its companion matrix. Returns the roots together with the
/// effective degree after trimming vanishing leading coefficients.
fn polynomial_roots<T: Scalar>(coeffs: &[Complex<T>]) -> Result<(Vec<Complex<T>>, usize)> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
    if max_mag == T::zero() {
        return Ok((Vec::new(), 0));
    }
    let tol = max_mag * real::<T>(1e-12);
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].norm() <= tol {
        degree -= 1;
    }
    if degree == 0 {
        return Ok((Vec::new(), 0));
    }
    let lead = coeffs[degree];
    let mut companion: Mat<Complex<T>> = Mat::zeros(degree, degree);
    for r in 1..degree {
        companion[(r, r - 1)] = Complex::new(T::one(), T::zero());
    }
    for r in 0..degree {
        companion[(r, degree - 1)] = -coeffs[r] / lead;
    }
    let roots = companion.eigenvalues().map_err(|_| Error::EigensolverFailed)?;
    Ok((roots, degree))
}

fn poles_from_roots<T: Scalar>(roots: Vec<Complex<T>>) -> Vec<Pole<T>> {
    let mut poles: Vec<Pole<T>> = roots
        .into_iter()
        .filter(|z| z.norm() > T::zero() && z.re.is_finite() && z.im.is_finite())
        .map(|z| Pole::new(Complex::new(z.arg(), -z.norm().ln())))
        .collect();
    sort_poles(&mut poles);
    poles
}

fn sort_poles<T: Scalar>(poles: &mut [Pole<T>]) {
    poles.sort_by(|a, b| {
        (a.k.re, a.k.im)
            .partial_cmp(&(b.k.re, b.k.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Generic solver: reduces the pole condition to a polynomial in
/// `z = e^{ik}`, takes companion-matrix eigenvalues, and maps back through
/// the principal logarithm `k = -i log z`, which lands every pole in
/// `-pi < Re k <= pi`.
///
/// Degenerate parameters that lower the polynomial degree (for the on-site
/// model, `gamma0 * gamma1 = 1`) are reported as [`Error::DegreeCollapse`].
pub fn solve_poles_numeric<T: Scalar>(model: &CenterModel<T>) -> Result<Vec<Pole<T>>> {
    let coeffs = pole_polynomial(model);
    let nominal = coeffs.len() - 1;
    let (roots, degree) = polynomial_roots(&coeffs)?;
    if degree < nominal {
        return Err(Error::DegreeCollapse { nominal, found: degree });
    }
    Ok(poles_from_roots(roots))
}

/// Branch-formula solver.
///
/// The on-site model uses the two-branch closed form, which assumes
/// `gamma0 = 1`; other `gamma0` values fall through to the numeric solver.
/// Hopping models reduce to `e^{2ik} = 1/(kappa_L kappa_R)`, solved on the
/// principal branch with `ln |kappa_L kappa_R|` arranged to stay accurate
/// near the unit circle.
pub fn solve_poles_analytic<T: Scalar>(model: &CenterModel<T>) -> Result<Vec<Pole<T>>> {
    let pi = T::PI();
    let half = real::<T>(0.5);
    match *model {
        CenterModel::ImaginaryOnsite { gamma0, gamma1 } => {
            if gamma0 != T::one() {
                return solve_poles_numeric(model);
            }
            if gamma1 == T::one() {
                return Err(Error::PolesAtInfinity {
                    parameter: "gamma1",
                    value: gamma1.to_f64().unwrap_or(f64::NAN),
                });
            }
            let mut poles = if gamma1 < T::one() {
                let a = ((T::one() - gamma1).sqrt() * half).asin();
                let im = (-gamma1).ln_1p() * half;
                vec![
                    Pole::new(Complex::new(-pi + a, im)),
                    Pole::new(Complex::new(-a, im)),
                ]
            } else {
                let three = real::<T>(3.0);
                let q = ((gamma1 + three) / (gamma1 - T::one())).sqrt();
                vec![
                    Pole::new(Complex::new(-pi * half, -((T::one() + q) * half).ln())),
                    Pole::new(Complex::new(pi * half, -((q - T::one()) * half).ln())),
                ]
            };
            sort_poles(&mut poles);
            Ok(poles)
        }
        _ => {
            let (re_base, ln_abs_p) = hopping_log_product(model)?;
            let im = ln_abs_p * half;
            let mut poles = vec![
                Pole::new(Complex::new(re_base, im)),
                Pole::new(Complex::new(re_base + pi, im)),
            ];
            sort_poles(&mut poles);
            Ok(poles)
        }
    }
}

/// For the hopping models, returns one representative of the two root
/// phases (the pair is `{phase, phase + pi}` modulo 2 pi) and
/// `ln |kappa_L kappa_R|`, with the log formed so that values near zero
/// keep full precision.
fn hopping_log_product<T: Scalar>(model: &CenterModel<T>) -> Result<(T, T)> {
    let parameter = model.family().parameter_name();
    let at_infinity = || Error::PolesAtInfinity {
        parameter,
        value: model.sweep_value().to_f64().unwrap_or(f64::NAN),
    };
    let pi = T::PI();
    let half = real::<T>(0.5);
    match *model {
        CenterModel::UnequalHopping { kappa, gamma } => {
            let k2 = kappa * kappa;
            let g2 = gamma * gamma;
            if k2 == g2 {
                return Err(at_infinity());
            }
            if k2 > g2 {
                Ok((T::zero(), ((k2 - T::one()) - g2).ln_1p()))
            } else {
                Ok((pi * half, (g2 - k2 - T::one()).ln_1p()))
            }
        }
        CenterModel::ComplexHopping { kappa, gamma } => {
            if kappa == T::zero() && gamma == T::zero() {
                return Err(at_infinity());
            }
            let phase = -gamma.atan2(kappa);
            Ok((phase, ((kappa * kappa - T::one()) + gamma * gamma).ln_1p()))
        }
        CenterModel::AntiHermitianHopping { kappa, gamma } => {
            if kappa == T::zero() && gamma == T::zero() {
                return Err(at_infinity());
            }
            Ok((pi * half, ((kappa * kappa - T::one()) + gamma * gamma).ln_1p()))
        }
        CenterModel::ImaginaryCoupling { gamma } => {
            if gamma == T::zero() {
                return Err(at_infinity());
            }
            Ok((pi * half, gamma.abs().ln() * real::<T>(2.0)))
        }
        CenterModel::ImaginaryOnsite { .. } => unreachable!("handled by the caller"),
    }
}

/// Pole set of a family member for sweep purposes: degree collapses fall
/// back to the reduced root set, poles running off to infinity give `None`.
fn sweep_poles<T: Scalar>(family: &ModelFamily<T>, gamma: T) -> Option<Vec<Pole<T>>> {
    let model = family.at(gamma);
    match solve_poles_analytic(&model) {
        Ok(poles) => Some(poles),
        Err(Error::PolesAtInfinity { .. }) => None,
        Err(Error::DegreeCollapse { .. }) => {
            let (roots, _) = polynomial_roots(&pole_polynomial(&model)).ok()?;
            Some(poles_from_roots(roots))
        }
        Err(_) => None,
    }
}

/// `max Im k` over poles in the right half-plane (`Re k > 0`); negative
/// infinity when no such pole exists. Crosses zero exactly at the critical
/// non-Hermiticity.
fn first_quadrant_margin<T: Scalar>(family: &ModelFamily<T>, gamma: T) -> T {
    match sweep_poles(family, gamma) {
        None => T::neg_infinity(),
        Some(poles) => poles
            .iter()
            .filter(|p| p.k().re > T::zero())
            .map(|p| p.k().im)
            .fold(T::neg_infinity(), T::max),
    }
}

/// Smallest swept value at which a pole enters the open first quadrant,
/// located by bisection over the default range `[0, 8]`.
pub fn critical_gamma<T: Scalar>(model: &CenterModel<T>) -> Result<T> {
    critical_gamma_family(&model.family())
}

/// See [`critical_gamma`].
pub fn critical_gamma_family<T: Scalar>(family: &ModelFamily<T>) -> Result<T> {
    critical_gamma_in(family, real(DEFAULT_SWEEP_MAX))
}

/// Critical-value search over `(0, gamma_max]`.
pub fn critical_gamma_in<T: Scalar>(family: &ModelFamily<T>, gamma_max: T) -> Result<T> {
    let probe = real::<T>(FIRST_QUADRANT_PROBE);
    if first_quadrant_margin(family, probe) > T::zero() {
        // a pole sits in the first quadrant for arbitrarily small values
        return Ok(T::zero());
    }
    let steps = 1024;
    let mut lo = probe;
    let mut margin_lo = first_quadrant_margin(family, lo);
    let mut bracket = None;
    for i in 1..=steps {
        let g = gamma_max * T::from_usize(i).unwrap() / T::from_usize(steps).unwrap();
        let m = first_quadrant_margin(family, g);
        if m > T::zero() && margin_lo <= T::zero() {
            bracket = Some((lo, g));
            break;
        }
        lo = g;
        margin_lo = m;
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoCriticalPoint {
        lo: 0.0,
        hi: gamma_max.to_f64().unwrap_or(f64::NAN),
    })?;
    for _ in 0..200 {
        if b - a <= real::<T>(1e-13) * b.max(T::one()) {
            break;
        }
        let mid = (a + b) * real::<T>(0.5);
        if first_quadrant_margin(family, mid) > T::zero() {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok((a + b) * real::<T>(0.5))
}

/// Outcome of the pole analysis: whether stationary scattering results can
/// describe actual wave-packet dynamics at these parameters.
#[derive(Debug, Clone)]
pub struct ValidityVerdict<T> {
    /// No pole in the open first quadrant and no spectral singularity.
    pub valid: bool,
    /// All poles found in the strip.
    pub poles: Vec<Pole<T>>,
    /// Growing-bound poles (open first quadrant).
    pub offending_poles: Vec<Pole<T>>,
    /// Poles on the positive real axis.
    pub singularities: Vec<Pole<T>>,
    /// `gamma_c - gamma`: positive when the swept parameter is below the
    /// critical value. `None` when no critical value exists in range.
    pub gamma_margin: Option<T>,
}

/// Classifies all poles of `model` and renders the verdict.
pub fn validity_verdict<T: Scalar>(model: &CenterModel<T>) -> ValidityVerdict<T> {
    let family = model.family();
    let poles = sweep_poles(&family, model.sweep_value()).unwrap_or_default();
    let offending: Vec<Pole<T>> =
        poles.iter().copied().filter(|p| p.class() == PoleClass::GrowingBound).collect();
    let singular: Vec<Pole<T>> =
        poles.iter().copied().filter(|p| p.class() == PoleClass::SpectralSingularity).collect();
    let gamma_margin = critical_gamma_family(&family).ok().map(|gc| gc - model.sweep_value());
    ValidityVerdict {
        valid: offending.is_empty() && singular.is_empty(),
        poles,
        offending_poles: offending,
        singularities: singular,
        gamma_margin,
    }
}

/// Pole sets along a parameter grid, with consecutive points matched so
/// that each index follows one pole continuously.
#[derive(Debug, Clone)]
pub struct PoleTrajectory<T> {
    /// Name of the swept parameter.
    pub parameter: &'static str,
    pub points: Vec<TrajectoryPoint<T>>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryPoint<T> {
    pub gamma: T,
    /// Empty at parameter values whose poles sit at infinity.
    pub poles: Vec<Pole<T>>,
}

/// Traces the pole set of `family` across `grid`. Points are solved
/// concurrently; track matching runs serially afterwards with an optimal
/// assignment between consecutive pole sets.
pub fn trace_poles<T: Scalar>(family: &ModelFamily<T>, grid: &[T]) -> Result<PoleTrajectory<T>> {
    if grid.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut points: Vec<TrajectoryPoint<T>> = grid
        .par_iter()
        .map(|&gamma| TrajectoryPoint {
            gamma,
            poles: sweep_poles(family, gamma).unwrap_or_default(),
        })
        .collect();

    for i in 1..points.len() {
        let n = points[i - 1].poles.len();
        if n == 0 || points[i].poles.len() != n {
            continue;
        }
        let cost: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (prev, cur) = (idx / n, idx % n);
                pole_distance(points[i - 1].poles[prev].k(), points[i].poles[cur].k())
                    .to_f64()
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let perm = min_cost_assignment(&cost, n);
        let old = points[i].poles.clone();
        for (prev, &cur) in perm.iter().enumerate() {
            points[i].poles[prev] = old[cur];
        }
    }
    Ok(PoleTrajectory { parameter: family.parameter_name(), points })
}
