//! Stationary scattering amplitudes of the two-site center, both in closed
//! form and from a direct linear solve of the lattice equations on a finite
//! window. The two routes are independent and cross-check each other.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex;

use crate::model::{dispersion, CenterModel};
use crate::{real, Error, Result, Scalar};

/// Below this denominator magnitude the closed forms are reported as
/// divergent (spectral singularity at real k).
pub const SINGULARITY_THRESHOLD: f64 = 1e-8;

/// Default window size for the numeric solver. The amplitudes are exactly
/// window-independent for a two-site center, so any valid window gives the
/// same answer.
pub const DEFAULT_WINDOW_SITES: usize = 41;

/// Minimum window: two lead sites per side plus the center pair.
pub const MIN_WINDOW_SITES: usize = 6;

/// The four stationary amplitudes at a real wave number `k`.
#[derive(Debug, Clone, Copy)]
pub struct Amplitudes<T> {
    pub k: T,
    /// Reflection, left incidence.
    pub r_l: Complex<T>,
    /// Transmission, left incidence.
    pub t_l: Complex<T>,
    /// Reflection, right incidence.
    pub r_r: Complex<T>,
    /// Transmission, right incidence.
    pub t_r: Complex<T>,
}

/// Reflection/transmission coefficients `R = |r|^2`, `T = |t|^2`.
#[derive(Debug, Clone, Copy)]
pub struct Coefficients<T> {
    pub k: T,
    pub r_l: T,
    pub t_l: T,
    pub r_r: T,
    pub t_r: T,
}

impl<T: Scalar> Amplitudes<T> {
    pub fn coefficients(&self) -> Coefficients<T> {
        Coefficients {
            k: self.k,
            r_l: self.r_l.norm_sqr(),
            t_l: self.t_l.norm_sqr(),
            r_r: self.r_r.norm_sqr(),
            t_r: self.t_r.norm_sqr(),
        }
    }

    /// `max |S S^dag - I|` of the assembled S matrix; zero for unitary
    /// scattering.
    pub fn unitarity_defect(&self) -> T {
        let s = [[self.r_l, self.t_r], [self.t_l, self.r_r]];
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                let mut entry = Complex::new(T::zero(), T::zero());
                for m in 0..2 {
                    entry = entry + s[r][m] * s[c][m].conj();
                }
                if r == c {
                    entry = entry - Complex::new(T::one(), T::zero());
                }
                if entry.norm() > worst {
                    worst = entry.norm();
                }
            }
        }
        worst
    }
}

fn check_k<T: Scalar>(k: T) -> Result<()> {
    if k < T::zero() || k > T::PI() || !k.is_finite() {
        return Err(Error::WaveNumberOutOfRange { k: k.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// Evaluates the closed-form amplitudes of `model` at real `k`.
///
/// Valid on `0 <= k <= pi`; the endpoint values are the limits of the
/// closed forms (zero group velocity there, so they carry no scattering
/// interpretation). A denominator smaller than [`SINGULARITY_THRESHOLD`]
/// is reported as [`Error::DivergentAmplitudes`].
pub fn amplitudes_closed_form<T: Scalar>(model: &CenterModel<T>, k: T) -> Result<Amplitudes<T>> {
    check_k(k)?;
    let two = real::<T>(2.0);
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let eik = Complex::from_polar(T::one(), k);
    let e2ik = eik * eik;
    let sin2k = Complex::new(two * k.sin(), T::zero());

    let (r_l, t_l, r_r, t_r, denom_abs) = match *model {
        CenterModel::ImaginaryOnsite { gamma0, gamma1 } => {
            let g0 = Complex::new(gamma0, T::zero());
            let g1 = Complex::new(gamma1, T::zero());
            let denom = g0 - g1 + i * g0 * g1 * eik + sin2k;
            let t = sin2k / denom;
            let r_l = (-g0 + g1 * e2ik - i * g0 * g1 * eik) / denom;
            let r_r = (-g0 + g1 * e2ik.conj() - i * g0 * g1 * eik.conj()) / denom;
            (r_l, t, r_r, t, denom.norm())
        }
        _ => {
            let (kl, kr) = model.hoppings();
            let p = kl * kr;
            let denom = one - p * e2ik;
            let r_l = (p - one) * e2ik / denom;
            let t_l = kr * (e2ik - one) / denom;
            let r_r = (p - one) / denom;
            let t_r = kl * (e2ik - one) / denom;
            (r_l, t_l, r_r, t_r, denom.norm())
        }
    };

    if denom_abs < real::<T>(SINGULARITY_THRESHOLD) {
        return Err(Error::DivergentAmplitudes {
            k: k.to_f64().unwrap_or(f64::NAN),
            denom: denom_abs.to_f64().unwrap_or(0.0),
        });
    }
    Ok(Amplitudes { k, r_l, t_l, r_r, t_r })
}

/// Numeric oracle: solves the stationary lattice equations on a finite
/// window with plane-wave boundary conditions, using the default window.
pub fn amplitudes_numeric<T: Scalar>(model: &CenterModel<T>, k: T) -> Result<Amplitudes<T>> {
    amplitudes_numeric_with_window(model, k, DEFAULT_WINDOW_SITES)
}

/// Same as [`amplitudes_numeric`], with an explicit window size.
///
/// The window spans `window_sites` lattice sites around the center; the
/// outermost two sites of each side carry incoming/outgoing plane-wave
/// conditions. Unknowns are the wave function on the window plus the
/// reflected and transmitted amplitudes.
pub fn amplitudes_numeric_with_window<T: Scalar>(
    model: &CenterModel<T>,
    k: T,
    window_sites: usize,
) -> Result<Amplitudes<T>> {
    check_k(k)?;
    if window_sites < MIN_WINDOW_SITES {
        return Err(Error::WindowTooSmall { got: window_sites, min: MIN_WINDOW_SITES });
    }
    let left_sites = (window_sites - 2) / 2;
    let j_lo = -(left_sites as i64);
    let j_hi = j_lo + window_sites as i64 - 1;
    debug_assert!(j_lo <= -2 && j_hi >= 3);

    let n = window_sites + 2; // wave function plus B and C
    let idx = |j: i64| (j - j_lo) as usize;
    let b_col = window_sites;
    let c_col = window_sites + 1;

    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let energy = Complex::new(dispersion(k), T::zero());
    let (kl, kr) = model.hoppings();
    let (e0, e1) = model.onsite();
    let m1 = Complex::new(-T::one(), T::zero());
    let plane = |j: i64| Complex::from_polar(T::one(), k * T::from_i64(j).unwrap());

    let mut a: Mat<Complex<T>> = Mat::zeros(n, n);
    // two right-hand sides: left incidence (A = 1) and right incidence (D = 1)
    let mut rhs: Mat<Complex<T>> = Mat::zeros(n, 2);

    let mut row = 0;
    // stationary equation at every site whose neighbors are inside the window
    for j in j_lo + 1..j_hi {
        let (hop_left, onsite, hop_right) = match j {
            0 => (m1, e0, kl),
            1 => (kr, e1, m1),
            _ => (m1, zero, m1),
        };
        a[(row, idx(j - 1))] = hop_left;
        a[(row, idx(j))] = onsite - energy;
        a[(row, idx(j + 1))] = hop_right;
        row += 1;
    }
    // left side: psi(j) = A e^{ikj} + B e^{-ikj}
    for j in [j_lo, j_lo + 1] {
        a[(row, idx(j))] = one;
        a[(row, b_col)] = -plane(-j);
        rhs[(row, 0)] = plane(j);
        row += 1;
    }
    // right side: psi(j) = C e^{ikj} + D e^{-ikj}
    for j in [j_hi - 1, j_hi] {
        a[(row, idx(j))] = one;
        a[(row, c_col)] = -plane(j);
        rhs[(row, 1)] = plane(-j);
        row += 1;
    }
    debug_assert_eq!(row, n);

    let lu = a.partial_piv_lu();
    let x = lu.solve(&rhs);

    // growth of the solution over the data signals (near-)singularity
    let mut sol_max = T::zero();
    let mut finite = true;
    for c in 0..2 {
        for r in 0..n {
            let v = x[(r, c)].norm();
            if !v.is_finite() {
                finite = false;
            } else if v > sol_max {
                sol_max = v;
            }
        }
    }
    let cond_estimate = (sol_max * a.norm_l2()).to_f64().unwrap_or(f64::INFINITY);
    if !finite || cond_estimate > 1e10 {
        return Err(Error::NearSingularSystem { cond: cond_estimate });
    }

    Ok(Amplitudes {
        k,
        r_l: x[(b_col, 0)],
        t_l: x[(c_col, 0)],
        r_r: x[(c_col, 1)],
        t_r: x[(b_col, 1)],
    })
}

/// Assembles the 2x2 scattering matrix `[[r_L, t_R], [t_L, r_R]]` from the
/// closed-form amplitudes.
pub fn s_matrix<T: Scalar>(model: &CenterModel<T>, k: T) -> Result<[[Complex<T>; 2]; 2]> {
    let a = amplitudes_closed_form(model, k)?;
    Ok([[a.r_l, a.t_r], [a.t_l, a.r_r]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    type M = CenterModel<f64>;

    fn amp_distance(a: &Amplitudes<f64>, b: &Amplitudes<f64>) -> f64 {
        [(a.r_l, b.r_l), (a.t_l, b.t_l), (a.r_r, b.r_r), (a.t_r, b.t_r)]
            .iter()
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn free_chain_transmits_perfectly() {
        let model = M::ImaginaryOnsite { gamma0: 0.0, gamma1: 0.0 };
        let a = amplitudes_closed_form(&model, FRAC_PI_3).unwrap();
        assert!(a.r_l.norm() < 1e-15);
        assert!((a.t_l * a.t_l.conj() - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let n = amplitudes_numeric(&model, FRAC_PI_3).unwrap();
        assert!(n.r_l.norm() < 1e-12);
        assert!((n.t_l.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_coefficients_on_site_model() {
        // gamma0 = 1, gamma1 = 1.2 at k = pi/3
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let c = amplitudes_closed_form(&model, FRAC_PI_3).unwrap().coefficients();
        assert!((c.r_l - 0.843).abs() < 5e-3, "R_L = {}", c.r_l);
        assert!((c.t_l - 4.98).abs() < 2e-2, "T_L = {}", c.t_l);
    }

    #[test]
    fn onsite_transmission_is_direction_independent() {
        let model = M::ImaginaryOnsite { gamma0: 0.7, gamma1: 2.3 };
        for k in [0.3, 1.1, 2.9] {
            let a = amplitudes_closed_form(&model, k).unwrap();
            assert_eq!(a.t_l, a.t_r);
        }
    }

    #[test]
    fn hopping_transmission_ratio_follows_bond_asymmetry() {
        // t_L kappa_L = t_R kappa_R for every hopping variant
        for model in [
            M::UnequalHopping { kappa: -1.0, gamma: 0.5 },
            M::ComplexHopping { kappa: -1.0, gamma: 0.3 },
            M::AntiHermitianHopping { kappa: -1.0, gamma: 0.8 },
            M::ImaginaryCoupling { gamma: 0.6 },
        ] {
            let (kl, kr) = model.hoppings();
            let a = amplitudes_closed_form(&model, 0.9).unwrap();
            assert!((a.t_l * kl - a.t_r * kr).norm() < 1e-14, "{model:?}");
        }
    }

    #[test]
    fn unequal_hopping_golden_point() {
        // kappa = -1, gamma = 0.5 at k = pi/2: kappa_L kappa_R = 3/4 and
        // e^{2ik} = -1 give exact rational amplitudes, frozen from the
        // numeric solve.
        let model = M::UnequalHopping { kappa: -1.0, gamma: 0.5 };
        let golden = Amplitudes {
            k: FRAC_PI_2,
            r_l: Complex::new(1.0 / 7.0, 0.0),
            t_l: Complex::new(12.0 / 7.0, 0.0),
            r_r: Complex::new(-1.0 / 7.0, 0.0),
            t_r: Complex::new(4.0 / 7.0, 0.0),
        };
        let numeric = amplitudes_numeric(&model, FRAC_PI_2).unwrap();
        assert!(amp_distance(&numeric, &golden) < 1e-10);
        let closed = amplitudes_closed_form(&model, FRAC_PI_2).unwrap();
        assert!(amp_distance(&closed, &golden) < 1e-14);
    }

    #[test]
    fn closed_form_matches_numeric_oracle() {
        for (model, k) in [
            (M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 }, FRAC_PI_3),
            (M::ComplexHopping { kappa: -1.0, gamma: 0.3 }, FRAC_PI_4),
            (M::AntiHermitianHopping { kappa: -1.0, gamma: 1.1 }, 2.2),
            (M::ImaginaryCoupling { gamma: 0.9 }, 1.3),
        ] {
            let a = amplitudes_closed_form(&model, k).unwrap();
            let b = amplitudes_numeric(&model, k).unwrap();
            assert!(amp_distance(&a, &b) < 1e-10, "{model:?}: {}", amp_distance(&a, &b));
        }
    }

    #[test]
    fn numeric_oracle_is_window_independent() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.8 };
        let base = amplitudes_numeric_with_window(&model, 1.1, MIN_WINDOW_SITES).unwrap();
        for w in [7, 12, 41, 80] {
            let other = amplitudes_numeric_with_window(&model, 1.1, w).unwrap();
            assert!(amp_distance(&base, &other) < 1e-11, "window {w}");
        }
        assert!(matches!(
            amplitudes_numeric_with_window(&model, 1.1, 5),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn flux_conservation_at_hermitian_points() {
        let models = [
            M::ImaginaryOnsite { gamma0: 0.0, gamma1: 0.0 },
            M::UnequalHopping { kappa: -1.0, gamma: 0.0 },
            M::ComplexHopping { kappa: -0.7, gamma: 0.0 },
            M::AntiHermitianHopping { kappa: 0.0, gamma: 0.0 },
            M::ImaginaryCoupling { gamma: 0.0 },
        ];
        for model in models {
            for i in 1..50 {
                let k = PI * i as f64 / 50.0;
                // the gamma = 0 imaginary-coupling bond disconnects the leads
                // but still conserves flux (R = 1, T = 0)
                let c = amplitudes_closed_form(&model, k).unwrap().coefficients();
                assert!((c.r_l + c.t_l - 1.0).abs() < 1e-12, "{model:?} k={k}");
                assert!((c.r_r + c.t_r - 1.0).abs() < 1e-12, "{model:?} k={k}");
            }
        }
    }

    #[test]
    fn s_matrix_unitary_only_at_hermitian_points() {
        let hermitian = M::ImaginaryOnsite { gamma0: 0.0, gamma1: 0.0 };
        let a = amplitudes_closed_form(&hermitian, FRAC_PI_3).unwrap();
        assert!(a.unitarity_defect() < 1e-12);

        let lossy = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let b = amplitudes_closed_form(&lossy, FRAC_PI_3).unwrap();
        assert!(b.unitarity_defect() > 0.1);

        let s = s_matrix(&lossy, FRAC_PI_3).unwrap();
        assert_eq!(s[0][0], b.r_l);
        assert_eq!(s[1][0], b.t_l);
        assert_eq!(s[0][1], b.t_r);
        assert_eq!(s[1][1], b.r_r);
    }

    #[test]
    fn divergence_reported_at_spectral_singularity() {
        // imaginary coupling at gamma = 1 has its pole exactly at k = pi/2
        let model = M::ImaginaryCoupling { gamma: 1.0 };
        assert!(matches!(
            amplitudes_closed_form(&model, FRAC_PI_2),
            Err(Error::DivergentAmplitudes { .. })
        ));
        assert!(matches!(
            amplitudes_numeric(&model, FRAC_PI_2),
            Err(Error::NearSingularSystem { .. })
        ));
        // slightly away from the singular k the amplitudes are large but finite
        let a = amplitudes_closed_form(&model, FRAC_PI_2 + 1e-3).unwrap();
        assert!(a.t_l.norm() > 1e2);
    }

    #[test]
    fn band_edges_return_limiting_values() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let a = amplitudes_closed_form(&model, 0.0).unwrap();
        assert!(a.t_l.norm() < 1e-15);
        assert!(amplitudes_closed_form(&model, PI).is_ok());
        assert!(amplitudes_closed_form(&model, -0.1).is_err());
        assert!(amplitudes_closed_form(&model, PI + 0.1).is_err());
    }

    #[test]
    fn left_and_right_solves_share_one_matrix() {
        // cross-check right-incidence against the closed form separately
        let model = M::UnequalHopping { kappa: -1.0, gamma: 0.9 };
        let a = amplitudes_closed_form(&model, 0.7).unwrap();
        let b = amplitudes_numeric(&model, 0.7).unwrap();
        assert!((a.r_r - b.r_r).norm() < 1e-11);
        assert!((a.t_r - b.t_r).norm() < 1e-11);
    }
}
