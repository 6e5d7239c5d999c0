//! Biorthogonal eigenanalysis of the finite lattice Hamiltonian: paired
//! right/left eigenvectors, detection of isolated time-growing bound
//! states, spatial-localization fits, and finite-size scaling of the
//! continuum's imaginary energies.

use faer::linalg::solvers::Eigen;
use faer::Mat;
use num_complex::Complex;

use crate::assign::min_cost_assignment;
use crate::linfit::fit_line;
use crate::model::{build_finite_hamiltonian, CenterModel, Hamiltonian, LatticeSpec};
use crate::{real, Error, Result, Scalar};

/// Dense eigensolves are refused above this size.
pub const DEFAULT_SIZE_CAP: usize = 2000;

/// A raw right/left overlap below this flags the spectrum as sitting near
/// an exceptional point.
pub const EXCEPTIONAL_OVERLAP_TOLERANCE: f64 = 1e-10;

/// Default `Im E` threshold separating bound states from the continuum
/// (continuum imaginary parts scale as 1/L and stay well below this at the
/// sizes used here).
pub const BOUND_STATE_THRESHOLD: f64 = 0.05;

/// Sites with `|j|` below this are excluded from localization fits; the
/// profile is not asymptotic across the center.
const FIT_WINDOW_MIN_DISTANCE: i64 = 5;

/// Complete eigensystem of a lattice Hamiltonian.
///
/// Right vectors have unit Euclidean norm; left vectors are scaled so that
/// `<phi_n|psi_n> = 1`. Eigenvalues are sorted by real part, then imaginary
/// part.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Scalar> {
    lattice: LatticeSpec,
    eigenvalues: Vec<Complex<T>>,
    right: Mat<Complex<T>>,
    left: Mat<Complex<T>>,
    near_exceptional: bool,
    min_overlap: T,
}

impl<T: Scalar> SpectrumResult<T> {
    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[Complex<T>] {
        &self.eigenvalues
    }

    /// Right eigenvectors as matrix columns.
    pub fn right(&self) -> faer::MatRef<'_, Complex<T>> {
        self.right.as_ref()
    }

    /// Left eigenvectors as matrix columns.
    pub fn left(&self) -> faer::MatRef<'_, Complex<T>> {
        self.left.as_ref()
    }

    pub fn right_vector(&self, n: usize) -> Vec<Complex<T>> {
        (0..self.len()).map(|r| self.right[(r, n)]).collect()
    }

    pub fn left_vector(&self, n: usize) -> Vec<Complex<T>> {
        (0..self.len()).map(|r| self.left[(r, n)]).collect()
    }

    /// Set when the smallest raw right/left overlap fell below
    /// [`EXCEPTIONAL_OVERLAP_TOLERANCE`]; the biorthogonal expansion is
    /// unreliable in that case.
    pub fn near_exceptional(&self) -> bool {
        self.near_exceptional
    }

    pub fn min_overlap(&self) -> T {
        self.min_overlap
    }

    /// `max_nm |<phi_n|psi_m> - delta_nm|`.
    pub fn biorthogonality_defect(&self) -> T {
        let overlaps = self.left.adjoint() * self.right.as_ref();
        let n = self.len();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let mut v = overlaps[(r, c)];
                if r == c {
                    v = v - Complex::new(T::one(), T::zero());
                }
                if v.norm() > worst {
                    worst = v.norm();
                }
            }
        }
        worst
    }

    /// `max |sum_n psi_n phi_n^dag - I|` over entries.
    pub fn completeness_defect(&self) -> T {
        let resolution = self.right.as_ref() * self.left.adjoint();
        let n = self.len();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let mut v = resolution[(r, c)];
                if r == c {
                    v = v - Complex::new(T::one(), T::zero());
                }
                if v.norm() > worst {
                    worst = v.norm();
                }
            }
        }
        worst
    }

    /// `max_n ||H psi_n - E_n psi_n||_2`.
    pub fn residual(&self, h: &Hamiltonian<T>) -> T {
        let hv = h.matrix() * self.right.as_ref();
        let n = self.len();
        let mut worst = T::zero();
        for c in 0..n {
            let mut acc = T::zero();
            for r in 0..n {
                acc = acc + (hv[(r, c)] - self.eigenvalues[c] * self.right[(r, c)]).norm_sqr();
            }
            let norm = acc.sqrt();
            if norm > worst {
                worst = norm;
            }
        }
        worst
    }
}

/// Full eigendecomposition with the default size cap.
pub fn eigendecompose<T: Scalar>(h: &Hamiltonian<T>) -> Result<SpectrumResult<T>> {
    eigendecompose_with_cap(h, DEFAULT_SIZE_CAP)
}

/// Full eigendecomposition of `h`.
///
/// Right eigenpairs come from `H`, left ones from a second solve of
/// `H^dag`; the two sets are paired by conjugate-eigenvalue proximity with
/// an optimal assignment, then biorthonormalized.
pub fn eigendecompose_with_cap<T: Scalar>(
    h: &Hamiltonian<T>,
    cap: usize,
) -> Result<SpectrumResult<T>> {
    let n = h.sites();
    if n > cap {
        return Err(Error::LatticeTooLarge { sites: n, cap });
    }

    let right_eig = h.matrix().eigen().map_err(|_| Error::EigensolverFailed)?;
    let left_eig = Eigen::new(h.matrix().adjoint()).map_err(|_| Error::EigensolverFailed)?;

    // pair each right eigenvalue E with a left eigenvalue closest to E*
    let cost: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (r, l) = (idx / n, idx % n);
            (left_eig.S()[l].conj() - right_eig.S()[r]).norm().to_f64().unwrap_or(f64::INFINITY)
        })
        .collect();
    let pairing = min_cost_assignment(&cost, n);

    // sort eigenpairs by (Re E, Im E)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (right_eig.S()[a], right_eig.S()[b]);
        (ea.re, ea.im).partial_cmp(&(eb.re, eb.im)).unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right: Mat<Complex<T>> = Mat::zeros(n, n);
    let mut left: Mat<Complex<T>> = Mat::zeros(n, n);
    let mut min_overlap = T::infinity();

    for (col, &src) in order.iter().enumerate() {
        let lsrc = pairing[src];
        eigenvalues.push(right_eig.S()[src]);

        let mut norm_sqr = T::zero();
        for r in 0..n {
            norm_sqr = norm_sqr + right_eig.U()[(r, src)].norm_sqr();
        }
        let scale = norm_sqr.sqrt().recip();

        // raw overlap <phi|psi> before any normalization
        let mut overlap = Complex::new(T::zero(), T::zero());
        for r in 0..n {
            overlap = overlap + left_eig.U()[(r, lsrc)].conj() * right_eig.U()[(r, src)];
        }
        if overlap.norm() < min_overlap {
            min_overlap = overlap.norm();
        }

        // psi gets unit norm; phi is scaled so that <phi|psi> = 1
        let phi_scale = overlap.conj() * scale;
        for r in 0..n {
            right[(r, col)] = right_eig.U()[(r, src)] * Complex::new(scale, T::zero());
            left[(r, col)] = if phi_scale.norm() > T::zero() {
                left_eig.U()[(r, lsrc)] / phi_scale
            } else {
                left_eig.U()[(r, lsrc)]
            };
        }
    }

    let near_exceptional = min_overlap < real::<T>(EXCEPTIONAL_OVERLAP_TOLERANCE);
    Ok(SpectrumResult {
        lattice: h.lattice(),
        eigenvalues,
        right,
        left,
        near_exceptional,
        min_overlap,
    })
}

/// Result of the two-sided exponential fit `I(j) ~ C exp(-2 alpha |j|)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<T> {
    pub alpha: T,
    pub alpha_stderr: T,
    pub r_squared: T,
    pub points: usize,
}

/// Fits the decay constant of an intensity profile over the window
/// `|j| >= 5` with intensities above `1e3` times the square of the
/// amplitude noise floor. Both leads enter one regression of `ln I`
/// against `|j|`.
pub(crate) fn fit_exponential_decay<T: Scalar>(
    lattice: LatticeSpec,
    intensity: &[T],
) -> Option<DecayFit<T>> {
    let peak = intensity.iter().fold(T::zero(), |a, &b| a.max(b));
    if peak <= T::zero() {
        return None;
    }
    let floor = real::<T>(1e3) * T::epsilon() * T::epsilon() * peak;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, &val) in intensity.iter().enumerate() {
        let j = lattice.site_of(idx);
        if j.abs() >= FIT_WINDOW_MIN_DISTANCE && val > floor {
            xs.push(T::from_i64(j.abs()).unwrap());
            ys.push(val.ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let fit = fit_line(&xs, &ys)?;
    let half = real::<T>(0.5);
    Some(DecayFit {
        alpha: -fit.slope * half,
        alpha_stderr: fit.slope_stderr * half,
        r_squared: fit.r_squared,
        points: fit.n,
    })
}

/// An isolated eigenstate with `Im E` above threshold, plus its
/// localization analysis.
#[derive(Debug, Clone)]
pub struct BoundStateReport<T> {
    /// Index into the sorted spectrum.
    pub index: usize,
    pub energy: Complex<T>,
    /// Site of maximum intensity.
    pub center_site: i64,
    /// Fitted spatial decay constant; `None` when the profile is not a
    /// clean exponential (see `fit_ok`).
    pub alpha: Option<T>,
    pub alpha_stderr: Option<T>,
    pub r_squared: Option<T>,
    pub participation_ratio: T,
    /// False when the exponential fit failed or fell below R^2 = 0.99.
    pub fit_ok: bool,
}

/// Finds all states with `Im E > threshold` and fits their spatial decay.
pub fn detect_bound_states<T: Scalar>(
    spectrum: &SpectrumResult<T>,
    threshold: T,
) -> Vec<BoundStateReport<T>> {
    debug_assert!(threshold > T::zero());
    let n = spectrum.len();
    let lattice = spectrum.lattice();
    let mut reports = Vec::new();
    for idx in 0..n {
        let energy = spectrum.eigenvalues()[idx];
        if energy.im <= threshold {
            continue;
        }
        let intensity: Vec<T> = (0..n).map(|r| spectrum.right[(r, idx)].norm_sqr()).collect();
        let (center_idx, _) = intensity
            .iter()
            .enumerate()
            .fold((0, T::zero()), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let total: T = intensity.iter().fold(T::zero(), |a, &b| a + b);
        let sum_sq: T = intensity.iter().fold(T::zero(), |a, &b| a + b * b);
        let participation_ratio = total * total / sum_sq;

        let fit = fit_exponential_decay(lattice, &intensity);
        let fit_ok = fit.map(|f| f.r_squared >= real::<T>(0.99)).unwrap_or(false);
        let (alpha, alpha_stderr, r_squared) = match fit {
            Some(f) if fit_ok => (Some(f.alpha), Some(f.alpha_stderr), Some(f.r_squared)),
            Some(f) => (None, None, Some(f.r_squared)),
            None => (None, None, None),
        };
        reports.push(BoundStateReport {
            index: idx,
            energy,
            center_site: lattice.site_of(center_idx),
            alpha,
            alpha_stderr,
            r_squared,
            participation_ratio,
            fit_ok,
        });
    }
    reports
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingRow<T> {
    pub sites: usize,
    /// Largest `Im E` over continuum states (bound states excluded).
    pub max_continuum_im: T,
    pub bound_count: usize,
}

/// Finite-size scaling of the continuum's imaginary energies.
#[derive(Debug, Clone)]
pub struct FiniteSizeScaling<T> {
    pub rows: Vec<ScalingRow<T>>,
    /// Power-law exponent of `max Im E` against `L`; `None` on the
    /// exact-zero branch.
    pub exponent: Option<T>,
    pub exponent_stderr: Option<T>,
    /// Set when every row's `max Im E` is at machine zero (Hermitian case).
    pub zero_branch: bool,
}

/// Eigendecomposes `model` at each size and fits
/// `max Im E ~ L^exponent` over the continuum states.
pub fn finite_size_scaling<T: Scalar>(
    model: &CenterModel<T>,
    sizes: &[usize],
) -> Result<FiniteSizeScaling<T>> {
    if sizes.len() < 3 {
        return Err(Error::TooFewSizes { got: sizes.len() });
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::SizesNotAscending);
    }
    let threshold = real::<T>(BOUND_STATE_THRESHOLD);
    let mut rows = Vec::with_capacity(sizes.len());
    for &sites in sizes {
        let lattice = LatticeSpec::new(sites)?;
        let spectrum = eigendecompose(&build_finite_hamiltonian(model, lattice))?;
        let mut max_im = T::neg_infinity();
        let mut bound_count = 0;
        for e in spectrum.eigenvalues() {
            if e.im > threshold {
                bound_count += 1;
            } else if e.im > max_im {
                max_im = e.im;
            }
        }
        rows.push(ScalingRow { sites, max_continuum_im: max_im, bound_count });
    }

    let zero_branch = rows.iter().all(|r| r.max_continuum_im.abs() < real::<T>(1e-12));
    let (exponent, exponent_stderr) =
        if zero_branch || rows.iter().any(|r| r.max_continuum_im <= T::zero()) {
            (None, None)
        } else {
            let xs: Vec<T> = rows.iter().map(|r| T::from_usize(r.sites).unwrap().ln()).collect();
            let ys: Vec<T> = rows.iter().map(|r| r.max_continuum_im.ln()).collect();
            match fit_line(&xs, &ys) {
                Some(fit) => (Some(fit.slope), Some(fit.slope_stderr)),
                None => (None, None),
            }
        };
    Ok(FiniteSizeScaling { rows, exponent, exponent_stderr, zero_branch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_finite_hamiltonian;

    type M = CenterModel<f64>;

    fn spectrum_of(model: &M, sites: usize) -> SpectrumResult<f64> {
        let h = build_finite_hamiltonian(model, LatticeSpec::new(sites).unwrap());
        eigendecompose(&h).unwrap()
    }

    #[test]
    fn hermitian_chain_has_real_band_spectrum() {
        let model = M::ImaginaryOnsite { gamma0: 0.0, gamma1: 0.0 };
        let spec = spectrum_of(&model, 100);
        for e in spec.eigenvalues() {
            assert!(e.im.abs() < 1e-12);
            assert!(e.re >= -2.0 - 1e-12 && e.re <= 2.0 + 1e-12);
        }
        assert!(!spec.near_exceptional());
    }

    #[test]
    fn eigenvalues_are_sorted() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let spec = spectrum_of(&model, 60);
        for w in spec.eigenvalues().windows(2) {
            assert!((w[0].re, w[0].im) <= (w[1].re, w[1].im));
        }
    }

    #[test]
    fn residual_biorthogonality_and_completeness() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.8 };
        let h = build_finite_hamiltonian(&model, LatticeSpec::new(120).unwrap());
        let spec = eigendecompose(&h).unwrap();
        assert!(spec.residual(&h) < 1e-9 * h.matrix().norm_l2());
        assert!(spec.biorthogonality_defect() < 1e-8);
        assert!(spec.completeness_defect() < 1e-7);
    }

    #[test]
    fn left_spectrum_is_conjugate_of_right() {
        let model = M::ComplexHopping { kappa: -1.0, gamma: 0.4 };
        let h = build_finite_hamiltonian(&model, LatticeSpec::new(80).unwrap());
        let right = h.matrix().eigen().unwrap();
        let left = Eigen::new(h.matrix().adjoint()).unwrap();
        let mut right_sorted: Vec<Complex<f64>> = (0..80).map(|i| right.S()[i]).collect();
        let mut left_conj_sorted: Vec<Complex<f64>> =
            (0..80).map(|i| left.S()[i].conj()).collect();
        let key = |c: &Complex<f64>| (c.re, c.im);
        right_sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        left_conj_sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (r, l) in right_sorted.iter().zip(&left_conj_sorted) {
            assert!((r - l).norm() < 1e-9);
        }
    }

    #[test]
    fn pt_symmetric_point_pairs_conjugate_eigenvalues() {
        // gamma0 = gamma1: every complex eigenvalue has its conjugate partner
        let model = M::ImaginaryOnsite { gamma0: 0.8, gamma1: 0.8 };
        let spec = spectrum_of(&model, 100);
        for e in spec.eigenvalues() {
            if e.im.abs() > 1e-12 {
                let partner = spec
                    .eigenvalues()
                    .iter()
                    .map(|x| (x - e.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(partner < 1e-9, "no conjugate partner for {e}");
            }
        }
    }

    #[test]
    fn subcritical_spectrum_is_clustered_near_the_real_axis() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let spec = spectrum_of(&model, 400);
        let max_im = spec.eigenvalues().iter().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_im < BOUND_STATE_THRESHOLD);
        assert!(detect_bound_states(&spec, BOUND_STATE_THRESHOLD).is_empty());
    }

    #[test]
    fn supercritical_spectrum_hosts_one_growing_bound_state() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.8 };
        let spec = spectrum_of(&model, 400);
        let reports = detect_bound_states(&spec, BOUND_STATE_THRESHOLD);
        assert_eq!(reports.len(), 1);
        let b = &reports[0];
        // pole position: E = 2 sinh(-ln((sqrt(6)-1)/2)) i, alpha = Im k
        let k_im = -((6.0_f64.sqrt() - 1.0) / 2.0).ln();
        let e_im = 2.0 * k_im.sinh();
        assert!((b.energy.im - e_im).abs() < 1e-6);
        assert!(b.energy.re.abs() < 1e-9);
        assert!(b.fit_ok);
        let alpha = b.alpha.unwrap();
        assert!((alpha - k_im).abs() < 2e-3, "alpha {alpha} vs Im k {k_im}");
        assert!(b.center_site == 0 || b.center_site == 1);
        assert!(b.participation_ratio < 20.0);
    }

    #[test]
    fn unequal_hopping_bound_state_matches_pole_energy() {
        // gamma = 1.5: E_i = 2 sinh((1/2) ln(gamma^2 - 1))
        let model = M::UnequalHopping { kappa: -1.0, gamma: 1.5 };
        let spec = spectrum_of(&model, 400);
        let reports = detect_bound_states(&spec, BOUND_STATE_THRESHOLD);
        assert_eq!(reports.len(), 1);
        let expected = 2.0 * (0.5 * (1.5_f64 * 1.5 - 1.0).ln()).sinh();
        assert!((reports[0].energy.im - expected).abs() < 1e-3);
    }

    #[test]
    fn size_cap_is_enforced() {
        let model = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let h = build_finite_hamiltonian(&model, LatticeSpec::new(100).unwrap());
        assert!(matches!(
            eigendecompose_with_cap(&h, 50),
            Err(Error::LatticeTooLarge { sites: 100, cap: 50 })
        ));
    }

    #[test]
    fn scaling_rejects_bad_size_lists() {
        let model: M = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        assert!(matches!(
            finite_size_scaling(&model, &[100, 200]),
            Err(Error::TooFewSizes { got: 2 })
        ));
        assert!(matches!(
            finite_size_scaling(&model, &[200, 100, 300]),
            Err(Error::SizesNotAscending)
        ));
    }

    #[test]
    fn hermitian_scaling_takes_the_zero_branch() {
        let model: M = M::ImaginaryOnsite { gamma0: 0.0, gamma1: 0.0 };
        let scaling = finite_size_scaling(&model, &[40, 80, 120]).unwrap();
        assert!(scaling.zero_branch);
        assert!(scaling.exponent.is_none());
    }

    #[test]
    fn continuum_imaginary_parts_shrink_with_system_size() {
        let model: M = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.2 };
        let scaling = finite_size_scaling(&model, &[100, 200, 400]).unwrap();
        assert!(!scaling.zero_branch);
        let rows = &scaling.rows;
        assert!(rows[0].max_continuum_im > rows[2].max_continuum_im);
        let exponent = scaling.exponent.unwrap();
        assert!((exponent + 1.0).abs() < 0.3, "exponent {exponent}");
    }

    #[test]
    fn supercritical_bound_energy_is_size_independent() {
        let model: M = M::ImaginaryOnsite { gamma0: 1.0, gamma1: 1.8 };
        let mut energies = Vec::new();
        for sites in [200, 400, 800] {
            let spec = spectrum_of(&model, sites);
            let reports = detect_bound_states(&spec, BOUND_STATE_THRESHOLD);
            assert_eq!(reports.len(), 1);
            energies.push(reports[0].energy);
        }
        for pair in energies.windows(2) {
            assert!((pair[0] - pair[1]).norm() < 1e-6);
        }
    }

    #[test]
    fn decay_fit_recovers_a_synthetic_profile() {
        let lattice = LatticeSpec::new(200).unwrap();
        let alpha = 0.25;
        let intensity: Vec<f64> =
            lattice.sites_iter().map(|j| (-2.0 * alpha * j.abs() as f64).exp()).collect();
        let fit = fit_exponential_decay(lattice, &intensity).unwrap();
        assert!((fit.alpha - alpha).abs() < 1e-12);
        assert!(fit.r_squared > 0.999999);
        // a flat profile still fits, with zero decay
        let flat: Vec<f64> = vec![1.0; 200];
        let fit = fit_exponential_decay(lattice, &flat).unwrap();
        assert!(fit.alpha.abs() < 1e-12);
    }
}
