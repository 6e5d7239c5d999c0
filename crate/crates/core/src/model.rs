//! The five two-site scattering centers and the finite lattice Hamiltonians
//! built from them.

use faer::{Mat, MatRef};
use num_complex::Complex;

use crate::{real, Error, Result, Scalar};

/// A two-site scattering center embedded in a uniform chain with lead
/// hopping `-1`.
///
/// The on-site variant carries `-i*gamma0` at site 0 and `+i*gamma1` at
/// site 1 with Hermitian center hoppings. The four hopping variants replace
/// the center bond by an asymmetric pair `(kappa_L, kappa_R)`, where
/// `kappa_L` hops from site 1 to site 0 and `kappa_R` the other way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterModel<T> {
    /// On-site potentials `-i*gamma0 |0><0| + i*gamma1 |1><1|`.
    ImaginaryOnsite { gamma0: T, gamma1: T },
    /// `kappa_R = kappa - gamma`, `kappa_L = kappa + gamma`.
    UnequalHopping { kappa: T, gamma: T },
    /// `kappa_R = kappa_L = kappa + i*gamma`.
    ComplexHopping { kappa: T, gamma: T },
    /// `kappa_R = kappa + i*gamma`, `kappa_L = -kappa + i*gamma`.
    AntiHermitianHopping { kappa: T, gamma: T },
    /// `kappa_R = kappa_L = i*gamma`.
    ImaginaryCoupling { gamma: T },
}

impl<T: Scalar> CenterModel<T> {
    /// Center-bond hopping pair `(kappa_L, kappa_R)`. The on-site model keeps
    /// the uniform lead value `-1` on the center bond.
    pub fn hoppings(&self) -> (Complex<T>, Complex<T>) {
        let one = T::one();
        match *self {
            CenterModel::ImaginaryOnsite { .. } => {
                let m1 = Complex::new(-one, T::zero());
                (m1, m1)
            }
            CenterModel::UnequalHopping { kappa, gamma } => (
                Complex::new(kappa + gamma, T::zero()),
                Complex::new(kappa - gamma, T::zero()),
            ),
            CenterModel::ComplexHopping { kappa, gamma } => {
                let h = Complex::new(kappa, gamma);
                (h, h)
            }
            CenterModel::AntiHermitianHopping { kappa, gamma } => {
                (Complex::new(-kappa, gamma), Complex::new(kappa, gamma))
            }
            CenterModel::ImaginaryCoupling { gamma } => {
                let h = Complex::new(T::zero(), gamma);
                (h, h)
            }
        }
    }

    /// On-site energies of the two center sites.
    pub fn onsite(&self) -> (Complex<T>, Complex<T>) {
        match *self {
            CenterModel::ImaginaryOnsite { gamma0, gamma1 } => (
                Complex::new(T::zero(), -gamma0),
                Complex::new(T::zero(), gamma1),
            ),
            _ => (Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero())),
        }
    }

    /// True when the center block equals its own conjugate transpose.
    pub fn is_hermitian(&self) -> bool {
        let (kl, kr) = self.hoppings();
        let (e0, e1) = self.onsite();
        kl == kr.conj() && e0.im == T::zero() && e1.im == T::zero()
    }

    /// The one-parameter family this model belongs to when its
    /// non-Hermiticity strength is swept.
    pub fn family(&self) -> ModelFamily<T> {
        match *self {
            CenterModel::ImaginaryOnsite { gamma0, .. } => ModelFamily::ImaginaryOnsite { gamma0 },
            CenterModel::UnequalHopping { kappa, .. } => ModelFamily::UnequalHopping { kappa },
            CenterModel::ComplexHopping { kappa, .. } => ModelFamily::ComplexHopping { kappa },
            CenterModel::AntiHermitianHopping { kappa, .. } => {
                ModelFamily::AntiHermitianHopping { kappa }
            }
            CenterModel::ImaginaryCoupling { .. } => ModelFamily::ImaginaryCoupling,
        }
    }

    /// Current value of the swept parameter (`gamma1` for the on-site model,
    /// `gamma` otherwise).
    pub fn sweep_value(&self) -> T {
        match *self {
            CenterModel::ImaginaryOnsite { gamma1, .. } => gamma1,
            CenterModel::UnequalHopping { gamma, .. }
            | CenterModel::ComplexHopping { gamma, .. }
            | CenterModel::AntiHermitianHopping { gamma, .. }
            | CenterModel::ImaginaryCoupling { gamma } => gamma,
        }
    }
}

/// One-parameter model families obtained by sweeping the non-Hermiticity
/// strength while the remaining parameters stay fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFamily<T> {
    ImaginaryOnsite { gamma0: T },
    UnequalHopping { kappa: T },
    ComplexHopping { kappa: T },
    AntiHermitianHopping { kappa: T },
    ImaginaryCoupling,
}

impl<T: Scalar> ModelFamily<T> {
    /// The member of the family at sweep parameter `gamma`.
    pub fn at(&self, gamma: T) -> CenterModel<T> {
        match *self {
            ModelFamily::ImaginaryOnsite { gamma0 } => {
                CenterModel::ImaginaryOnsite { gamma0, gamma1: gamma }
            }
            ModelFamily::UnequalHopping { kappa } => CenterModel::UnequalHopping { kappa, gamma },
            ModelFamily::ComplexHopping { kappa } => CenterModel::ComplexHopping { kappa, gamma },
            ModelFamily::AntiHermitianHopping { kappa } => {
                CenterModel::AntiHermitianHopping { kappa, gamma }
            }
            ModelFamily::ImaginaryCoupling => CenterModel::ImaginaryCoupling { gamma },
        }
    }

    /// Name of the swept parameter.
    pub fn parameter_name(&self) -> &'static str {
        match self {
            ModelFamily::ImaginaryOnsite { .. } => "gamma1",
            _ => "gamma",
        }
    }

    /// Short identifier for reports.
    pub fn label(&self) -> &'static str {
        match self {
            ModelFamily::ImaginaryOnsite { .. } => "imaginary_onsite",
            ModelFamily::UnequalHopping { .. } => "unequal_hopping",
            ModelFamily::ComplexHopping { .. } => "complex_hopping",
            ModelFamily::AntiHermitianHopping { .. } => "anti_hermitian_hopping",
            ModelFamily::ImaginaryCoupling => "imaginary_coupling",
        }
    }
}

/// The 2x2 center block together with the couplings tying it to the leads.
#[derive(Debug, Clone, Copy)]
pub struct CenterBlock<T> {
    /// Rows/columns are sites 0 and 1.
    pub block: [[Complex<T>; 2]; 2],
    /// Hopping between each lead edge and the adjacent center site.
    pub lead_coupling: Complex<T>,
}

impl<T: Scalar> CenterBlock<T> {
    /// `max |B + B^dag|` over entries; zero for an anti-Hermitian center.
    pub fn anti_hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                let d = (self.block[r][c] + self.block[c][r].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `max |B - B^dag|` over entries; zero for a Hermitian center.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                let d = (self.block[r][c] - self.block[c][r].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Assembles the center block of `model` with its lead couplings.
pub fn build_center<T: Scalar>(model: &CenterModel<T>) -> CenterBlock<T> {
    let (kl, kr) = model.hoppings();
    let (e0, e1) = model.onsite();
    CenterBlock {
        block: [[e0, kl], [kr, e1]],
        lead_coupling: Complex::new(-T::one(), T::zero()),
    }
}

/// Geometry of the truncated lattice: `sites` total sites with the center on
/// the two middle sites `j = 0, 1` and hard-wall boundaries.
///
/// Site labels run over `j in [-(L-2)/2, (L-2)/2 + 1]`, so an 800-site
/// lattice has leads of 399 sites each (`j in [-399, -1]` and `[2, 400]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    sites: usize,
}

impl LatticeSpec {
    /// Validates the geometry: `sites` must be even and at least 4.
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 4 || sites % 2 != 0 {
            return Err(Error::InvalidLattice { sites });
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Leftmost site label.
    pub fn j_min(&self) -> i64 {
        -(((self.sites - 2) / 2) as i64)
    }

    /// Rightmost site label.
    pub fn j_max(&self) -> i64 {
        ((self.sites - 2) / 2) as i64 + 1
    }

    pub fn contains(&self, j: i64) -> bool {
        j >= self.j_min() && j <= self.j_max()
    }

    /// Storage index of site `j`.
    pub fn index_of(&self, j: i64) -> Option<usize> {
        self.contains(j).then(|| (j - self.j_min()) as usize)
    }

    /// Site label of storage index `idx`.
    pub fn site_of(&self, idx: usize) -> i64 {
        self.j_min() + idx as i64
    }

    /// All site labels, left to right.
    pub fn sites_iter(&self) -> impl Iterator<Item = i64> {
        self.j_min()..=self.j_max()
    }
}

/// Dense complex Hamiltonian of the truncated lattice. The matrix is
/// tridiagonal: lead hoppings `-1`, center bond and on-site terms from the
/// model.
#[derive(Debug, Clone)]
pub struct Hamiltonian<T: Scalar> {
    lattice: LatticeSpec,
    matrix: Mat<Complex<T>>,
}

impl<T: Scalar> Hamiltonian<T> {
    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn matrix(&self) -> MatRef<'_, Complex<T>> {
        self.matrix.as_ref()
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites()
    }

    /// Number of exactly nonzero entries.
    pub fn nonzeros(&self) -> usize {
        let n = self.sites();
        let mut count = 0;
        for r in 0..n {
            for c in 0..n {
                if self.matrix[(r, c)] != Complex::new(T::zero(), T::zero()) {
                    count += 1;
                }
            }
        }
        count
    }

    /// `max |H - H^dag|` over entries.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.sites();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let d = (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest entry magnitude outside the tridiagonal band.
    pub fn off_band_magnitude(&self) -> T {
        let n = self.sites();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                if (r as i64 - c as i64).abs() > 1 {
                    let d = self.matrix[(r, c)].norm();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        worst
    }

    /// The three bands `(sub, diag, super)` for solvers that exploit the
    /// tridiagonal structure. `sub[i] = H[i+1, i]` and `super[i] = H[i, i+1]`.
    pub fn bands(&self) -> (Vec<Complex<T>>, Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.sites();
        let sub = (0..n - 1).map(|i| self.matrix[(i + 1, i)]).collect();
        let diag = (0..n).map(|i| self.matrix[(i, i)]).collect();
        let sup = (0..n - 1).map(|i| self.matrix[(i, i + 1)]).collect();
        (sub, diag, sup)
    }

    /// Upper bound on `max |Im E|` over the spectrum, from a Gershgorin bound
    /// on the anti-Hermitian part `(H - H^dag)/2`.
    pub fn imag_spectrum_bound(&self) -> T {
        let n = self.sites();
        let half = real::<T>(0.5);
        let mut worst = T::zero();
        for r in 0..n {
            let mut row_sum = T::zero();
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                row_sum = row_sum + (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm() * half;
            }
            if row_sum > worst {
                worst = row_sum;
            }
        }
        worst
    }
}

/// Builds the dense tridiagonal Hamiltonian of `model` on `lattice`.
pub fn build_finite_hamiltonian<T: Scalar>(
    model: &CenterModel<T>,
    lattice: LatticeSpec,
) -> Hamiltonian<T> {
    let n = lattice.sites();
    let center = build_center(model);
    let mut matrix: Mat<Complex<T>> = Mat::zeros(n, n);

    let i0 = lattice.index_of(0).expect("center site 0 in lattice");
    let i1 = i0 + 1;
    for i in 0..n - 1 {
        if i == i0 {
            matrix[(i0, i1)] = center.block[0][1];
            matrix[(i1, i0)] = center.block[1][0];
        } else {
            matrix[(i, i + 1)] = center.lead_coupling;
            matrix[(i + 1, i)] = center.lead_coupling;
        }
    }
    matrix[(i0, i0)] = center.block[0][0];
    matrix[(i1, i1)] = center.block[1][1];

    Hamiltonian { lattice, matrix }
}

/// Lead dispersion relation `E(k) = -2 cos k`.
pub fn dispersion<T: Scalar>(k: T) -> T {
    -real::<T>(2.0) * k.cos()
}

/// Dispersion continued to complex wave numbers, `E = -2 cos k`.
pub fn complex_dispersion<T: Scalar>(k: Complex<T>) -> Complex<T> {
    -k.cos() * real::<T>(2.0)
}
