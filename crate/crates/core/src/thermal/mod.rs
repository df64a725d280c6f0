//! Canonical states of the full chain and of its subgroups, and the
//! diagnostics comparing them.

mod overlap;
mod product;
mod temperature;

pub use overlap::{
    decay_profile, density_of_states, diagonal_comparison, offdiagonal_profile, overlap_distribution,
    DecayPoint, DecayProfile, DensityOfStates, DiagonalRecord, InteractionMoments, OffDiagonalProfile,
    OverlapDistribution, OverlapTable,
};
pub use product::{build_product_basis, ProductBasis};
pub use temperature::{group_occupations, group_occupations_from_diagonal, spectral_temperature, LevelOccupations};

use crate::error::invalid;
use crate::spectra::Spectrum;
use crate::algebra::complex_product;
use crate::{CMatrix, Result, C64};

/// Which basis a [`DensityMatrix`] is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Eigenbasis of the full Hamiltonian, ascending energies.
    Eigen,
    /// Products of group eigenstates, ordered as in [`ProductBasis`].
    Product,
    /// Computational site basis.
    Site,
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
    basis: Basis,
}

impl DensityMatrix {
    /// Wraps a matrix after checking trace and Hermiticity.
    pub fn new(matrix: CMatrix, basis: Basis) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("density matrix must be square"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let dev = crate::algebra::hermiticity_deviation(&matrix);
        if dev > 1e-10 {
            return Err(crate::Error::NotHermitian { deviation: dev });
        }
        Ok(DensityMatrix { matrix, basis })
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64], basis: Basis) -> Self {
        let matrix = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::from(p)),
        ));
        DensityMatrix { matrix, basis }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn diagonal_populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// `U ρ U^†`, relabelled as `target`. Columns of `U` are the current basis
    /// vectors expressed in the target basis.
    pub fn transform(&self, unitary: &CMatrix, target: Basis) -> DensityMatrix {
        let rotated = complex_product(&complex_product(unitary, &self.matrix), &unitary.adjoint());
        DensityMatrix { matrix: rotated, basis: target }
    }

    /// Site-basis form of a state given in the eigenbasis of `spectrum`.
    pub fn to_site_from_eigen(&self, spectrum: &Spectrum) -> Result<DensityMatrix> {
        if self.basis != Basis::Eigen {
            return Err(invalid("state is not in the eigenbasis"));
        }
        Ok(self.transform(spectrum.states(), Basis::Site))
    }
}

/// Populations `e^{-β E}/Z`, with the exponent shifted by the smallest
/// energy so `Z` never overflows.
pub fn boltzmann_weights(energies: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = energies.iter().map(|e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    Ok(w)
}

/// Canonical state of the full Hamiltonian, diagonal in its eigenbasis.
pub fn canonical_state(spectrum: &Spectrum, beta: f64) -> Result<DensityMatrix> {
    Ok(DensityMatrix::diagonal(&boltzmann_weights(spectrum.energies(), beta)?, Basis::Eigen))
}

/// `⊗_groups e^{-β H_G}/Z_G`, diagonal in the product basis.
pub fn product_canonical(basis: &ProductBasis, beta: f64) -> Result<DensityMatrix> {
    let group = boltzmann_weights(basis.group_spectrum().energies(), beta)?;
    let d = group.len();
    let dim = basis.dim();
    let pops: Vec<f64> = (0..dim)
        .map(|j| {
            let mut rest = j;
            let mut p = 1.0;
            for _ in 0..basis.partition().groups {
                p *= group[rest % d];
                rest /= d;
            }
            p
        })
        .collect();
    Ok(DensityMatrix::diagonal(&pops, Basis::Product))
}

/// The global canonical state written in the product basis:
/// `ρ_jk = Σ_μ ⟨j|μ⟩ p_μ ⟨μ|k⟩`.
pub fn canonical_in_product_basis(table: &OverlapTable, total: &Spectrum, beta: f64) -> Result<DensityMatrix> {
    let pops = boltzmann_weights(total.energies(), beta)?;
    let amp = table.amplitudes();
    let mut scaled = amp.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(&pops) {
        col *= C64::from(*p);
    }
    Ok(DensityMatrix { matrix: complex_product(&scaled, &amp.adjoint()), basis: Basis::Product })
}

/// Hilbert–Schmidt distance `sqrt(Tr[(a - b)²])`.
pub fn state_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.basis != b.basis {
        return Err(invalid(format!("basis mismatch: {:?} vs {:?}", a.basis, b.basis)));
    }
    Ok((&a.matrix - &b.matrix).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_generators, partial_trace};
    use crate::chain::{build_hamiltonian, group_hamiltonian, sample_random_model, split_partition, PartitionSpec};
    use crate::spectra::{diagonalize, diagonalize_matrix};

    fn setup(seed: u64, lambda: f64, sites: usize) -> (crate::chain::ChainSpec, Spectrum) {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(seed, lambda, 1.0).to_spec(sites).unwrap();
        let s = diagonalize(&build_hamiltonian(&spec, &gens).unwrap()).unwrap();
        (spec, s)
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let (_, s) = setup(1, 1.0, 4);
        let rho = canonical_state(&s, 0.0).unwrap();
        for p in rho.diagonal_populations() {
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_level_logistic_populations() {
        let w = boltzmann_weights(&[-0.5, 0.5], 1.0).unwrap();
        let e = 0.5f64.exp();
        assert!((w[0] - e / (e + 1.0 / e)).abs() < 1e-15);
        assert!((w[0] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!((w[1] - 0.268_941_421_369_995_1).abs() < 1e-12);
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let w = boltzmann_weights(&[-350.0, 0.0, 350.0], 1.0).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_beta_rejected() {
        let (_, s) = setup(1, 1.0, 3);
        assert!(canonical_state(&s, -0.1).is_err());
        assert!(canonical_state(&s, f64::NAN).is_err());
    }

    #[test]
    fn canonical_state_commutes_with_h() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(3, 1.0, 1.0).to_spec(8).unwrap();
        let h = build_hamiltonian(&spec, &gens).unwrap();
        let s = diagonalize(&h).unwrap();
        let rho = canonical_state(&s, 0.3).unwrap().to_site_from_eigen(&s).unwrap();
        let comm = rho.matrix() * h.matrix() - h.matrix() * rho.matrix();
        assert!(comm.camax() < 1e-12);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let pops = canonical_state(&s, 0.3).unwrap().diagonal_populations();
        assert!(pops.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn product_canonical_equals_canonical_of_h0() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(4, 1.0, 1.0).to_spec(8).unwrap();
        for n in [1, 2, 4] {
            let part = PartitionSpec::new(8, n).unwrap();
            let basis = build_product_basis(&spec, &part, &gens).unwrap();
            let (h0, _) = split_partition(&spec, &part, &gens).unwrap();
            let s0 = diagonalize(&h0).unwrap();
            let direct = canonical_state(&s0, 0.7).unwrap().to_site_from_eigen(&s0).unwrap();
            let via = product_canonical(&basis, 0.7).unwrap().transform(basis.states(), Basis::Site);
            assert!(state_distance(&direct, &via).unwrap() < 1e-10);
        }
    }

    #[test]
    fn product_canonical_marginals_are_group_canonical() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(6, 1.0, 1.0).to_spec(6).unwrap();
        let part = PartitionSpec::new(6, 2).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let rho = product_canonical(&basis, 0.5).unwrap().transform(basis.states(), Basis::Site);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let g = diagonalize(&group_hamiltonian(&spec, 2, &gens).unwrap()).unwrap();
        let expect = canonical_state(&g, 0.5).unwrap().to_site_from_eigen(&g).unwrap();
        for k in 1..=3 {
            let red = partial_trace(rho.matrix(), 2, 6, &part.group_sites(k)).unwrap();
            assert!((red - expect.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn decoupled_product_state_is_exact() {
        let gens = build_generators(2).unwrap();
        let (spec, s) = setup(2, 0.0, 8);
        let part = PartitionSpec::new(8, 2).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let table = OverlapTable::new(&s, &basis).unwrap();
        for beta in [0.0, 0.4, 2.0] {
            let rho = canonical_in_product_basis(&table, &s, beta).unwrap();
            let tilde = product_canonical(&basis, beta).unwrap();
            assert!(state_distance(&rho, &tilde).unwrap() < 1e-12);
        }
    }

    #[test]
    fn product_basis_route_matches_site_route() {
        let gens = build_generators(2).unwrap();
        let (spec, s) = setup(12, 1.0, 6);
        let part = PartitionSpec::new(6, 3).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let table = OverlapTable::new(&s, &basis).unwrap();
        let beta = 0.3;
        let a = canonical_in_product_basis(&table, &s, beta).unwrap();
        let b = product_canonical(&basis, beta).unwrap();
        let site_a = canonical_state(&s, beta).unwrap().to_site_from_eigen(&s).unwrap();
        let site_b = b.transform(basis.states(), Basis::Site);
        let d1 = state_distance(&a, &b).unwrap();
        let d2 = state_distance(&site_a, &site_b).unwrap();
        assert!((d1 - d2).abs() < 1e-12 && d1 > 1e-3);
    }

    #[test]
    fn distance_basics() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = C64::from(1.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(1, 1)] = C64::from(1.0);
        let a = DensityMatrix::new(a, Basis::Site).unwrap();
        let b = DensityMatrix::new(b, Basis::Site).unwrap();
        assert_eq!(state_distance(&a, &a).unwrap(), 0.0);
        assert!((state_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = DensityMatrix::diagonal(&[0.25; 4], Basis::Site);
        assert!(state_distance(&a, &c).is_err());
        let d = DensityMatrix::diagonal(&[0.5; 2], Basis::Eigen);
        assert!(state_distance(&a, &d).is_err());
    }

    #[test]
    fn zero_beta_distance_vanishes() {
        let gens = build_generators(2).unwrap();
        let (spec, s) = setup(8, 1.0, 8);
        for n in [1, 2, 4] {
            let basis = build_product_basis(&spec, &PartitionSpec::new(8, n).unwrap(), &gens).unwrap();
            let table = OverlapTable::new(&s, &basis).unwrap();
            let rho = canonical_in_product_basis(&table, &s, 0.0).unwrap();
            let tilde = product_canonical(&basis, 0.0).unwrap();
            assert!(state_distance(&rho, &tilde).unwrap() < 1e-12);
        }
    }

    #[test]
    fn distance_continuous_at_zero_coupling() {
        let gens = build_generators(2).unwrap();
        let (spec, s) = setup(8, 1e-8, 8);
        let basis = build_product_basis(&spec, &PartitionSpec::new(8, 2).unwrap(), &gens).unwrap();
        let table = OverlapTable::new(&s, &basis).unwrap();
        let rho = canonical_in_product_basis(&table, &s, 1.0).unwrap();
        let tilde = product_canonical(&basis, 1.0).unwrap();
        assert!(state_distance(&rho, &tilde).unwrap() < 1e-6);
    }

    #[test]
    fn new_validates() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2), Basis::Site).is_err());
        let mut m = CMatrix::identity(2, 2) * C64::from(0.5);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m, Basis::Site).is_err());
        let spectrum = diagonalize_matrix(&(CMatrix::identity(2, 2) * C64::from(0.5))).unwrap();
        assert_eq!(spectrum.dim(), 2);
    }
}
