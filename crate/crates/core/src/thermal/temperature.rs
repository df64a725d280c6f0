//! Group level occupations and the spectral temperature
//!
//! ```text
//! β_spec = -Σ_{i>0} P_i/(1 - P_0) · [ln p_i - ln p_0] / (E_i - E_0)
//! ```
//!
//! evaluated over distinct levels. `P_i` is the summed probability of level
//! `i` and `p_i = P_i / g_i` the occupation per state of its `g_i`-fold
//! degenerate subspace; for nondegenerate levels both coincide.

use crate::algebra::partial_trace;
use crate::error::invalid;
use crate::{tolerance, Error, Result};

use super::{Basis, DensityMatrix, ProductBasis};

/// Distinct levels of a group with their degeneracies and total occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelOccupations {
    pub energies: Vec<f64>,
    pub degeneracies: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl LevelOccupations {
    /// Groups ascending `energies` into levels closer than `tolerance`
    /// (consecutive gaps) and sums the matching state occupations.
    pub fn cluster(energies: &[f64], occupations: &[f64], tolerance: f64) -> Result<Self> {
        if energies.len() != occupations.len() || energies.is_empty() {
            return Err(invalid("energies and occupations must be nonempty and of equal length"));
        }
        let mut out = LevelOccupations { energies: vec![], degeneracies: vec![], probabilities: vec![] };
        let mut prev = f64::NEG_INFINITY;
        for (&e, &p) in energies.iter().zip(occupations) {
            if e < prev {
                return Err(invalid("energies must be sorted ascending"));
            }
            if out.energies.is_empty() || e - prev > tolerance {
                out.energies.push(e);
                out.degeneracies.push(1);
                out.probabilities.push(p);
            } else {
                let last = out.energies.len() - 1;
                out.degeneracies[last] += 1;
                out.probabilities[last] += p;
            }
            prev = e;
        }
        Ok(out)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn spectral_temperature(&self) -> Result<f64> {
        if self.energies.len() < 2 {
            return Err(invalid("spectral temperature needs at least two distinct levels"));
        }
        let ground = self.probabilities[0];
        // Equals 1 - P_0 for normalized input without the cancellation.
        let excited: f64 = self.probabilities[1..].iter().sum();
        if excited < tolerance::MIN_EXCITED_WEIGHT {
            return Err(Error::DegenerateOccupation { ground });
        }
        let ln_p0 = (ground / self.degeneracies[0] as f64).ln();
        let e0 = self.energies[0];
        let mut beta = 0.0;
        for i in 1..self.energies.len() {
            let p = self.probabilities[i];
            if p < tolerance::NEGLIGIBLE_PROBABILITY {
                continue;
            }
            let ln_p = (p / self.degeneracies[i] as f64).ln();
            beta -= p / excited * (ln_p - ln_p0) / (self.energies[i] - e0);
        }
        Ok(beta)
    }
}

/// Spectral temperature for nondegenerate levels `energies` (ascending)
/// with occupations `probs`.
pub fn spectral_temperature(energies: &[f64], probs: &[f64]) -> Result<f64> {
    if energies.len() != probs.len() {
        return Err(invalid("energies and probabilities differ in length"));
    }
    LevelOccupations {
        energies: energies.to_vec(),
        degeneracies: vec![1; energies.len()],
        probabilities: probs.to_vec(),
    }
    .spectral_temperature()
}

/// Level occupations of group `group` (1-based) from a site-basis state:
/// partial trace onto the group's sites, then the diagonal in the group
/// eigenbasis, clustered with `cluster_tol`.
pub fn group_occupations(
    rho: &DensityMatrix,
    basis: &ProductBasis,
    group: usize,
    cluster_tol: f64,
) -> Result<LevelOccupations> {
    if rho.basis() != Basis::Site {
        return Err(invalid("group occupations via partial trace need a site-basis state"));
    }
    let part = basis.partition();
    check_group(group, part.groups)?;
    let gs = basis.group_spectrum();
    let reduced = partial_trace(rho.matrix(), basis.levels(), part.sites(), &part.group_sites(group))?;
    let u = gs.states();
    let diag: Vec<f64> = (0..gs.dim()).map(|k| u.column(k).dotc(&(&reduced * u.column(k))).re).collect();
    LevelOccupations::cluster(gs.energies(), &diag, cluster_tol)
}

/// As [`group_occupations`], but from the product-basis diagonal
/// `⟨j|ρ|j⟩`: marginalizes over all other groups' labels.
pub fn group_occupations_from_diagonal(
    product_diagonal: &[f64],
    basis: &ProductBasis,
    group: usize,
    cluster_tol: f64,
) -> Result<LevelOccupations> {
    check_group(group, basis.partition().groups)?;
    if product_diagonal.len() != basis.dim() {
        return Err(invalid("diagonal length does not match product basis"));
    }
    let mut diag = vec![0.0; basis.group_dim()];
    for (j, p) in product_diagonal.iter().enumerate() {
        diag[basis.group_level(j, group)] += p;
    }
    LevelOccupations::cluster(basis.group_spectrum().energies(), &diag, cluster_tol)
}

fn check_group(group: usize, groups: usize) -> Result<()> {
    if group == 0 || group > groups {
        return Err(invalid(format!("group {group} outside 1..={groups}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_generators;
    use crate::chain::{build_hamiltonian, sample_random_model, PartitionSpec};
    use crate::spectra::diagonalize;
    use crate::thermal::{boltzmann_weights, build_product_basis, canonical_in_product_basis, canonical_state, OverlapTable};

    #[test]
    fn canonical_two_level_returns_beta() {
        for beta in [0.01, 0.3, 1.0, 4.0] {
            let p = boltzmann_weights(&[-0.5, 0.5], beta).unwrap();
            let b = spectral_temperature(&[-0.5, 0.5], &p).unwrap();
            assert!((b - beta).abs() < 1e-12 * beta);
        }
    }

    #[test]
    fn equal_occupation_is_infinite_temperature() {
        assert_eq!(spectral_temperature(&[0.0, 1.0], &[0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn three_level_direct_evaluation() {
        let b = spectral_temperature(&[0.0, 1.0, 2.0], &[0.6, 0.3, 0.1]).unwrap();
        let expect = -(0.75 * (0.3f64.ln() - 0.6f64.ln()) + 0.25 * (0.1f64.ln() - 0.6f64.ln()) / 2.0);
        assert!((b - expect).abs() < 1e-15);
        assert!((b - 0.743_9).abs() < 1e-4);
    }

    #[test]
    fn degenerate_and_zero_occupations() {
        assert!(matches!(
            spectral_temperature(&[0.0, 1.0], &[1.0, 0.0]),
            Err(Error::DegenerateOccupation { .. })
        ));
        assert!(spectral_temperature(&[0.0], &[1.0]).is_err());
        // An empty excited level drops out of the sum.
        let b = spectral_temperature(&[0.0, 1.0, 2.0], &[0.7, 0.3, 0.0]).unwrap();
        let expect = -(0.3f64.ln() - 0.7f64.ln());
        assert!((b - expect).abs() < 1e-15);
    }

    #[test]
    fn degenerate_canonical_levels_return_beta() {
        let energies = [-2.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0, 1.0, 1.0 + 1e-13];
        let p = boltzmann_weights(&energies, 0.8).unwrap();
        let levels = LevelOccupations::cluster(&energies, &p, 1e-9).unwrap();
        assert_eq!(levels.degeneracies, vec![1, 4, 2, 2]);
        let b = levels.spectral_temperature().unwrap();
        assert!((b - 0.8).abs() < 1e-12);
    }

    #[test]
    fn two_routes_to_group_occupations_agree() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(70, 1.0, 1.0).to_spec(8).unwrap();
        let total = diagonalize(&build_hamiltonian(&spec, &gens).unwrap()).unwrap();
        let beta = 0.4;
        let site = canonical_state(&total, beta).unwrap().to_site_from_eigen(&total).unwrap();
        for n in [1, 2, 4] {
            let basis = build_product_basis(&spec, &PartitionSpec::new(8, n).unwrap(), &gens).unwrap();
            let table = OverlapTable::new(&total, &basis).unwrap();
            let diag = canonical_in_product_basis(&table, &total, beta).unwrap().diagonal_populations();
            for group in 1..=basis.partition().groups {
                let a = group_occupations(&site, &basis, group, 1e-9).unwrap();
                let b = group_occupations_from_diagonal(&diag, &basis, group, 1e-9).unwrap();
                assert_eq!(a.degeneracies, b.degeneracies);
                for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
                    assert!((x - y).abs() < 1e-12);
                }
                assert!((a.total() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decoupled_occupations_are_canonical() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(71, 0.0, 1.0).to_spec(8).unwrap();
        let total = diagonalize(&build_hamiltonian(&spec, &gens).unwrap()).unwrap();
        for beta in [0.0, 0.5] {
            let site = canonical_state(&total, beta).unwrap().to_site_from_eigen(&total).unwrap();
            let basis = build_product_basis(&spec, &PartitionSpec::new(8, 2).unwrap(), &gens).unwrap();
            let occ = group_occupations(&site, &basis, 2, 1e-9).unwrap();
            // Levels -1, 0 (twofold), +1.
            assert_eq!(occ.degeneracies, vec![1, 2, 1]);
            let z = (beta).exp() + 2.0 + (-beta).exp();
            let expect = [beta.exp() / z, 2.0 / z, (-beta).exp() / z];
            for (p, e) in occ.probabilities.iter().zip(expect) {
                assert!((p - e).abs() < 1e-12);
            }
            if beta > 0.0 {
                assert!((occ.spectral_temperature().unwrap() - beta).abs() < 1e-9 * beta);
            }
        }
    }

    #[test]
    fn rejects_bad_group_and_basis() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(72, 1.0, 1.0).to_spec(4).unwrap();
        let basis = build_product_basis(&spec, &PartitionSpec::new(4, 2).unwrap(), &gens).unwrap();
        let rho = DensityMatrix::diagonal(&[1.0 / 16.0; 16], Basis::Site);
        assert!(group_occupations(&rho, &basis, 3, 1e-9).is_err());
        assert!(group_occupations(&rho, &basis, 0, 1e-9).is_err());
        let eig = DensityMatrix::diagonal(&[1.0 / 16.0; 16], Basis::Eigen);
        assert!(group_occupations(&eig, &basis, 1, 1e-9).is_err());
    }
}
