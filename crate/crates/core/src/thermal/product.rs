use crate::algebra::{kron_all, GeneratorSet};
use crate::chain::{group_hamiltonian, ChainSpec, PartitionSpec};
use crate::spectra::{diagonalize, Spectrum};
use crate::{CMatrix, Result};

/// Tensor products of group eigenstates `|j⟩ = |g_1⟩ ⊗ … ⊗ |g_{n_G}⟩`.
///
/// Composite index `j = Σ_k g_k d^(n_G - k)` with `d` the group dimension,
/// so group 1 is the most significant digit (matching the site ordering).
/// Every group shares one spectrum by translation invariance.
#[derive(Clone, Debug)]
pub struct ProductBasis {
    levels: usize,
    partition: PartitionSpec,
    group: Spectrum,
    states: CMatrix,
    energies: Vec<f64>,
}

impl ProductBasis {
    /// Levels per site.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.partition
    }

    /// Spectrum of one isolated group Hamiltonian.
    pub fn group_spectrum(&self) -> &Spectrum {
        &self.group
    }

    /// One spectrum per group, in group order.
    pub fn group_spectra(&self) -> impl Iterator<Item = &Spectrum> {
        std::iter::repeat_n(&self.group, self.partition.groups)
    }

    pub fn group_dim(&self) -> usize {
        self.group.dim()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Site-basis columns of the composite states.
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    /// `E_j`, sums of constituent group energies (not sorted).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Index of the eigenstate of group `k` (1-based) inside composite `j`.
    pub fn group_level(&self, j: usize, k: usize) -> usize {
        let d = self.group_dim();
        let shift = self.partition.groups - k;
        (j / d.pow(shift as u32)) % d
    }
}

pub fn build_product_basis(spec: &ChainSpec, part: &PartitionSpec, gens: &GeneratorSet) -> Result<ProductBasis> {
    let part = PartitionSpec::new(spec.sites, part.group_size)?;
    let group = diagonalize(&group_hamiltonian(spec, part.group_size, gens)?)?;
    let states = kron_all(std::iter::repeat_n(group.states(), part.groups));

    let d = group.dim();
    let dim = d.pow(part.groups as u32);
    let energies = (0..dim)
        .map(|j| {
            let mut rest = j;
            let mut e = 0.0;
            for _ in 0..part.groups {
                e += group.energies()[rest % d];
                rest /= d;
            }
            e
        })
        .collect();

    Ok(ProductBasis { levels: spec.levels, partition: part, group, states, energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_generators;
    use crate::chain::{build_hamiltonian, sample_random_model, split_partition};
    use crate::C64;

    #[test]
    fn composite_energies_match_h0_spectrum() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(31, 1.0, 1.0).to_spec(4).unwrap();
        let part = PartitionSpec::new(4, 2).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        assert_eq!(basis.dim(), 16);
        let mut e = basis.energies().to_vec();
        e.sort_by(f64::total_cmp);
        let (h0, _) = split_partition(&spec, &part, &gens).unwrap();
        let s0 = diagonalize(&h0).unwrap();
        for (a, b) in e.iter().zip(s0.energies()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn composite_states_are_orthonormal_eigenvectors_of_h0() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(32, 1.0, 1.0).to_spec(8).unwrap();
        let part = PartitionSpec::new(8, 4).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let v = basis.states();
        assert!((v.adjoint() * v - CMatrix::identity(256, 256)).camax() < 1e-12);
        let (h0, _) = split_partition(&spec, &part, &gens).unwrap();
        let hv = h0.matrix() * v;
        for j in [0, 17, 255] {
            let resid = hv.column(j) - v.column(j) * C64::from(basis.energies()[j]);
            assert!(resid.norm() < 1e-10);
        }
    }

    #[test]
    fn single_group_is_h_without_wrap_bond() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(33, 1.0, 1.0).to_spec(4).unwrap();
        let part = PartitionSpec::new(4, 4).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let (h0, i) = split_partition(&spec, &part, &gens).unwrap();
        let h = build_hamiltonian(&spec, &gens).unwrap();
        assert!(((h.matrix() - i.matrix()) - h0.matrix()).norm() < 1e-12);
        let s0 = diagonalize(&h0).unwrap();
        for (a, b) in basis.energies().iter().zip(s0.energies()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn group_level_digits() {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(34, 1.0, 1.0).to_spec(4).unwrap();
        let basis = build_product_basis(&spec, &PartitionSpec::new(4, 1).unwrap(), &gens).unwrap();
        // j = 0b0110: group 1 -> 0, group 2 -> 1, group 3 -> 1, group 4 -> 0.
        assert_eq!((1..=4).map(|k| basis.group_level(6, k)).collect::<Vec<_>>(), vec![0, 1, 1, 0]);
        assert_eq!(basis.group_spectra().count(), 4);
    }
}
