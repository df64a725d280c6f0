//! Hermitian eigendecomposition and the two scales that govern local
//! thermality: the level width `δE` of the full spectrum and the
//! inter-group interaction strength `Ī_N`.
//!
//! Both scales have a trace form (any operator) and a closed form in the
//! chain coefficients; the two are kept separate so each checks the other.

use nalgebra::SymmetricEigen;

use crate::algebra::{ChainOperator, GeneratorSet};
use crate::chain::{build_hamiltonian, split_partition, ChainSpec, PartitionSpec};
use crate::{tolerance, CMatrix, Error, Result};

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    energies: Vec<f64>,
    states: CMatrix,
    mean_energy: f64,
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Unitary matrix whose column `μ` is the eigenvector of `energies()[μ]`.
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    /// `Tr(H)/dim`.
    pub fn mean_energy(&self) -> f64 {
        self.mean_energy
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `sqrt(Σ_ν (E_ν - Ē)² / dim)` from the eigenvalues.
    pub fn level_width(&self) -> f64 {
        let var = self
            .energies
            .iter()
            .map(|e| (e - self.mean_energy).powi(2))
            .sum::<f64>()
            / self.dim() as f64;
        var.sqrt()
    }

    /// `states · diag(energies) · states^†`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.states.clone();
        for (mut col, e) in scaled.column_iter_mut().zip(&self.energies) {
            col *= crate::C64::from(*e);
        }
        scaled * self.states.adjoint()
    }
}

pub fn diagonalize(h: &ChainOperator) -> Result<Spectrum> {
    diagonalize_matrix(h.matrix())
}

/// Full eigendecomposition of a dense Hermitian matrix. Ties in the sort
/// keep the solver's output order.
pub fn diagonalize_matrix(m: &CMatrix) -> Result<Spectrum> {
    let deviation = crate::algebra::hermiticity_deviation(m);
    if deviation > tolerance::CONSTRUCTION {
        return Err(Error::NotHermitian { deviation });
    }
    let dim = m.nrows();
    let mean_energy = m.trace().re / dim as f64;
    let sym = (m + m.adjoint()) * crate::C64::from(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let states = eig.eigenvectors.select_columns(&order);
    Ok(Spectrum { energies, states, mean_energy })
}

/// Trace form `sqrt(Tr[(H - Ē)²]/dim)`.
pub fn level_width(h: &ChainOperator) -> f64 {
    let dim = h.dim() as f64;
    let mean = h.trace().re / dim;
    let frob_sq = h.matrix().norm_squared();
    (frob_sq / dim - mean * mean).max(0.0).sqrt()
}

/// Closed form `√N (n/2) sqrt(n_G (Σ C² + (2/n) Σ A²))`; only `N n_G = L`
/// enters, so no partition is needed.
pub fn level_width_closed_form(spec: &ChainSpec) -> f64 {
    let n = spec.levels as f64;
    let inner = spec.coupling_norm_sq() + 2.0 / n * spec.local_norm_sq();
    n / 2.0 * (spec.sites as f64 * inner).sqrt()
}

/// Trace form `sqrt(Tr(I²)/dim)`.
pub fn interaction_strength(interaction: &ChainOperator) -> f64 {
    (interaction.matrix().norm_squared() / interaction.dim() as f64).sqrt()
}

/// Closed form `(n/2) sqrt(n_G Σ C²)`. Requires distinct boundary bonds,
/// i.e. not the doubled-bond case `L = 2, N = 1`.
pub fn interaction_strength_closed_form(spec: &ChainSpec, part: &PartitionSpec) -> f64 {
    spec.levels as f64 / 2.0 * (part.groups as f64 * spec.coupling_norm_sq()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub group_size: usize,
    pub interaction: f64,
    pub level_width: f64,
    /// `Ī_N / δE`.
    pub ratio: f64,
    /// `1/√N`, the upper bound on `ratio`.
    pub bound: f64,
}

impl ScalingRow {
    pub fn within_bound(&self) -> bool {
        self.ratio <= self.bound * (1.0 + tolerance::CONSTRUCTION)
    }
}

/// `Ī_N / δE` for each group size, both from traces of the built operators.
pub fn scaling_ratio(spec: &ChainSpec, gens: &GeneratorSet, group_sizes: &[usize]) -> Result<Vec<ScalingRow>> {
    let width = level_width(&build_hamiltonian(spec, gens)?);
    group_sizes
        .iter()
        .map(|&n| {
            let part = PartitionSpec::new(spec.sites, n)?;
            let (_, interaction) = split_partition(spec, &part, gens)?;
            let strength = interaction_strength(&interaction);
            Ok(ScalingRow {
                group_size: n,
                interaction: strength,
                level_width: width,
                ratio: strength / width,
                bound: 1.0 / (n as f64).sqrt(),
            })
        })
        .collect()
}
