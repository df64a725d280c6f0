//! Overlaps `w_j(μ) = |⟨j|μ⟩|²` between product states and global
//! eigenstates, and the diagnostics built on them.

use crate::algebra::{adjoint_product, complex_product, ChainOperator};
use crate::error::invalid;
use crate::spectra::Spectrum;
use crate::{CMatrix, RMatrix, Result};

use super::{boltzmann_weights, Basis, DensityMatrix, ProductBasis};

/// All amplitudes `⟨j|μ⟩` (rows `j`, columns `μ`) and their squared moduli.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    amplitudes: CMatrix,
    weights: RMatrix,
    product_energies: Vec<f64>,
    total_energies: Vec<f64>,
}

impl OverlapTable {
    pub fn new(total: &Spectrum, basis: &ProductBasis) -> Result<Self> {
        if total.dim() != basis.dim() {
            return Err(invalid(format!(
                "spectrum has dim {}, product basis has dim {}",
                total.dim(),
                basis.dim()
            )));
        }
        let amplitudes = adjoint_product(basis.states(), total.states());
        let weights = amplitudes.map(|z| z.norm_sqr());
        Ok(OverlapTable {
            amplitudes,
            weights,
            product_energies: basis.energies().to_vec(),
            total_energies: total.energies().to_vec(),
        })
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn weights(&self) -> &RMatrix {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.total_energies.len()
    }

    /// Diagonal `⟨j|ρ|j⟩ = Σ_μ w_j(μ) p_μ` of a state diagonal in the global
    /// eigenbasis.
    pub fn product_diagonal(&self, eigen_populations: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.weights.row(j).iter().zip(eigen_populations).map(|(w, p)| w * p).sum())
            .collect()
    }

    pub fn distribution(&self, j: usize) -> OverlapDistribution {
        let e_j = self.product_energies[j];
        let samples: Vec<(f64, f64)> = self
            .total_energies
            .iter()
            .zip(self.weights.row(j).iter())
            .map(|(&e, &w)| (e, w))
            .collect();
        OverlapDistribution::from_samples(j, e_j, samples)
    }
}

/// `w_j(μ)` for one product state `j` together with its energy moments.
#[derive(Clone, Debug)]
pub struct OverlapDistribution {
    pub j_index: usize,
    /// `E_j`.
    pub energy: f64,
    /// `(E_μ, w_j(μ))` for every global eigenstate.
    pub samples: Vec<(f64, f64)>,
    /// `Σ_μ (E_μ - E_j)² w_j(μ)`, which equals `⟨j|I²|j⟩`.
    pub conditional_second_moment: f64,
    /// `Σ_μ E_μ w_j(μ) - E_j`, which equals `⟨j|I|j⟩`.
    pub first_moment_shift: f64,
    /// `(E_μ - E_j) / sqrt(⟨j|I²|j⟩)`; zero-width distributions map the
    /// on-shell samples to 0 and the rest to ±∞.
    pub rescaled_x: Vec<f64>,
}

impl OverlapDistribution {
    fn from_samples(j_index: usize, energy: f64, samples: Vec<(f64, f64)>) -> Self {
        let second: f64 = samples.iter().map(|(e, w)| (e - energy).powi(2) * w).sum();
        let first: f64 = samples.iter().map(|(e, w)| e * w).sum::<f64>() - energy;
        let width = second.sqrt();
        let rescaled_x = samples
            .iter()
            .map(|(e, _)| {
                let d = e - energy;
                if width > 0.0 {
                    d / width
                } else if d.abs() <= 1e-12 * (1.0 + energy.abs()) {
                    0.0
                } else {
                    d.signum() * f64::INFINITY
                }
            })
            .collect();
        OverlapDistribution {
            j_index,
            energy,
            samples,
            conditional_second_moment: second,
            first_moment_shift: first,
            rescaled_x,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|(_, w)| w).sum()
    }
}

/// Overlap distribution of a single product state `j`.
pub fn overlap_distribution(total: &Spectrum, basis: &ProductBasis, j: usize) -> Result<OverlapDistribution> {
    if total.dim() != basis.dim() {
        return Err(invalid("spectrum and product basis dimensions differ"));
    }
    if j >= basis.dim() {
        return Err(invalid(format!("product index {j} out of range")));
    }
    let row = basis.states().column(j).adjoint() * total.states();
    let samples = total
        .energies()
        .iter()
        .zip(row.iter())
        .map(|(&e, a)| (e, a.norm_sqr()))
        .collect();
    Ok(OverlapDistribution::from_samples(j, basis.energies()[j], samples))
}

/// `⟨j|I|j⟩` and `⟨j|I²|j⟩ = ‖I|j⟩‖²` computed directly from the
/// interaction operator.
#[derive(Clone, Debug)]
pub struct InteractionMoments {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl InteractionMoments {
    pub fn new(basis: &ProductBasis, interaction: &ChainOperator) -> Result<Self> {
        if interaction.dim() != basis.dim() {
            return Err(invalid("interaction and product basis dimensions differ"));
        }
        let v = basis.states();
        let iv = complex_product(interaction.matrix(), v);
        let mut first = Vec::with_capacity(basis.dim());
        let mut second = Vec::with_capacity(basis.dim());
        for j in 0..basis.dim() {
            first.push(v.column(j).dotc(&iv.column(j)).re);
            second.push(iv.column(j).norm_squared());
        }
        Ok(InteractionMoments { first, second })
    }

    /// Mean of `⟨j|I²|j⟩` over all `j`, equal to `Ī²`.
    pub fn mean_second(&self) -> f64 {
        self.second.iter().sum::<f64>() / self.second.len() as f64
    }

    /// Mean of `⟨j|I|j⟩`, equal to `Tr(I)/dim`.
    pub fn mean_first(&self) -> f64 {
        self.first.iter().sum::<f64>() / self.first.len() as f64
    }
}

/// Histogram estimate of the density of states, bins centred so the lowest
/// level sits in the middle of bin 0.
#[derive(Clone, Debug)]
pub struct DensityOfStates {
    origin: f64,
    bin_width: f64,
    counts: Vec<usize>,
}

impl DensityOfStates {
    /// `η(E)`: level count of the bin containing `E` per unit energy.
    pub fn eval(&self, energy: f64) -> f64 {
        let pos = ((energy - self.origin) / self.bin_width).floor();
        if pos < 0.0 || pos >= self.counts.len() as f64 {
            return 0.0;
        }
        self.counts[pos as usize] as f64 / self.bin_width
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `Σ_bins η · width`, the number of levels.
    pub fn integral(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64 / self.bin_width * self.bin_width).sum()
    }
}

pub fn density_of_states(energies: &[f64], bin_width: f64) -> Result<DensityOfStates> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(invalid(format!("bin width must be positive, got {bin_width}")));
    }
    if energies.is_empty() {
        return Err(invalid("density of states needs at least one level"));
    }
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let origin = lo - bin_width / 2.0;
    let bins = ((hi - origin) / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for e in energies {
        let k = (((e - origin) / bin_width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(DensityOfStates { origin, bin_width, counts })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub j_index: usize,
    pub x: f64,
    /// `w_j(μ) η(E_μ)`.
    pub weighted_density: f64,
    /// `A exp(-β |E_μ - E_j|)`.
    pub envelope: f64,
}

impl DecayPoint {
    pub fn in_tail(&self) -> bool {
        self.x.abs() > 1.0
    }

    pub fn above_envelope(&self) -> bool {
        self.weighted_density > self.envelope
    }
}

#[derive(Clone, Debug, Default)]
pub struct DecayProfile {
    pub points: Vec<DecayPoint>,
}

impl DecayProfile {
    pub fn extend(&mut self, other: DecayProfile) {
        self.points.extend(other.points);
    }

    pub fn tail_points(&self) -> usize {
        self.points.iter().filter(|p| p.in_tail()).count()
    }

    pub fn tail_violations(&self) -> usize {
        self.points.iter().filter(|p| p.in_tail() && p.above_envelope()).count()
    }

    /// Fraction of `|x| > 1` points above the envelope (0 with no tail).
    pub fn violation_fraction(&self) -> f64 {
        match self.tail_points() {
            0 => 0.0,
            t => self.tail_violations() as f64 / t as f64,
        }
    }

    pub fn passes(&self, max_fraction: f64) -> bool {
        self.violation_fraction() < max_fraction
    }
}

/// Scatter of `w_j(μ) η(E_μ - E_j)` against the rescaled gap `x`, compared with
/// the envelope `A exp(-β|E_μ - E_j|)`.
pub fn decay_profile(dist: &OverlapDistribution, dos: &DensityOfStates, beta: f64, amplitude: f64) -> DecayProfile {
    let points = dist
        .samples
        .iter()
        .zip(&dist.rescaled_x)
        .map(|(&(e, w), &x)| DecayPoint {
            j_index: dist.j_index,
            x,
            weighted_density: w * dos.eval(e - dist.energy),
            envelope: amplitude * (-beta * (e - dist.energy).abs()).exp(),
        })
        .collect();
    DecayProfile { points }
}

/// Exact and approximated diagonal elements `⟨j|ρ|j⟩` of the global
/// canonical state in the product basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalRecord {
    pub j_index: usize,
    /// `Σ_μ w_j(μ) e^{-βE_μ}/Z`.
    pub exact: f64,
    /// `e^{-βE_j}/Z`.
    pub zeroth: f64,
    /// `zeroth · (1 - β⟨j|I|j⟩ + β²⟨j|I²|j⟩/2)`.
    pub truncated: f64,
    /// `β sqrt(⟨j|I²|j⟩)`.
    pub correction_norm: f64,
    /// `|Σ_μ E_μ w_j(μ) - E_j - ⟨j|I|j⟩|`.
    pub first_moment_residual: f64,
}

pub fn diagonal_comparison(
    total: &Spectrum,
    table: &OverlapTable,
    moments: &InteractionMoments,
    beta: f64,
) -> Result<Vec<DiagonalRecord>> {
    let pops = boltzmann_weights(total.energies(), beta)?;
    let ground = total.energies().first().copied().unwrap_or(0.0);
    // e^{-β(E - E_0)} / Σ_μ e^{-β(E_μ - E_0)}, sharing the shift with `pops`.
    let z_shifted: f64 = total.energies().iter().map(|e| (-beta * (e - ground)).exp()).sum();
    let exact = table.product_diagonal(&pops);
    Ok((0..table.dim())
        .map(|j| {
            let dist = table.distribution(j);
            let zeroth = (-beta * (dist.energy - ground)).exp() / z_shifted;
            let first = moments.first[j];
            let second = moments.second[j];
            DiagonalRecord {
                j_index: j,
                exact: exact[j],
                zeroth,
                truncated: zeroth * (1.0 - beta * first + beta * beta / 2.0 * second),
                correction_norm: beta * second.sqrt(),
                first_moment_residual: (dist.first_moment_shift - first).abs(),
            }
        })
        .collect())
}

/// Off-diagonal magnitudes `|⟨j|ρ|j'⟩|` against the product-energy gap.
#[derive(Clone, Debug)]
pub struct OffDiagonalProfile {
    /// `(|E_j - E_j'|, |ρ_jj'|)` for all ordered pairs `j ≠ j'`.
    pub samples: Vec<(f64, f64)>,
    pub mean_diagonal: f64,
}

impl OffDiagonalProfile {
    /// Largest magnitude among pairs with gap above `threshold`.
    pub fn max_beyond(&self, threshold: f64) -> f64 {
        self.samples
            .iter()
            .filter(|(gap, _)| *gap > threshold)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max)
    }
}

pub fn offdiagonal_profile(rho: &DensityMatrix, basis: &ProductBasis) -> Result<OffDiagonalProfile> {
    if rho.basis() != Basis::Product {
        return Err(invalid("off-diagonal profile needs a state in the product basis"));
    }
    if rho.dim() != basis.dim() {
        return Err(invalid("state and product basis dimensions differ"));
    }
    let e = basis.energies();
    let m = rho.matrix();
    let dim = rho.dim();
    let mut samples = Vec::with_capacity(dim * (dim - 1));
    for j in 0..dim {
        for k in 0..dim {
            if j != k {
                samples.push(((e[j] - e[k]).abs(), m[(j, k)].norm()));
            }
        }
    }
    let mean_diagonal = m.diagonal().iter().map(|z| z.re).sum::<f64>() / dim as f64;
    Ok(OffDiagonalProfile { samples, mean_diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_generators;
    use crate::chain::{build_hamiltonian, sample_random_model, split_partition, PartitionSpec};
    use crate::spectra::{diagonalize, interaction_strength};
    use crate::thermal::{build_product_basis, canonical_in_product_basis};

    struct Fixture {
        total: Spectrum,
        basis: ProductBasis,
        table: OverlapTable,
        moments: InteractionMoments,
        strength: f64,
    }

    fn fixture(seed: u64, lambda: f64, group_size: usize) -> Fixture {
        let gens = build_generators(2).unwrap();
        let spec = sample_random_model(seed, lambda, 1.0).to_spec(8).unwrap();
        let total = diagonalize(&build_hamiltonian(&spec, &gens).unwrap()).unwrap();
        let part = PartitionSpec::new(8, group_size).unwrap();
        let basis = build_product_basis(&spec, &part, &gens).unwrap();
        let (_, i) = split_partition(&spec, &part, &gens).unwrap();
        let table = OverlapTable::new(&total, &basis).unwrap();
        let moments = InteractionMoments::new(&basis, &i).unwrap();
        Fixture { total, basis, table, moments, strength: interaction_strength(&i) }
    }

    #[test]
    fn second_moment_identity_two_paths() {
        for n in [1, 2, 4] {
            let f = fixture(40 + n as u64, 1.0, n);
            for j in 0..256 {
                let d = f.table.distribution(j);
                let direct = f.moments.second[j];
                assert!((d.conditional_second_moment - direct).abs() <= 1e-9 * direct, "N={n} j={j}");
                assert!((d.total_weight() - 1.0).abs() < 1e-10);
                assert!((d.first_moment_shift - f.moments.first[j]).abs() < 1e-9 * (1.0 + direct.sqrt()));
            }
            let mean = f.moments.mean_second();
            assert!((mean - f.strength.powi(2)).abs() < 1e-10 * mean);
            assert!(f.moments.mean_first().abs() < 1e-12);
        }
    }

    #[test]
    fn single_row_matches_table() {
        let f = fixture(3, 1.0, 2);
        let a = overlap_distribution(&f.total, &f.basis, 77).unwrap();
        let b = f.table.distribution(77);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.1 - y.1).abs() < 1e-14);
        }
        assert!(overlap_distribution(&f.total, &f.basis, 256).is_err());
    }

    #[test]
    fn decoupled_weights_are_on_shell() {
        let f = fixture(5, 0.0, 2);
        for j in 0..256 {
            let d = f.table.distribution(j);
            let on_shell: f64 = d.samples.iter().filter(|(e, _)| (e - d.energy).abs() < 1e-9).map(|s| s.1).sum();
            assert!((on_shell - 1.0).abs() < 1e-10);
            assert!(d.conditional_second_moment.max(0.0) < 1e-18);
        }
    }

    #[test]
    fn ladder_density_of_states() {
        let h = 0.5;
        let e: Vec<f64> = (0..10).map(|k| k as f64 * h).collect();
        let dos = density_of_states(&e, h).unwrap();
        for k in 0..10 {
            assert!((dos.eval(k as f64 * h) - 1.0 / h).abs() < 1e-12);
        }
        assert_eq!(dos.eval(-1.0), 0.0);
        assert!((dos.integral() - 10.0).abs() < 1e-12);
        assert!(density_of_states(&e, 0.0).is_err());
        assert!(density_of_states(&e, -1.0).is_err());
    }

    #[test]
    fn decoupled_density_of_states_peak() {
        let f = fixture(6, 0.0, 1);
        let width = 8f64.sqrt() / 2.0 / 20.0;
        let dos = density_of_states(f.total.energies(), width).unwrap();
        assert!((dos.eval(0.0) - 70.0 / width).abs() < 1e-9);
        assert!((dos.integral() - 256.0).abs() < 1e-9);
    }

    #[test]
    fn decoupled_decay_profile_passes() {
        let f = fixture(6, 0.0, 2);
        let dos = density_of_states(f.total.energies(), 0.1).unwrap();
        let mut all = DecayProfile::default();
        for j in 0..256 {
            all.extend(decay_profile(&f.table.distribution(j), &dos, 1.0, 0.25));
        }
        // Off-shell samples sit at infinite |x| with zero weight.
        assert_eq!(all.tail_violations(), 0);
        assert!(all.passes(0.05));
        assert!(all.points.iter().filter(|p| p.weighted_density > 0.0).all(|p| p.x == 0.0));
    }

    #[test]
    fn zero_amplitude_envelope_fails() {
        let f = fixture(7, 1.0, 2);
        let dos = density_of_states(f.total.energies(), 0.25).unwrap();
        let mut all = DecayProfile::default();
        for j in 0..256 {
            all.extend(decay_profile(&f.table.distribution(j), &dos, 1.0, 0.0));
        }
        assert!(all.tail_points() > 0);
        assert!(!all.passes(0.05));
    }

    #[test]
    fn decoupled_diagonal_is_exact() {
        let f = fixture(8, 0.0, 4);
        for r in diagonal_comparison(&f.total, &f.table, &f.moments, 0.7).unwrap() {
            assert!((r.exact - r.zeroth).abs() < 1e-12);
            assert!((r.exact - r.truncated).abs() < 1e-12);
            assert_eq!(r.correction_norm, 0.0);
        }
    }

    #[test]
    fn expansion_improves_estimate_when_corrections_small() {
        // Where the zeroth order is accidentally accurate, the truncated form
        // may be marginally worse but stays within the neglected third order.
        let mut checked = 0;
        let mut improved = 0;
        for n in [1, 2, 4] {
            let f = fixture(9, 1.0, n);
            for r in diagonal_comparison(&f.total, &f.table, &f.moments, 0.05).unwrap() {
                assert!(r.first_moment_residual < 1e-9 * (1.0 + f.moments.second[r.j_index].sqrt()));
                if r.correction_norm < 0.5 {
                    checked += 1;
                    let err_truncated = (r.exact - r.truncated).abs() / r.exact;
                    let err_zeroth = (r.exact - r.zeroth).abs() / r.exact;
                    if err_truncated < err_zeroth {
                        improved += 1;
                    } else {
                        assert!(err_truncated < r.correction_norm.powi(3), "{r:?}");
                    }
                }
            }
        }
        assert!(checked > 0);
        assert!(improved as f64 >= 0.99 * checked as f64, "{improved}/{checked}");
    }

    #[test]
    fn offdiagonal_profile_properties() {
        let f = fixture(10, 0.0, 2);
        let rho = canonical_in_product_basis(&f.table, &f.total, 0.3).unwrap();
        let prof = offdiagonal_profile(&rho, &f.basis).unwrap();
        assert!(prof.samples.iter().all(|(_, m)| *m < 1e-12));

        let f = fixture(10, 1.0, 2);
        let rho = canonical_in_product_basis(&f.table, &f.total, 0.3).unwrap();
        let prof = offdiagonal_profile(&rho, &f.basis).unwrap();
        let m = rho.matrix();
        for j in 0..16 {
            for k in 0..16 {
                assert!((m[(j, k)].norm() - m[(k, j)].norm()).abs() < 1e-15);
            }
        }
        assert!(prof.max_beyond(2.0 * f.strength) < prof.mean_diagonal);
    }
}
