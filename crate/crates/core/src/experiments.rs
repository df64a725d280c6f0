//! Seeded realization sweeps over random coupling patterns.
//!
//! Realization `k` uses seed `base_seed + k`, so every record is a pure
//! function of `(config, k)`. Sweeps run realizations in parallel and merge
//! them in index order; no output depends on the thread count.

use rayon::prelude::*;

use crate::algebra::{build_generators, GeneratorSet};
use crate::chain::{build_hamiltonian, sample_random_model_levels, split_partition, ChainSpec, PartitionSpec};
use crate::error::invalid;
use crate::spectra::{
    diagonalize, interaction_strength, interaction_strength_closed_form, level_width, level_width_closed_form,
    Spectrum,
};
use crate::thermal::{
    build_product_basis, canonical_in_product_basis, decay_profile, density_of_states,
    group_occupations_from_diagonal, product_canonical, state_distance, DecayProfile, DensityOfStates,
    InteractionMoments, OverlapTable, ProductBasis,
};
use crate::{tolerance, Error, RMatrix, Result};

/// Envelope exponent `β sqrt(⟨j|I²|j⟩)` used for the decay comparison.
pub const DECAY_EXPONENT: f64 = 0.5;

/// Maximum fraction of tail points (`|x| > 1`) allowed above the envelope.
pub const DECAY_MAX_VIOLATION_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub sites: usize,
    pub levels: usize,
    /// Level splitting `ΔE`, the energy unit.
    pub delta_e: f64,
    /// Interaction scale `λ` in units of `ΔE`.
    pub lambda: f64,
    /// Grid of `βλ` products. With `λ = 0` the values are read as `β` in
    /// units of `1/ΔE`.
    pub beta_lambda: Vec<f64>,
    /// Group sizes `N`.
    pub partitions: Vec<usize>,
    pub realizations: usize,
    pub base_seed: u64,
    /// Density-of-states bin width; `None` means `δE/20`.
    pub bin_width: Option<f64>,
    pub envelope_amplitude: f64,
    /// Realization shown in the overlap-decay dataset.
    pub fig2_realization: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sites: 8,
            levels: 2,
            delta_e: 1.0,
            lambda: 1.0,
            beta_lambda: vec![0.1, 0.2, 0.3, 0.4],
            partitions: vec![1, 2, 4],
            realizations: 100,
            base_seed: 1,
            bin_width: None,
            envelope_amplitude: 0.25,
            fig2_realization: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(invalid(format!("levels must be >= 2, got {}", self.levels)));
        }
        if self.sites < 3 {
            return Err(invalid(format!("sites must be >= 3, got {}", self.sites)));
        }
        let dim = (self.levels as f64).powi(self.sites as i32);
        if dim > 8192.0 {
            return Err(invalid(format!("n^L = {dim} exceeds dense reach (8192)")));
        }
        if self.partitions.is_empty() {
            return Err(invalid("at least one partition is required"));
        }
        for &n in &self.partitions {
            PartitionSpec::new(self.sites, n)?;
        }
        if self.beta_lambda.is_empty() || self.beta_lambda.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(invalid("beta_lambda values must be finite and positive"));
        }
        if !(self.delta_e.is_finite() && self.delta_e > 0.0) {
            return Err(invalid("delta_e must be finite and positive"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda must be finite and non-negative"));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations must be >= 1"));
        }
        if let Some(w) = self.bin_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid("bin_width must be finite and positive"));
            }
        }
        if !(self.envelope_amplitude.is_finite() && self.envelope_amplitude >= 0.0) {
            return Err(invalid("envelope_amplitude must be finite and non-negative"));
        }
        if self.fig2_realization >= self.realizations {
            return Err(invalid(format!(
                "fig2_realization {} outside 0..{}",
                self.fig2_realization, self.realizations
            )));
        }
        Ok(())
    }

    /// `β` for a grid value `βλ`, in units of `1/ΔE`.
    pub fn beta(&self, beta_lambda: f64) -> f64 {
        let scale = if self.lambda > 0.0 { self.lambda } else { self.delta_e };
        beta_lambda / scale
    }

    pub fn seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    /// Partitions sorted by ascending group size.
    fn sorted_partitions(&self) -> Vec<usize> {
        let mut p = self.partitions.clone();
        p.sort_unstable();
        p.dedup();
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub beta_lambda: f64,
    pub beta: f64,
    /// `dist(ρ, ρ̃)`.
    pub distance: f64,
    pub beta_spec: f64,
    pub beta_spec_ratio: f64,
    /// `max_j β sqrt(⟨j|I²|j⟩)`.
    pub max_correction_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    pub group_size: usize,
    /// `Ī_N` from `Tr(I²)`.
    pub interaction: f64,
    pub interaction_closed_form: f64,
    /// `Ī_N / δE`.
    pub ratio: f64,
    /// Max relative residual of `Σ_μ (E_μ - E_j)² w_j(μ)` against `⟨j|I²|j⟩`.
    pub second_moment_residual: f64,
    /// Fraction of tail points above the decay envelope.
    pub decay_violation_fraction: f64,
    pub cells: Vec<CellResult>,
}

impl PartitionResult {
    pub fn scaling_bound(&self) -> f64 {
        1.0 / (self.group_size as f64).sqrt()
    }

    pub fn violates_scaling(&self) -> bool {
        self.ratio > self.scaling_bound() * (1.0 + tolerance::CONSTRUCTION)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizationResult {
    pub index: usize,
    pub seed: u64,
    pub pattern: RMatrix,
    /// `δE` from `Tr(H²)`.
    pub level_width: f64,
    pub level_width_closed_form: f64,
    pub partitions: Vec<PartitionResult>,
    /// Tail fraction above the envelope, all partitions superposed.
    pub decay_violation_fraction: f64,
    pub decay_pass: bool,
}

impl RealizationResult {
    pub fn partition(&self, group_size: usize) -> Option<&PartitionResult> {
        self.partitions.iter().find(|p| p.group_size == group_size)
    }

    /// `dist` non-increasing in `N` at every `βλ`.
    pub fn distance_monotone(&self) -> bool {
        let cells = self.partitions.first().map_or(0, |p| p.cells.len());
        (0..cells).all(|c| {
            self.partitions
                .windows(2)
                .all(|w| w[1].cells[c].distance <= w[0].cells[c].distance)
        })
    }
}

/// Everything derived from one realization's Hamiltonian and one partition.
struct PartitionContext {
    part: PartitionSpec,
    basis: ProductBasis,
    table: OverlapTable,
    moments: InteractionMoments,
    interaction: f64,
    interaction_closed_form: f64,
}

struct RealizationContext {
    spec: ChainSpec,
    total: Spectrum,
    level_width: f64,
    dos: DensityOfStates,
}

fn realization_context(config: &ExperimentConfig, gens: &GeneratorSet, index: usize) -> Result<RealizationContext> {
    let model = sample_random_model_levels(config.levels, config.seed(index), config.lambda, config.delta_e);
    let spec = model.to_spec(config.sites)?;
    let h = build_hamiltonian(&spec, gens)?;
    let width = level_width(&h);
    let total = diagonalize(&h)?;
    let bin = config.bin_width.unwrap_or(width / 20.0);
    let dos = density_of_states(total.energies(), bin)?;
    Ok(RealizationContext { spec, total, level_width: width, dos })
}

fn partition_context(ctx: &RealizationContext, gens: &GeneratorSet, group_size: usize) -> Result<PartitionContext> {
    let part = PartitionSpec::new(ctx.spec.sites, group_size)?;
    let (_, interaction_op) = split_partition(&ctx.spec, &part, gens)?;
    let basis = build_product_basis(&ctx.spec, &part, gens)?;
    let table = OverlapTable::new(&ctx.total, &basis)?;
    let moments = InteractionMoments::new(&basis, &interaction_op)?;
    Ok(PartitionContext {
        part,
        basis,
        table,
        moments,
        interaction: interaction_strength(&interaction_op),
        interaction_closed_form: interaction_strength_closed_form(&ctx.spec, &part),
    })
}

/// Decay scatter for every product state, each with `β_j` chosen so that
/// `β_j sqrt(⟨j|I²|j⟩) = 0.5`; the envelope is then `A exp(-0.5|x|)`.
fn decay_scatter(ctx: &RealizationContext, pc: &PartitionContext, amplitude: f64) -> DecayProfile {
    let mut all = DecayProfile::default();
    for j in 0..pc.table.dim() {
        let dist = pc.table.distribution(j);
        let width = dist.conditional_second_moment.sqrt();
        let beta = if width > 0.0 { DECAY_EXPONENT / width } else { 0.0 };
        all.extend(decay_profile(&dist, &ctx.dos, beta, amplitude));
    }
    all
}

pub fn run_realization(config: &ExperimentConfig, index: usize) -> Result<RealizationResult> {
    config.validate()?;
    if index >= config.realizations {
        return Err(invalid(format!("realization {index} outside 0..{}", config.realizations)));
    }
    let gens = build_generators(config.levels)?;
    let ctx = realization_context(config, &gens, index)?;
    let cluster_tol = tolerance::LEVEL_CLUSTER * ctx.level_width;

    let mut partitions = Vec::new();
    let mut superposed = DecayProfile::default();
    for n in config.sorted_partitions() {
        let pc = partition_context(&ctx, &gens, n)?;

        let mut residual = 0.0_f64;
        for j in 0..pc.table.dim() {
            let path_a = pc.table.distribution(j).conditional_second_moment;
            let path_b = pc.moments.second[j];
            let scale = path_b.abs().max(f64::MIN_POSITIVE);
            if path_a != path_b {
                residual = residual.max((path_a - path_b).abs() / scale);
            }
        }

        let decay = decay_scatter(&ctx, &pc, config.envelope_amplitude);

        let max_second = pc.moments.second.iter().copied().fold(0.0, f64::max);
        let mut cells = Vec::with_capacity(config.beta_lambda.len());
        for &bl in &config.beta_lambda {
            let beta = config.beta(bl);
            let rho = canonical_in_product_basis(&pc.table, &ctx.total, beta)?;
            let tilde = product_canonical(&pc.basis, beta)?;
            let distance = state_distance(&rho, &tilde)?;
            let occupations =
                group_occupations_from_diagonal(&rho.diagonal_populations(), &pc.basis, 1, cluster_tol)?;
            let beta_spec = occupations.spectral_temperature()?;
            cells.push(CellResult {
                beta_lambda: bl,
                beta,
                distance,
                beta_spec,
                beta_spec_ratio: beta_spec / beta,
                max_correction_norm: beta * max_second.sqrt(),
            });
        }

        partitions.push(PartitionResult {
            group_size: pc.part.group_size,
            interaction: pc.interaction,
            interaction_closed_form: pc.interaction_closed_form,
            ratio: pc.interaction / ctx.level_width,
            second_moment_residual: residual,
            decay_violation_fraction: decay.violation_fraction(),
            cells,
        });
        superposed.extend(decay);
    }

    Ok(RealizationResult {
        index,
        seed: config.seed(index),
        pattern: sample_random_model_levels(config.levels, config.seed(index), 1.0, 1.0).pattern,
        level_width: ctx.level_width,
        level_width_closed_form: level_width_closed_form(&ctx.spec),
        partitions,
        decay_violation_fraction: superposed.violation_fraction(),
        decay_pass: superposed.passes(DECAY_MAX_VIOLATION_FRACTION),
    })
}

/// The superposed decay scatter of realization `index` over all configured
/// partitions, in partition order.
pub fn decay_dataset(config: &ExperimentConfig, index: usize) -> Result<Vec<crate::thermal::DecayPoint>> {
    config.validate()?;
    let gens = build_generators(config.levels)?;
    let ctx = realization_context(config, &gens, index)?;
    let mut points = Vec::new();
    for n in config.sorted_partitions() {
        let pc = partition_context(&ctx, &gens, n)?;
        points.extend(decay_scatter(&ctx, &pc, config.envelope_amplitude).points);
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub group_size: usize,
    pub beta_lambda: f64,
    pub mean_distance: f64,
    pub mean_beta_spec_ratio: f64,
    pub max_beta_spec_ratio: f64,
}

impl CellSummary {
    /// `√N / (βλ)`, the locality margin of the cell.
    pub fn locality_margin(&self) -> f64 {
        (self.group_size as f64).sqrt() / self.beta_lambda
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub realizations: usize,
    /// Mean and sample standard deviation of `δE/λ` (of `δE/ΔE` when `λ = 0`).
    pub level_width_mean: f64,
    pub level_width_std: f64,
    /// `(N, mean Ī_N/δE)`.
    pub mean_ratio: Vec<(usize, f64)>,
    pub cells: Vec<CellSummary>,
    pub scaling_violations: usize,
    /// Cells with `β_spec/β > 1 + 1e-9`.
    pub beta_spec_exceedances: usize,
    /// Realizations whose distance is non-increasing in `N` at every `βλ`.
    pub distance_monotone: usize,
    pub decay_passes: usize,
    pub max_second_moment_residual: f64,
    pub max_dual_path_residual: f64,
}

impl SweepSummary {
    pub fn distance_monotone_fraction(&self) -> f64 {
        self.distance_monotone as f64 / self.realizations as f64
    }

    pub fn cell(&self, group_size: usize, beta_lambda: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.group_size == group_size && c.beta_lambda == beta_lambda)
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub config: ExperimentConfig,
    pub summary: SweepSummary,
    pub realizations: Vec<RealizationResult>,
}

/// Runs every realization, on `threads` workers when given (otherwise the
/// global rayon pool), and aggregates in index order.
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepOutcome> {
    config.validate()?;
    let work = || -> Result<Vec<RealizationResult>> {
        (0..config.realizations)
            .into_par_iter()
            .map(|k| run_realization(config, k))
            .collect()
    };
    let realizations = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let summary = summarize(config, &realizations)?;
    Ok(SweepOutcome { config: config.clone(), summary, realizations })
}

pub fn summarize(config: &ExperimentConfig, results: &[RealizationResult]) -> Result<SweepSummary> {
    if results.is_empty() {
        return Err(invalid("cannot summarize an empty sweep"));
    }
    let count = results.len() as f64;
    let unit = if config.lambda > 0.0 { config.lambda } else { config.delta_e };
    let widths: Vec<f64> = results.iter().map(|r| r.level_width / unit).collect();
    let level_width_mean = widths.iter().sum::<f64>() / count;
    let level_width_std = if results.len() > 1 {
        (widths.iter().map(|w| (w - level_width_mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };

    let sizes = config.sorted_partitions();
    let mean_ratio = sizes
        .iter()
        .enumerate()
        .map(|(p, &n)| (n, results.iter().map(|r| r.partitions[p].ratio).sum::<f64>() / count))
        .collect();

    let mut cells = Vec::new();
    for (p, &n) in sizes.iter().enumerate() {
        for (c, &bl) in config.beta_lambda.iter().enumerate() {
            let cell = |r: &RealizationResult| r.partitions[p].cells[c].clone();
            cells.push(CellSummary {
                group_size: n,
                beta_lambda: bl,
                mean_distance: results.iter().map(|r| cell(r).distance).sum::<f64>() / count,
                mean_beta_spec_ratio: results.iter().map(|r| cell(r).beta_spec_ratio).sum::<f64>() / count,
                max_beta_spec_ratio: results
                    .iter()
                    .map(|r| cell(r).beta_spec_ratio)
                    .fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    let all_partitions = || results.iter().flat_map(|r| r.partitions.iter());
    let dual = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / b.abs() };
    let max_dual_path_residual = results
        .iter()
        .map(|r| {
            r.partitions
                .iter()
                .map(|p| dual(p.interaction, p.interaction_closed_form))
                .fold(dual(r.level_width, r.level_width_closed_form), f64::max)
        })
        .fold(0.0, f64::max);

    let summary = SweepSummary {
        realizations: results.len(),
        level_width_mean,
        level_width_std,
        mean_ratio,
        cells,
        scaling_violations: all_partitions().filter(|p| p.violates_scaling()).count(),
        beta_spec_exceedances: all_partitions()
            .flat_map(|p| p.cells.iter())
            .filter(|c| c.beta_spec_ratio > 1.0 + tolerance::DECOMPOSITION)
            .count(),
        distance_monotone: results.iter().filter(|r| r.distance_monotone()).count(),
        decay_passes: results.iter().filter(|r| r.decay_pass).count(),
        max_second_moment_residual: all_partitions().map(|p| p.second_moment_residual).fold(0.0, f64::max),
        max_dual_path_residual,
    };
    Ok(summary)
}

/// Fails with [`Error::Invariant`] when a hard invariant of the sweep is
/// breached.
pub fn check_invariants(summary: &SweepSummary) -> Result<()> {
    if summary.scaling_violations > 0 {
        return Err(Error::Invariant {
            name: "scaling-bound".into(),
            detail: format!("{} partitions exceed 1/sqrt(N)", summary.scaling_violations),
        });
    }
    if summary.max_second_moment_residual >= tolerance::DECOMPOSITION {
        return Err(Error::Invariant {
            name: "second-moment-identity".into(),
            detail: format!("max relative residual {:e}", summary.max_second_moment_residual),
        });
    }
    if summary.max_dual_path_residual >= tolerance::TRACE {
        return Err(Error::Invariant {
            name: "closed-form-dual-path".into(),
            detail: format!("max relative residual {:e}", summary.max_dual_path_residual),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            sites: 4,
            partitions: vec![1, 2],
            realizations: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            ExperimentConfig { partitions: vec![3], ..ExperimentConfig::default() },
            ExperimentConfig { realizations: 0, ..ExperimentConfig::default() },
            ExperimentConfig { beta_lambda: vec![0.0], ..ExperimentConfig::default() },
            ExperimentConfig { lambda: -1.0, ..ExperimentConfig::default() },
            ExperimentConfig { fig2_realization: 100, ..ExperimentConfig::default() },
            ExperimentConfig { bin_width: Some(0.0), ..ExperimentConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn realization_is_deterministic() {
        let c = small();
        assert_eq!(run_realization(&c, 1).unwrap(), run_realization(&c, 1).unwrap());
        assert!(run_realization(&c, 3).is_err());
    }

    #[test]
    fn zero_coupling_realization() {
        let c = ExperimentConfig { lambda: 0.0, ..small() };
        let r = run_realization(&c, 0).unwrap();
        for p in &r.partitions {
            assert_eq!(p.ratio, 0.0);
            for cell in &p.cells {
                assert!(cell.distance < 1e-12);
                assert!((cell.beta_spec_ratio - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn small_sweep_respects_bound_and_order() {
        let c = small();
        let out = run_sweep(&c, Some(2)).unwrap();
        assert_eq!(out.realizations.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(out.summary.scaling_violations, 0);
        check_invariants(&out.summary).unwrap();
        assert_eq!(out.summary.cells.len(), 8);
        let single = run_sweep(&c, Some(1)).unwrap();
        assert_eq!(single.realizations, out.realizations);
        assert_eq!(single.summary, out.summary);
    }

    #[test]
    fn beta_conversion() {
        let c = ExperimentConfig { lambda: 2.0, ..ExperimentConfig::default() };
        assert_eq!(c.beta(0.4), 0.2);
        let c = ExperimentConfig { lambda: 0.0, ..ExperimentConfig::default() };
        assert_eq!(c.beta(0.4), 0.4);
    }
}
