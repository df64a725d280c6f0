//! Chain Hamiltonians with identical local terms and identical periodic
//! nearest-neighbour couplings:
//!
//! ```text
//! H = Σ_j (n/2) Σ_α A_α σ_α(j) + (n²/4) Σ_αβ C_αβ σ_α(j) σ_β(j+1)
//! ```
//!
//! The bond list is `{(j, j mod L + 1) : j = 1..L}`. For `L = 2` both bonds
//! join the same pair, so their couplings add; experiments use `L >= 4`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{embed_one_site, embed_pair, embed_two_site, successor, ChainOperator, GeneratorSet};
use crate::error::invalid;
use crate::{CMatrix, RMatrix, Result, C64};

/// Full parameterization of one translation-invariant periodic chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub levels: usize,
    pub sites: usize,
    /// Local coefficients `A_α`, length `n² - 1`.
    pub local: Vec<f64>,
    /// Coupling matrix `C_αβ`, `(n² - 1) × (n² - 1)`.
    pub coupling: RMatrix,
}

impl ChainSpec {
    pub fn new(levels: usize, sites: usize, local: Vec<f64>, coupling: RMatrix) -> Result<Self> {
        let spec = ChainSpec { levels, sites, local, coupling };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(invalid(format!("need n >= 2, got {}", self.levels)));
        }
        if self.sites < 2 {
            return Err(invalid(format!("need L >= 2 sites, got {}", self.sites)));
        }
        let g = self.generator_count();
        if self.local.len() != g {
            return Err(invalid(format!("expected {g} local coefficients, got {}", self.local.len())));
        }
        if self.coupling.shape() != (g, g) {
            return Err(invalid(format!("coupling matrix must be {g}x{g}")));
        }
        if self.local.iter().chain(self.coupling.iter()).any(|x| !x.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        Ok(())
    }

    pub fn generator_count(&self) -> usize {
        self.levels * self.levels - 1
    }

    pub fn dim(&self) -> usize {
        self.levels.pow(self.sites as u32)
    }

    pub fn coupling_norm_sq(&self) -> f64 {
        self.coupling.iter().map(|c| c * c).sum()
    }

    pub fn local_norm_sq(&self) -> f64 {
        self.local.iter().map(|a| a * a).sum()
    }

    /// `(n/2) Σ_α A_α σ_α` on one site.
    pub fn local_term(&self, gens: &GeneratorSet) -> CMatrix {
        gens.combine(&self.local) * C64::from(self.levels as f64 / 2.0)
    }

    /// `(n²/4) Σ_αβ C_αβ σ_α ⊗ σ_β` on two sites.
    pub fn bond_term(&self, gens: &GeneratorSet) -> CMatrix {
        let n = self.levels;
        let mut out = CMatrix::zeros(n * n, n * n);
        for (a, sa) in gens.matrices().iter().enumerate() {
            for (b, sb) in gens.matrices().iter().enumerate() {
                let c = self.coupling[(a, b)];
                if c != 0.0 {
                    out += sa.kronecker(sb) * C64::from(c);
                }
            }
        }
        out * C64::from((n * n) as f64 / 4.0)
    }

    fn check_generators(&self, gens: &GeneratorSet) -> Result<()> {
        self.validate()?;
        if gens.levels() != self.levels {
            return Err(invalid(format!(
                "generator set is for n={}, chain has n={}",
                gens.levels(),
                self.levels
            )));
        }
        Ok(())
    }
}

/// The two-level experiment model: `H = (ΔE/2) Σ σz(j) + λ Σ c_αβ σ_α(j) σ_β(j+1)`.
///
/// Generalizes to `n` levels by placing `ΔE/2` on the last (diagonal)
/// generator and drawing an `(n²-1)²` coupling pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericModel {
    pub levels: usize,
    pub delta_e: f64,
    pub lambda: f64,
    /// Dimensionless coupling pattern `c_αβ`.
    pub pattern: RMatrix,
}

impl NumericModel {
    /// `A = (0, …, 0, ΔE/2) · (2/n)`, `C = λ c · (4/n²)`, which for `n = 2`
    /// is exactly `A_z = ΔE/2`, `C = λ c`.
    pub fn to_spec(&self, sites: usize) -> Result<ChainSpec> {
        let n = self.levels as f64;
        let g = self.levels * self.levels - 1;
        let mut local = vec![0.0; g];
        local[g - 1] = self.delta_e / 2.0 * (2.0 / n);
        let coupling = &self.pattern * (self.lambda * 4.0 / (n * n));
        ChainSpec::new(self.levels, sites, local, coupling)
    }

    pub fn with_lambda(&self, lambda: f64) -> NumericModel {
        NumericModel { lambda, ..self.clone() }
    }
}

/// Samples the two-level model: nine independent `c_αβ` uniform on `[-1, 1)`.
pub fn sample_random_model(seed: u64, lambda: f64, delta_e: f64) -> NumericModel {
    sample_random_model_levels(2, seed, lambda, delta_e)
}

/// As [`sample_random_model`] for `n`-level sites.
pub fn sample_random_model_levels(levels: usize, seed: u64, lambda: f64, delta_e: f64) -> NumericModel {
    let g = levels * levels - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Row-major draw order: c_11, c_12, …, c_gg.
    let pattern = RMatrix::from_row_iterator(g, g, (0..g * g).map(|_| rng.random_range(-1.0..1.0)));
    NumericModel { levels, delta_e, lambda, pattern }
}

/// Division of the chain into `groups` contiguous blocks of `group_size`
/// sites each. Group `k` (1-based) holds sites `(k-1)N+1 ..= kN`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub group_size: usize,
    pub groups: usize,
}

impl PartitionSpec {
    pub fn new(sites: usize, group_size: usize) -> Result<Self> {
        if group_size == 0 || !sites.is_multiple_of(group_size) {
            return Err(invalid(format!(
                "group size N={group_size} does not divide chain length L={sites}"
            )));
        }
        Ok(PartitionSpec { group_size, groups: sites / group_size })
    }

    pub fn sites(&self) -> usize {
        self.group_size * self.groups
    }

    /// Sites of group `k` (1-based).
    pub fn group_sites(&self, k: usize) -> Vec<usize> {
        let start = (k - 1) * self.group_size + 1;
        (start..start + self.group_size).collect()
    }

    /// Bonds `(iN, iN+1)` joining neighbouring groups.
    pub fn is_boundary_bond(&self, site: usize) -> bool {
        site.is_multiple_of(self.group_size)
    }
}

pub fn build_hamiltonian(spec: &ChainSpec, gens: &GeneratorSet) -> Result<ChainOperator> {
    spec.check_generators(gens)?;
    assemble(spec, gens, spec.sites, |_| true, true)
}

/// Splits `H` into the group Hamiltonian `H0` (all local terms and
/// intra-group bonds) and the inter-group interaction `I` (the `n_G`
/// boundary bonds).
pub fn split_partition(
    spec: &ChainSpec,
    part: &PartitionSpec,
    gens: &GeneratorSet,
) -> Result<(ChainOperator, ChainOperator)> {
    spec.check_generators(gens)?;
    if part.sites() != spec.sites {
        return Err(invalid(format!(
            "partition {}x{} does not cover L={}",
            part.groups, part.group_size, spec.sites
        )));
    }
    let h0 = assemble(spec, gens, spec.sites, |j| !part.is_boundary_bond(j), true)?;
    let interaction = assemble(spec, gens, spec.sites, |j| part.is_boundary_bond(j), false)?;
    Ok((h0, interaction))
}

/// Hamiltonian of a single isolated group: an open chain of `group_size`
/// sites with the local terms and the `group_size - 1` internal bonds.
pub fn group_hamiltonian(spec: &ChainSpec, group_size: usize, gens: &GeneratorSet) -> Result<ChainOperator> {
    spec.check_generators(gens)?;
    if group_size == 0 {
        return Err(invalid("group size must be positive"));
    }
    let n = spec.levels;
    let local = spec.local_term(gens);
    let bond = spec.bond_term(gens);
    let mut h = ChainOperator::zeros(group_size, n)?;
    for j in 1..=group_size {
        h.add_assign(&embed_one_site(&local, j, group_size, n)?);
        if j < group_size {
            h.add_assign(&embed_two_site(&bond, j, j + 1, group_size, n)?);
        }
    }
    Ok(h)
}

fn assemble(
    spec: &ChainSpec,
    gens: &GeneratorSet,
    sites: usize,
    keep_bond: impl Fn(usize) -> bool,
    with_local: bool,
) -> Result<ChainOperator> {
    let n = spec.levels;
    let local = spec.local_term(gens);
    let bond = spec.bond_term(gens);
    let mut h = ChainOperator::zeros(sites, n)?;
    for j in 1..=sites {
        if with_local {
            h.add_assign(&embed_one_site(&local, j, sites, n)?);
        }
        if keep_bond(j) {
            h.add_assign(&embed_two_site(&bond, j, successor(j, sites), sites, n)?);
        }
    }
    Ok(h)
}

/// Coefficients `A_α = Tr(H σ_α(i))/dim` and `C_αβ = Tr(H σ_α(i) σ_β(i+1))/dim`
/// probed at `site`. With the normalization `Tr[σ_α σ_β] = 2δ_αβ` these
/// recover the generating [`ChainSpec`] exactly for `L >= 3`.
pub fn extract_coefficients(h: &ChainOperator, gens: &GeneratorSet, site: usize) -> Result<(Vec<f64>, RMatrix)> {
    if gens.levels() != h.levels() {
        return Err(invalid("generator set does not match operator levels"));
    }
    let sites = h.sites();
    let dim = h.dim() as f64;
    let g = gens.len();
    let mut local = vec![0.0; g];
    for (a, slot) in local.iter_mut().enumerate() {
        let probe = crate::algebra::embed_single(gens, a, site, sites)?;
        *slot = h.trace_product(&probe).re / dim;
    }
    let mut coupling = RMatrix::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            let probe = embed_pair(gens, a, b, site, sites)?;
            coupling[(a, b)] = h.trace_product(&probe).re / dim;
        }
    }
    Ok((local, coupling))
}
