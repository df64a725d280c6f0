//! Built-in self-checks: every identity that can be computed along two
//! independent paths, evaluated on seeded random chains.

use std::fmt;

use crate::algebra::build_generators;
use crate::chain::{
    build_hamiltonian, extract_coefficients, sample_random_model_levels, split_partition, ChainSpec, PartitionSpec,
};
use crate::spectra::{
    diagonalize, interaction_strength, interaction_strength_closed_form, level_width, level_width_closed_form,
};
use crate::thermal::{boltzmann_weights, build_product_basis, InteractionMoments, LevelOccupations, OverlapTable};
use crate::{tolerance, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_residual < self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} max residual {:.3e} (tolerance {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.tolerance
        )
    }
}

#[derive(Default)]
struct Tracker(f64);

impl Tracker {
    fn relative(&mut self, a: f64, b: f64) {
        if a != b {
            self.0 = self.0.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }

    fn absolute(&mut self, r: f64) {
        self.0 = self.0.max(r);
    }
}

fn check(name: &'static str, tolerance: f64, tracker: Tracker) -> CheckResult {
    CheckResult { name, max_residual: tracker.0, tolerance }
}

/// Runs the suite on `realizations` random 8-spin chains seeded from
/// `seed`, partitions `N ∈ {1, 2, 4}`.
pub fn run_checks(seed: u64, realizations: usize) -> Result<Vec<CheckResult>> {
    const SITES: usize = 8;
    const PARTITIONS: [usize; 3] = [1, 2, 4];
    let gens = build_generators(2)?;

    let mut second_moment = Tracker::default();
    let mut first_moment = Tracker::default();
    let mut round_trip = Tracker::default();
    let mut width_dual = Tracker::default();
    let mut strength_dual = Tracker::default();
    let mut decomposition = Tracker::default();
    let mut scaling = Tracker::default();
    let mut equality = Tracker::default();
    let mut hermitian = Tracker::default();

    for k in 0..realizations {
        let model = sample_random_model_levels(2, seed.wrapping_add(k as u64), 1.0, 1.0);
        let spec = model.to_spec(SITES)?;
        let h = build_hamiltonian(&spec, &gens)?;
        hermitian.absolute(h.hermiticity_deviation());

        let (local, coupling) = extract_coefficients(&h, &gens, 1)?;
        for (a, b) in local.iter().zip(&spec.local) {
            round_trip.absolute((a - b).abs());
        }
        round_trip.absolute((&coupling - &spec.coupling).amax());

        let width = level_width(&h);
        width_dual.relative(width, level_width_closed_form(&spec));
        let total = diagonalize(&h)?;

        let coupling_only = ChainSpec::new(2, SITES, vec![0.0; 3], spec.coupling.clone())?;
        let h_coupling = build_hamiltonian(&coupling_only, &gens)?;
        let coupling_width = level_width(&h_coupling);

        for n in PARTITIONS {
            let part = PartitionSpec::new(SITES, n)?;
            let (h0, interaction) = split_partition(&spec, &part, &gens)?;
            decomposition.absolute((&h0 + &interaction).matrix().iter().zip(h.matrix().iter()).fold(
                0.0_f64,
                |m, (a, b)| m.max((a - b).norm()),
            ));

            let strength = interaction_strength(&interaction);
            strength_dual.relative(strength, interaction_strength_closed_form(&spec, &part));
            let bound = 1.0 / (n as f64).sqrt();
            scaling.absolute((strength / width - bound).max(0.0));

            let (_, i_coupling) = split_partition(&coupling_only, &part, &gens)?;
            equality.relative(interaction_strength(&i_coupling) / coupling_width, bound);

            let basis = build_product_basis(&spec, &part, &gens)?;
            let table = OverlapTable::new(&total, &basis)?;
            let moments = InteractionMoments::new(&basis, &interaction)?;
            for j in 0..basis.dim() {
                let dist = table.distribution(j);
                second_moment.relative(dist.conditional_second_moment, moments.second[j]);
                first_moment.absolute((dist.first_moment_shift - moments.first[j]).abs() / width);
            }
        }
    }

    let mut temperature = Tracker::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let levels = rng.random_range(2..9usize);
        let mut energies: Vec<f64> = (0..levels).map(|_| rng.random_range(-3.0..3.0)).collect();
        energies.sort_by(f64::total_cmp);
        let beta = rng.random_range(0.01..2.0);
        let occupations = boltzmann_weights(&energies, beta)?;
        let levels = LevelOccupations::cluster(&energies, &occupations, tolerance::LEVEL_CLUSTER)?;
        temperature.relative(levels.spectral_temperature()?, beta);
    }

    Ok(vec![
        check("hermiticity", tolerance::CONSTRUCTION, hermitian),
        check("coefficient-round-trip", tolerance::CONSTRUCTION, round_trip),
        check("decomposition H0+I=H", tolerance::CONSTRUCTION, decomposition),
        check("level-width-closed-form", tolerance::TRACE, width_dual),
        check("interaction-closed-form", tolerance::TRACE, strength_dual),
        check("scaling-bound", tolerance::CONSTRUCTION, scaling),
        check("scaling-equality-no-local", tolerance::CONSTRUCTION, equality),
        check("second-moment-identity", tolerance::DECOMPOSITION, second_moment),
        check("first-moment-identity", tolerance::DECOMPOSITION, first_moment),
        check("spectral-temperature", tolerance::DECOMPOSITION, temperature),
    ])
}
