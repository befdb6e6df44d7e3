//! Genetic-algorithm wrapper feature selection.
//!
//! Individuals are binary feature masks scored by stratified cross-validated
//! MLP accuracy on the selected columns. Each generation keeps its elites,
//! then fills up with tournament selection, uniform crossover and bit-flip
//! mutation.

mod fitness;
mod log;
mod mask;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mlp::MlpConfig;
use crate::numerics::RandomStream;

pub use fitness::{fitness, mask_seed, masked_cv, FitnessEvaluator};
pub use log::{convergence_csv, parse_convergence_csv, write_convergence_csv, GenerationLog, CONVERGENCE_HEADER};
pub use mask::{preference, FeatureMask};

const INIT_STREAM: u64 = 0x1417;
const GENERATION_STREAM_BASE: u64 = 0x6E00_0000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub per_gene_crossover_p: f64,
    /// Per-bit flip probability; `None` means `1/d`.
    pub mutation_rate: Option<f64>,
    pub elite_count: usize,
    pub fitness_cv_folds: usize,
    pub seed: u64,
    pub mlp_cfg: MlpConfig,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 30,
            generations: 30,
            tournament_size: 3,
            crossover_rate: 0.9,
            per_gene_crossover_p: 0.5,
            mutation_rate: None,
            elite_count: 2,
            fitness_cv_folds: 3,
            seed: 0,
            mlp_cfg: MlpConfig::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadConfig(m));
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite_count ({}) must be below population_size ({})",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.fitness_cv_folds < 2 {
            return bad("fitness_cv_folds must be >= 2".into());
        }
        let rates = [
            ("crossover_rate", Some(self.crossover_rate)),
            ("per_gene_crossover_p", Some(self.per_gene_crossover_p)),
            ("mutation_rate", self.mutation_rate),
        ];
        for (name, rate) in rates {
            if let Some(r) = rate {
                if !(0.0..=1.0).contains(&r) {
                    return bad(format!("{name} must lie in [0,1], got {r}"));
                }
            }
        }
        self.mlp_cfg.validate()
    }

    pub fn mutation_rate_for(&self, d: usize) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / d.max(1) as f64)
    }
}

/// Random initial population. Individual 0 is always the full mask.
pub fn init_population(d: usize, cfg: &GaConfig) -> Result<Vec<FeatureMask>> {
    if d == 0 {
        return Err(Error::BadConfig("cannot select from zero features".into()));
    }
    cfg.validate()?;
    let mut rng = RandomStream::new(cfg.seed, INIT_STREAM);
    let mut population = Vec::with_capacity(cfg.population_size);
    population.push(FeatureMask::full(d));
    while population.len() < cfg.population_size {
        let bits = (0..d).map(|_| rng.bernoulli(0.5)).collect();
        population.push(FeatureMask::repaired(bits, &mut rng));
    }
    Ok(population)
}

/// Best of `tournament_size` draws with replacement; ties go to the lower index.
pub fn tournament_select(fitnesses: &[f64], cfg: &GaConfig, rng: &mut RandomStream) -> usize {
    assert!(!fitnesses.is_empty(), "tournament over an empty population");
    let mut best = rng.below(fitnesses.len());
    for _ in 1..cfg.tournament_size {
        let challenger = rng.below(fitnesses.len());
        if fitnesses[challenger] > fitnesses[best]
            || (fitnesses[challenger] == fitnesses[best] && challenger < best)
        {
            best = challenger;
        }
    }
    best
}

/// Uniform crossover. With probability `1 - crossover_rate` the children are
/// plain copies; otherwise each position is swapped between the children with
/// probability `per_gene_crossover_p`.
pub fn uniform_crossover(
    a: &FeatureMask,
    b: &FeatureMask,
    cfg: &GaConfig,
    rng: &mut RandomStream,
) -> Result<(FeatureMask, FeatureMask)> {
    if a.len() != b.len() {
        return Err(Error::BadShape(format!(
            "cannot cross masks of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if !rng.bernoulli(cfg.crossover_rate) {
        return Ok((a.clone(), b.clone()));
    }
    let mut c1 = a.bits().to_vec();
    let mut c2 = b.bits().to_vec();
    for i in 0..c1.len() {
        if rng.bernoulli(cfg.per_gene_crossover_p) {
            std::mem::swap(&mut c1[i], &mut c2[i]);
        }
    }
    // An empty child means the other holds the whole union (at least two bits,
    // since both parents are non-empty and the intersection is empty); swapping
    // one of those positions back keeps every position a permutation of the parents.
    if !c1.iter().any(|&b| b) {
        swap_one_back(&mut c1, &mut c2, rng);
    } else if !c2.iter().any(|&b| b) {
        swap_one_back(&mut c2, &mut c1, rng);
    }
    Ok((FeatureMask::new(c1)?, FeatureMask::new(c2)?))
}

fn swap_one_back(empty: &mut [bool], full: &mut [bool], rng: &mut RandomStream) {
    let set: Vec<usize> = (0..full.len()).filter(|&i| full[i]).collect();
    let i = set[rng.below(set.len())];
    empty[i] = true;
    full[i] = false;
}

/// Independent bit flips at the configured rate, repairing an empty result.
pub fn mutate(mask: &FeatureMask, cfg: &GaConfig, rng: &mut RandomStream) -> FeatureMask {
    let rate = cfg.mutation_rate_for(mask.len());
    let bits = mask
        .bits()
        .iter()
        .map(|&b| if rng.bernoulli(rate) { !b } else { b })
        .collect();
    FeatureMask::repaired(bits, rng)
}

#[derive(Clone, Debug)]
pub struct EvolveResult {
    pub best: FeatureMask,
    pub best_fitness: f64,
    pub log: Vec<GenerationLog>,
    pub evaluations: usize,
}

/// Runs the generational loop and returns the best mask ever evaluated.
pub fn evolve(ds: &Dataset, cfg: &GaConfig) -> Result<EvolveResult> {
    let evaluator = FitnessEvaluator::new(ds, cfg)?;
    evolve_with(&evaluator, cfg)
}

/// [`evolve`] against an existing evaluator, reusing (and extending) its cache.
pub fn evolve_with(evaluator: &FitnessEvaluator<'_>, cfg: &GaConfig) -> Result<EvolveResult> {
    let d = evaluator.dataset().n_features();
    let mut population = init_population(d, cfg)?;
    let mut scores = evaluator.evaluate_population(&population)?;
    let mut best = best_of(&population, &scores);
    let mut log = Vec::with_capacity(cfg.generations);

    for generation in 1..=cfg.generations {
        let mut rng = RandomStream::new(cfg.seed, GENERATION_STREAM_BASE + generation as u64);
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&i, &j| preference((&population[i], scores[i]), (&population[j], scores[j])));

        let mut next: Vec<FeatureMask> = ranked[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let p1 = tournament_select(&scores, cfg, &mut rng);
            let p2 = tournament_select(&scores, cfg, &mut rng);
            let (c1, c2) = uniform_crossover(&population[p1], &population[p2], cfg, &mut rng)?;
            next.push(mutate(&c1, cfg, &mut rng));
            if next.len() < cfg.population_size {
                next.push(mutate(&c2, cfg, &mut rng));
            }
        }
        population = next;
        scores = evaluator.evaluate_population(&population)?;
        let candidate = best_of(&population, &scores);
        if preference((&candidate.0, candidate.1), (&best.0, best.1)) == Ordering::Less {
            best = candidate;
        }
        log.push(GenerationLog {
            generation,
            best_fitness: best.1,
            mean_fitness: scores.iter().sum::<f64>() / scores.len() as f64,
            best_popcount: best.0.popcount(),
            evaluations: evaluator.evaluations(),
        });
    }
    Ok(EvolveResult {
        best: best.0,
        best_fitness: best.1,
        log,
        evaluations: evaluator.evaluations(),
    })
}

fn best_of(population: &[FeatureMask], scores: &[f64]) -> (FeatureMask, f64) {
    let i = (0..population.len())
        .min_by(|&i, &j| preference((&population[i], scores[i]), (&population[j], scores[j])))
        .expect("non-empty population");
    (population[i].clone(), scores[i])
}
