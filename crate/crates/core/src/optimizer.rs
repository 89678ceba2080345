//! Search over linkage-method combinations: exhaustive enumeration when the
//! space fits the evaluation budget, a generational genetic algorithm
//! otherwise.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::seed::rng;
use crate::types::MethodId;

const N_METHODS: usize = MethodId::ALL.len();

/// One linkage method per gene. Ordered lexicographically by method index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome(pub Vec<MethodId>);

impl Genome {
    pub fn genes(&self) -> &[MethodId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `index`-th genome of length `len` in lexicographic order.
    pub fn from_rank(mut index: usize, len: usize) -> Self {
        let mut genes = vec![MethodId::Single; len];
        for g in genes.iter_mut().rev() {
            *g = MethodId::ALL[index % N_METHODS];
            index /= N_METHODS;
        }
        Genome(genes)
    }

    fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Genome(
            (0..len)
                .map(|_| MethodId::ALL[rng.random_range(0..N_METHODS)])
                .collect(),
        )
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|m| m.name()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    /// Per-gene probability of resampling the method.
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 20,
            generations: 10,
            tournament: 3,
            mutation_rate: 0.1,
            elitism: 1,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

impl GaParams {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("GA population must be at least 2"));
        }
        if self.elitism >= self.population {
            return Err(Error::config(
                "GA elitism must be below the population size",
            ));
        }
        if self.generations == 0 || self.tournament == 0 {
            return Err(Error::config(
                "GA generations and tournament size must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::config("GA mutation rate must lie in [0,1]"));
        }
        Ok(())
    }

    /// Total number of fitness evaluations the GA may spend.
    pub fn budget(&self) -> usize {
        self.population.saturating_mul(self.generations)
    }
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: Genome,
    pub fitness: f64,
    /// Best fitness seen so far, after each generation (one entry for the
    /// exhaustive path).
    pub history: Vec<f64>,
    /// Distinct genomes evaluated.
    pub evaluations: usize,
    pub exhaustive: bool,
}

fn sanitize(genome: &Genome, f: f64) -> f64 {
    if f.is_nan() {
        log::warn!("fitness of {genome} is NaN; scoring it as -inf");
        f64::NEG_INFINITY
    } else {
        f
    }
}

/// Higher fitness first, then the lexicographically smaller genome.
fn rank(a: (&Genome, f64), b: (&Genome, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Size of the search space, if it fits in `usize`.
pub fn space_size(genome_len: usize) -> Option<usize> {
    N_METHODS.checked_pow(u32::try_from(genome_len).ok()?)
}

/// Maximises `fitness` over genomes of length `genome_len`.
pub fn evolve<F>(genome_len: usize, fitness: F, params: &GaParams) -> Result<Evolution>
where
    F: Fn(&Genome) -> f64 + Sync + Send,
{
    if genome_len == 0 {
        return Err(Error::config("genome length must be positive"));
    }
    params.validate()?;
    match space_size(genome_len) {
        Some(size) if size <= params.budget() => {
            Ok(exhaustive(genome_len, size, &fitness, params.exec))
        }
        _ => Ok(genetic(genome_len, &fitness, params)),
    }
}

fn exhaustive<F>(genome_len: usize, size: usize, fitness: &F, exec: Execution) -> Evolution
where
    F: Fn(&Genome) -> f64 + Sync + Send,
{
    let scored = par::map_range(exec, size, |i| {
        let g = Genome::from_rank(i, genome_len);
        let f = sanitize(&g, fitness(&g));
        (g, f)
    });
    let (best, fit) = scored
        .iter()
        .min_by(|a, b| rank((&a.0, a.1), (&b.0, b.1)))
        .cloned()
        .expect("non-empty space");
    Evolution {
        best,
        fitness: fit,
        history: vec![fit],
        evaluations: size,
        exhaustive: true,
    }
}

fn genetic<F>(genome_len: usize, fitness: &F, p: &GaParams) -> Evolution
where
    F: Fn(&Genome) -> f64 + Sync + Send,
{
    let mut rng = rng(p.seed);
    let mut cache: HashMap<Genome, f64> = HashMap::new();
    let mut pop: Vec<Genome> = (0..p.population)
        .map(|_| Genome::random(genome_len, &mut rng))
        .collect();
    let mut best: Option<(Genome, f64)> = None;
    let mut history = Vec::with_capacity(p.generations);

    for generation in 0..p.generations {
        let mut fresh: Vec<Genome> = pop
            .iter()
            .filter(|g| !cache.contains_key(*g))
            .cloned()
            .collect();
        fresh.sort();
        fresh.dedup();
        let scores = par::map_slice(p.exec, &fresh, |g| sanitize(g, fitness(g)));
        cache.extend(fresh.into_iter().zip(scores));

        let scored: Vec<(&Genome, f64)> = pop.iter().map(|g| (g, cache[g])).collect();
        let gen_best = scored
            .iter()
            .copied()
            .min_by(|a, b| rank(*a, *b))
            .expect("population");
        let improved = match &best {
            None => true,
            Some((g, f)) => rank(gen_best, (g, *f)) == Ordering::Less,
        };
        if improved {
            best = Some((gen_best.0.clone(), gen_best.1));
        }
        history.push(best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1));
        if generation + 1 == p.generations {
            break;
        }

        pop = breed(&pop, &scored, p, &mut rng);
    }

    let (best, fitness) = best.expect("at least one generation");
    Evolution {
        best,
        fitness,
        history,
        evaluations: cache.len(),
        exhaustive: false,
    }
}

/// Elites, then tournament-selected parents recombined by uniform crossover
/// and per-gene mutation.
fn breed(
    pop: &[Genome],
    scored: &[(&Genome, f64)],
    p: &GaParams,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Genome> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| rank(scored[a], scored[b]));
    let mut next: Vec<Genome> = order[..p.elitism].iter().map(|&i| pop[i].clone()).collect();
    let tournament = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
        (0..p.tournament)
            .map(|_| rng.random_range(0..pop.len()))
            .min_by(|&a, &b| rank(scored[a], scored[b]))
            .expect("tournament size >= 1")
    };
    while next.len() < p.population {
        let a = tournament(rng);
        let b = tournament(rng);
        let mut child: Vec<MethodId> = pop[a]
            .genes()
            .iter()
            .zip(pop[b].genes())
            .map(|(&x, &y)| if rng.random_bool(0.5) { x } else { y })
            .collect();
        for gene in child.iter_mut() {
            if rng.random::<f64>() < p.mutation_rate {
                *gene = MethodId::ALL[rng.random_range(0..N_METHODS)];
            }
        }
        next.push(Genome(child));
    }
    next
}
