"""Hybrid shuffled-frog-leaping / genetic algorithm (SFGA).

Each generation the population is sorted best-first and dealt round-robin
into memeplexes. Inside every memeplex the worst frog is crossed with the
local best; if no child improves on it, with the global best; failing that it
is replaced by a fresh random frog. Then a fixed number of non-best members
per memeplex receive a one-point mutation. The memeplexes are merged back
(shuffled) into a single population for the next generation.

Random draws happen in a fixed order so a run is reproducible from its seed:
initial genes task-major (all frogs for task 0, then task 1, ...); then per
generation, the crossover draws of memeplex 0, 1, ..., followed by the
mutation draws of memeplex 0, 1, ...
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass

from qoscompose.errors import BadCutPoints, ConfigInvalid, InvalidReplacement
from qoscompose.model import CompositionProblem, Genome
from qoscompose.qos import Evaluator
from qoscompose.records import RunRecord, Tracker

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SfgaConfig:
    population_size: int = 50
    memeplex_count: int = 5
    generations: int = 100
    mutation_fraction: float = 0.3
    seed: int = 0
    stall_limit: int | None = None
    max_evaluations: int | None = None
    random_partition: bool = False

    def validate(self) -> "SfgaConfig":
        if self.population_size < 1 or self.memeplex_count < 1:
            raise ConfigInvalid("population_size and memeplex_count must be positive")
        if self.population_size % self.memeplex_count:
            raise ConfigInvalid(
                f"population_size {self.population_size} is not divisible by "
                f"memeplex_count {self.memeplex_count}"
            )
        if self.population_size // self.memeplex_count < 2:
            raise ConfigInvalid("each memeplex needs at least 2 frogs")
        if self.generations < 1:
            raise ConfigInvalid("generations must be positive")
        if not 0.0 <= self.mutation_fraction <= 1.0:
            raise ConfigInvalid("mutation_fraction must be in [0, 1]")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ConfigInvalid("stall_limit must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigInvalid("max_evaluations must be positive")
        return self

    @property
    def memeplex_size(self) -> int:
        return self.population_size // self.memeplex_count


@dataclass(frozen=True, slots=True)
class EvaluatedFrog:
    genome: Genome
    fitness: float


@dataclass(frozen=True)
class Memeplex:
    """Population indices of one memeplex, best first."""

    members: tuple[int, ...]
    best_index: int
    worst_index: int


def random_genome(sizes, rng: random.Random) -> Genome:
    return tuple(rng.randrange(n) for n in sizes)


def init_population(
    problem: CompositionProblem,
    config: SfgaConfig,
    rng: random.Random | None = None,
    evaluator: Evaluator | None = None,
) -> list[EvaluatedFrog]:
    config.validate()
    rng = rng if rng is not None else random.Random(config.seed)
    evaluator = evaluator if evaluator is not None else Evaluator(problem)
    n = config.population_size
    columns = [[rng.randrange(size) for _ in range(n)] for size in problem.pool_sizes]
    genomes = [tuple(col[f] for col in columns) for f in range(n)]
    return [EvaluatedFrog(g, evaluator(g)) for g in genomes]


def sort_and_partition(
    population: list[EvaluatedFrog],
    config: SfgaConfig,
    rng: random.Random | None = None,
) -> list[Memeplex]:
    """Sort best-first (stable on index) and deal frogs into memeplexes.

    Sorted position ``p`` goes to memeplex ``p % m``. With
    ``config.random_partition`` the memeplex labels are shuffled instead,
    keeping sizes equal; that mode consumes ``rng``.
    """
    m = config.memeplex_count
    order = sorted(range(len(population)), key=lambda i: population[i].fitness)
    labels = [p % m for p in range(len(order))]
    if config.random_partition:
        if rng is None:
            raise ConfigInvalid("random_partition needs a random generator")
        rng.shuffle(labels)
    groups: list[list[int]] = [[] for _ in range(m)]
    for idx, lab in zip(order, labels):
        groups[lab].append(idx)
    return [Memeplex(tuple(g), g[0], g[-1]) for g in groups]


def two_point_crossover(parent1: Genome, parent2: Genome, r1: int, r2: int) -> tuple[Genome, Genome]:
    """Swap the inclusive gene interval ``[r1, r2]`` between two parents."""
    n = len(parent1)
    if len(parent2) != n:
        raise BadCutPoints("parents differ in length")
    if not (0 <= r1 <= r2 < n):
        raise BadCutPoints(f"cut points ({r1}, {r2}) invalid for length {n}")
    hi = r2 + 1
    c1 = parent1[:r1] + parent2[r1:hi] + parent1[hi:]
    c2 = parent2[:r1] + parent1[r1:hi] + parent2[hi:]
    return tuple(c1), tuple(c2)


def one_point_mutation(genome: Genome, position: int, replacement: int, pool_size: int) -> Genome:
    if not 0 <= position < len(genome):
        raise InvalidReplacement(f"position {position} outside genome of length {len(genome)}")
    if not 0 <= replacement < pool_size:
        raise InvalidReplacement(f"candidate {replacement} outside [0, {pool_size})")
    g = list(genome)
    g[position] = replacement
    return tuple(g)


def draw_cut_points(length: int, rng: random.Random) -> tuple[int, int]:
    a = rng.randrange(length)
    b = rng.randrange(length)
    return (a, b) if a <= b else (b, a)


def _cross(parent: Genome, worst: Genome, rng: random.Random, evaluator: Evaluator) -> EvaluatedFrog:
    r1, r2 = draw_cut_points(len(worst), rng)
    c1, c2 = two_point_crossover(parent, worst, r1, r2)
    f1 = evaluator(c1)
    f2 = evaluator(c2)
    return EvaluatedFrog(c1, f1) if f1 <= f2 else EvaluatedFrog(c2, f2)


def memeplex_crossover_step(
    memeplex: Memeplex,
    population: list[EvaluatedFrog],
    global_best: EvaluatedFrog,
    rng: random.Random,
    evaluator: Evaluator,
) -> list[EvaluatedFrog]:
    """Improve the memeplex's worst frog in place; returns ``population``.

    The better child of (local best x worst) replaces the worst if strictly
    fitter; otherwise the better child of (global best x worst) is tried the
    same way; otherwise the worst becomes a fresh random frog regardless of
    its fitness.
    """
    w = memeplex.worst_index
    worst = population[w]
    for parent in (population[memeplex.best_index], global_best):
        child = _cross(parent.genome, worst.genome, rng, evaluator)
        if child.fitness < worst.fitness:
            population[w] = child
            return population
    g = random_genome(evaluator.sizes, rng)
    population[w] = EvaluatedFrog(g, evaluator(g))
    return population


def mutation_count(size: int, fraction: float) -> int:
    # guard against 0.3 * 10 style float noise on either side of an integer
    return int(math.floor(size * fraction + 1e-9))


def memeplex_mutation_step(
    memeplex: Memeplex,
    population: list[EvaluatedFrog],
    mutation_fraction: float,
    rng: random.Random,
    evaluator: Evaluator,
) -> list[EvaluatedFrog]:
    """Apply ``floor(size * fraction)`` one-point mutations to non-best members.

    The best member is identified on current fitness (the crossover step may
    have changed it). Mutants replace their originals unconditionally.
    """
    members = memeplex.members
    best = min(members, key=lambda i: population[i].fitness)
    pool = [i for i in members if i != best]
    sizes = evaluator.sizes
    for _ in range(mutation_count(len(members), mutation_fraction)):
        idx = pool[rng.randrange(len(pool))]
        genome = population[idx].genome
        pos = rng.randrange(len(genome))
        n = sizes[pos]
        cur = genome[pos]
        if n > 1:
            r = rng.randrange(n - 1)
            if r >= cur:
                r += 1
        else:
            r = cur
        mutant = one_point_mutation(genome, pos, r, n)
        population[idx] = EvaluatedFrog(mutant, evaluator(mutant))
    return population


def run_sfga(
    problem: CompositionProblem,
    config: SfgaConfig,
    instance: str = "",
    evaluator: Evaluator | None = None,
) -> RunRecord:
    config.validate()
    rng = random.Random(config.seed)
    evaluator = evaluator if evaluator is not None else Evaluator(problem)
    tracker = Tracker(evaluator)

    population = init_population(problem, config, rng, evaluator)
    for frog in population:
        tracker.offer(frog.genome, frog.fitness)
    tracker.end_generation()

    generation = 0
    while not tracker.should_stop(
        generation, config.generations, config.stall_limit, config.max_evaluations
    ):
        memeplexes = sort_and_partition(population, config, rng)
        for mp in memeplexes:
            gbest = EvaluatedFrog(tracker.best_genome, tracker.best_fitness)
            memeplex_crossover_step(mp, population, gbest, rng, evaluator)
            frog = population[mp.worst_index]
            tracker.offer(frog.genome, frog.fitness)
        for mp in memeplexes:
            memeplex_mutation_step(mp, population, config.mutation_fraction, rng, evaluator)
            for i in mp.members:
                tracker.offer(population[i].genome, population[i].fitness)
        # shuffle: memeplexes merged back in memeplex order
        population = [population[i] for mp in memeplexes for i in mp.members]
        generation += 1
        tracker.end_generation()

    return tracker.finish("sfga", instance or problem.name, config.seed, asdict(config))
