"""Comparison optimizers and the exhaustive oracle.

All of them share the :class:`~qoscompose.records.RunRecord` contract with
SFGA: seeded determinism, valid genomes only, and a best-so-far trace that
never increases. Knob defaults are textbook values.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass

from qoscompose.errors import ConfigInvalid, TooLarge
from qoscompose.model import CompositionProblem, Genome
from qoscompose.qos import Evaluator
from qoscompose.records import RunRecord, Tracker
from qoscompose.sfga import (
    MAX_SEED,
    draw_cut_points,
    one_point_mutation,
    random_genome,
    two_point_crossover,
)

TAGS = ("ga", "pso", "ca", "gapso", "brute")


@dataclass(frozen=True)
class BaselineConfig:
    algorithm: str = "ga"
    population_size: int = 50
    generations: int = 100
    seed: int = 0
    stall_limit: int | None = None
    max_evaluations: int | None = None
    # GA
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    tournament_size: int = 2
    # PSO
    inertia: float = 0.7
    cognitive: float = 1.4
    social: float = 1.4
    # CA
    acceptance_fraction: float = 0.2
    influence_rate: float | None = None  # per-gene; None means 1/m
    exploration_rate: float = 0.1

    def validate(self) -> "BaselineConfig":
        if self.algorithm not in TAGS:
            raise ConfigInvalid(f"unknown algorithm {self.algorithm!r}")
        if self.population_size < 2:
            raise ConfigInvalid("population_size must be at least 2")
        if self.generations < 1:
            raise ConfigInvalid("generations must be positive")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        rates = {
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "acceptance_fraction": self.acceptance_fraction,
            "exploration_rate": self.exploration_rate,
        }
        if self.influence_rate is not None:
            rates["influence_rate"] = self.influence_rate
        for name, v in rates.items():
            if not 0.0 <= v <= 1.0:
                raise ConfigInvalid(f"{name} must be in [0, 1]")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigInvalid("tournament_size must be in [1, population_size]")
        if min(self.inertia, self.cognitive, self.social) < 0:
            raise ConfigInvalid("PSO coefficients must be non-negative")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ConfigInvalid("stall_limit must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigInvalid("max_evaluations must be positive")
        return self


def _stop(tracker: Tracker, generation: int, config) -> bool:
    return tracker.should_stop(
        generation, config.generations, config.stall_limit, config.max_evaluations
    )


def _setup(problem, config, tag, evaluator):
    config.validate()
    if config.algorithm != tag:
        config = _replace(config, algorithm=tag)
    evaluator = evaluator if evaluator is not None else Evaluator(problem)
    return config, random.Random(config.seed), evaluator, Tracker(evaluator)


def _replace(config, **kw):
    d = asdict(config)
    d.update(kw)
    return type(config)(**d)


def _init(sizes, n, rng, evaluator, tracker):
    genomes = [random_genome(sizes, rng) for _ in range(n)]
    fits = [evaluator(g) for g in genomes]
    for g, f in zip(genomes, fits):
        tracker.offer(g, f)
    tracker.end_generation()
    return genomes, fits


# -- GA ----------------------------------------------------------------------


def _tournament(fits, k, rng) -> int:
    best = rng.randrange(len(fits))
    for _ in range(k - 1):
        c = rng.randrange(len(fits))
        if fits[c] < fits[best]:
            best = c
    return best


def _random_mutation(genome: Genome, sizes, rng) -> Genome:
    pos = rng.randrange(len(genome))
    n = sizes[pos]
    if n == 1:
        return genome
    r = rng.randrange(n - 1)
    if r >= genome[pos]:
        r += 1
    return one_point_mutation(genome, pos, r, n)


def _ga_generation(genomes, fits, config, sizes, rng, evaluator):
    """One generational step with tournament selection and a single elite."""
    n = len(genomes)
    elite = min(range(n), key=fits.__getitem__)
    new_g = [genomes[elite]]
    new_f = [fits[elite]]
    while len(new_g) < n:
        a = genomes[_tournament(fits, config.tournament_size, rng)]
        b = genomes[_tournament(fits, config.tournament_size, rng)]
        if rng.random() < config.crossover_rate:
            r1, r2 = draw_cut_points(len(a), rng)
            a, b = two_point_crossover(a, b, r1, r2)
        for child in (a, b):
            if len(new_g) == n:
                break
            if rng.random() < config.mutation_rate:
                child = _random_mutation(child, sizes, rng)
            new_g.append(child)
            new_f.append(evaluator(child))
    return new_g, new_f


def run_ga(problem: CompositionProblem, config: BaselineConfig, instance: str = "", evaluator=None) -> RunRecord:
    config, rng, evaluator, tracker = _setup(problem, config, "ga", evaluator)
    sizes = evaluator.sizes
    genomes, fits = _init(sizes, config.population_size, rng, evaluator, tracker)
    gen = 0
    while not _stop(tracker, gen, config):
        genomes, fits = _ga_generation(genomes, fits, config, sizes, rng, evaluator)
        for g, f in zip(genomes, fits):
            tracker.offer(g, f)
        gen += 1
        tracker.end_generation()
    return tracker.finish("ga", instance or problem.name, config.seed, asdict(config))


# -- PSO ---------------------------------------------------------------------


def decode_position(x: list[float], sizes) -> Genome:
    """Round each coordinate to the nearest candidate index, clamped into range."""
    out = []
    for xi, n in zip(x, sizes):
        k = int(math.floor(xi + 0.5))
        out.append(0 if k < 0 else n - 1 if k >= n else k)
    return tuple(out)


class _Swarm:
    """Real-valued particle state over a discrete selection problem."""

    def __init__(self, genomes, fits, sizes):
        self.sizes = sizes
        self.vmax = [max(1.0, 0.5 * (n - 1)) for n in sizes]
        self.x = [[float(v) for v in g] for g in genomes]
        self.v = [[0.0] * len(sizes) for _ in genomes]
        self.genomes = list(genomes)
        self.fits = list(fits)
        self.pbest = [list(p) for p in self.x]
        self.pbest_f = list(fits)

    def set_particle(self, i, genome, f):
        """Place a GA offspring in slot ``i``; it starts at rest."""
        self.genomes[i] = genome
        self.fits[i] = f
        self.x[i] = [float(v) for v in genome]
        self.v[i] = [0.0] * len(genome)
        if f < self.pbest_f[i]:
            self.pbest[i] = list(self.x[i])
            self.pbest_f[i] = f

    def step(self, gbest: Genome, config, rng, evaluator):
        w, c1, c2 = config.inertia, config.cognitive, config.social
        sizes, vmax = self.sizes, self.vmax
        for i in range(len(self.x)):
            x, v, pb = self.x[i], self.v[i], self.pbest[i]
            for d in range(len(sizes)):
                r1 = rng.random()
                r2 = rng.random()
                vd = w * v[d] + c1 * r1 * (pb[d] - x[d]) + c2 * r2 * (gbest[d] - x[d])
                lim = vmax[d]
                vd = -lim if vd < -lim else lim if vd > lim else vd
                xd = x[d] + vd
                hi = sizes[d] - 1
                if xd < 0.0:
                    xd = 0.0
                elif xd > hi:
                    xd = float(hi)
                v[d] = vd
                x[d] = xd
            g = decode_position(x, sizes)
            f = evaluator(g)
            self.genomes[i] = g
            self.fits[i] = f
            if f < self.pbest_f[i]:
                self.pbest[i] = list(x)
                self.pbest_f[i] = f


def run_pso(problem: CompositionProblem, config: BaselineConfig, instance: str = "", evaluator=None) -> RunRecord:
    config, rng, evaluator, tracker = _setup(problem, config, "pso", evaluator)
    sizes = evaluator.sizes
    genomes, fits = _init(sizes, config.population_size, rng, evaluator, tracker)
    swarm = _Swarm(genomes, fits, sizes)
    gen = 0
    while not _stop(tracker, gen, config):
        swarm.step(tracker.best_genome, config, rng, evaluator)
        for g, f in zip(swarm.genomes, swarm.fits):
            tracker.offer(g, f)
        gen += 1
        tracker.end_generation()
    return tracker.finish("pso", instance or problem.name, config.seed, asdict(config))


# -- Cultural algorithm ----------------------------------------------------


@dataclass(frozen=True)
class BeliefSpace:
    situational: Genome
    situational_fitness: float
    normative: tuple[tuple[int, int], ...]


def update_beliefs(genomes, fits, acceptance_fraction: float) -> BeliefSpace:
    """Accept the top fraction of the population and derive the belief space.

    Normative knowledge is the per-gene ``[lo, hi]`` index interval spanned by
    the accepted individuals, so it is always inside the valid range.
    """
    n = len(genomes)
    k = max(1, int(round(acceptance_fraction * n)))
    order = sorted(range(n), key=fits.__getitem__)[:k]
    accepted = [genomes[i] for i in order]
    normative = tuple(
        (min(g[d] for g in accepted), max(g[d] for g in accepted))
        for d in range(len(genomes[0]))
    )
    return BeliefSpace(genomes[order[0]], fits[order[0]], normative)


def _influence(parent: Genome, beliefs: BeliefSpace, sizes, p_gene, p_explore, rng) -> Genome:
    child = list(parent)
    for d, (lo, hi) in enumerate(beliefs.normative):
        if rng.random() < p_gene:
            if rng.random() < p_explore:
                child[d] = rng.randrange(sizes[d])
            else:
                child[d] = rng.randint(lo, hi)
    return tuple(child)


def run_ca(problem: CompositionProblem, config: BaselineConfig, instance: str = "", evaluator=None) -> RunRecord:
    config, rng, evaluator, tracker = _setup(problem, config, "ca", evaluator)
    sizes = evaluator.sizes
    n = config.population_size
    p_gene = config.influence_rate if config.influence_rate is not None else 1.0 / len(sizes)
    genomes, fits = _init(sizes, n, rng, evaluator, tracker)
    gen = 0
    while not _stop(tracker, gen, config):
        beliefs = update_beliefs(genomes, fits, config.acceptance_fraction)
        kids = [
            _influence(g, beliefs, sizes, p_gene, config.exploration_rate, rng) for g in genomes
        ]
        kid_f = [evaluator(k) for k in kids]
        # (mu + lambda) truncation, stable on index
        pool_g = genomes + kids
        pool_f = fits + kid_f
        keep = sorted(range(2 * n), key=pool_f.__getitem__)[:n]
        genomes = [pool_g[i] for i in keep]
        fits = [pool_f[i] for i in keep]
        for g, f in zip(genomes, fits):
            tracker.offer(g, f)
        gen += 1
        tracker.end_generation()
    return tracker.finish("ca", instance or problem.name, config.seed, asdict(config))


# -- GA/PSO hybrid ---------------------------------------------------------


def run_gapso(problem: CompositionProblem, config: BaselineConfig, instance: str = "", evaluator=None) -> RunRecord:
    """Alternate a GA generation (even) and a PSO generation (odd) on one swarm."""
    config, rng, evaluator, tracker = _setup(problem, config, "gapso", evaluator)
    sizes = evaluator.sizes
    genomes, fits = _init(sizes, config.population_size, rng, evaluator, tracker)
    swarm = _Swarm(genomes, fits, sizes)
    gen = 0
    while not _stop(tracker, gen, config):
        if gen % 2 == 0:
            new_g, new_f = _ga_generation(swarm.genomes, swarm.fits, config, sizes, rng, evaluator)
            for i, (g, f) in enumerate(zip(new_g, new_f)):
                swarm.set_particle(i, g, f)
        else:
            swarm.step(tracker.best_genome, config, rng, evaluator)
        for g, f in zip(swarm.genomes, swarm.fits):
            tracker.offer(g, f)
        gen += 1
        tracker.end_generation()
    return tracker.finish("gapso", instance or problem.name, config.seed, asdict(config))


# -- exhaustive oracle ------------------------------------------------------


def brute_force_optimum(
    problem: CompositionProblem, combo_cap: int = 10**6, reverse: bool = False
) -> tuple[Genome, float, int]:
    """Enumerate every selection in lexicographic order.

    Returns the first genome reaching the minimum fitness, that fitness, and
    the number of genomes enumerated. ``reverse`` walks the order backwards.
    """
    total = problem.combinations
    if total > combo_cap:
        raise TooLarge(total, combo_cap)
    ev = Evaluator(problem, cache=False)
    ranges = [range(n) for n in problem.pool_sizes]
    if reverse:
        ranges = [r[::-1] for r in ranges]
    best_g: Genome | None = None
    best_f = math.inf
    count = 0
    for g in itertools.product(*ranges):
        count += 1
        f = ev(g)
        if f < best_f:
            best_f, best_g = f, g
    return best_g, best_f, count


RUNNERS = {
    "ga": run_ga,
    "pso": run_pso,
    "ca": run_ca,
    "gapso": run_gapso,
}
