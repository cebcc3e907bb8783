"""Archive-based genetic loop: selection, mutation, crossover, termination.

Each generation draws N individuals from the rank-weighted archive,
mutates and evaluates them independently (thread-parallel; per-slot RNG
streams keep the result identical for any worker count), crosses C pairs
from the freshly evaluated pool plus the archive, and offers all N+C
candidates back to the archive.  The loop stops after `generations`
rounds or once the archive's best entry is unchanged for `stall_limit`
consecutive generations.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .charts import detect_turning_points, extract_charts
from .errors import EmptyArchiveError
from .fitness import FitnessWeights, evaluate_labeling
from .labeling import Labeling, smooth_boundaries
from .mutations import random_mutation, repair_high_valency_corner, repair_opposite_boundary

# Reserved per-generation stream slots (mutation slots use 0..N-1).
_SELECTION_SLOT = 1_000_000
_CROSSOVER_SLOT = 1_000_001


@dataclass
class GAConfig:
    population: int = 100       # individuals mutated per generation
    crossovers: int = 10        # crossover children per generation
    generations: int = 40       # hard generation cap
    stall_limit: int = 3        # stop after this many unchanged-best generations
    archive_capacity: int = 100
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    seed: int = 0
    threads: int = 1
    graphcut_ratio: float = 3.0  # chart-removal mutations reuse this ratio

    def __post_init__(self):
        if self.population < 1 or self.crossovers < 0 or self.generations < 1:
            raise ValueError("population >= 1, crossovers >= 0, generations >= 1")


class Individual:
    """A labeling with its fitness and lazily cached chart structure."""

    __slots__ = ("labeling", "fitness", "birth_gen", "lineage", "_graph", "_tps")

    def __init__(self, labeling, fitness, birth_gen, lineage):
        self.labeling = labeling
        self.fitness = fitness
        self.birth_gen = birth_gen
        self.lineage = lineage
        self._graph = None
        self._tps = None

    def graph(self, mesh):
        if self._graph is None:
            self._graph = extract_charts(mesh, self.labeling)
        return self._graph

    def turning_points(self, mesh):
        if self._tps is None:
            self._tps = detect_turning_points(mesh, self.graph(mesh))
        return self._tps

    def digest(self):
        return self.labeling.digest()


class Archive:
    """Bounded population, fitness-ascending, deduplicated by label digest.

    A candidate enters while there is room, or by strictly beating the
    worst entry, which is then discarded.  Ties in total break by
    insertion order (older first).
    """

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = []
        self._digests = set()
        self._counter = 0

    def __len__(self):
        return len(self.entries)

    @property
    def best(self):
        return self.entries[0][2]

    @property
    def worst_total(self):
        return self.entries[-1][0]

    def individuals(self):
        return [e[2] for e in self.entries]

    def try_insert(self, individual):
        digest = individual.digest()
        if digest in self._digests:
            return False
        total = individual.fitness.total
        if len(self.entries) >= self.capacity:
            if total >= self.worst_total:
                return False
            _, _, dropped = self.entries.pop()
            self._digests.discard(dropped.labeling.digest())
        key = (total, self._counter)
        self._counter += 1
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid][:2] < key:
                lo = mid + 1
            else:
                hi = mid
        self.entries.insert(lo, (total, key[1], individual))
        self._digests.add(digest)
        return True


def rank_draw(n, rng):
    """Rank index in 0..n-1 with P(rank i) = (n - i) / (1 + ... + n)."""
    denom = n * (n + 1) // 2
    u = rng.random() * denom
    acc = 0.0
    for i in range(n):
        acc += n - i
        if u < acc:
            return i
    return n - 1


def select_from_archive(archive, rng):
    """Stochastic rank selection favoring the best entries."""
    if len(archive) == 0:
        raise EmptyArchiveError("cannot select from an empty archive")
    return archive.entries[rank_draw(len(archive), rng)][2]


def crossover(parent1, parent2, gen):
    """Blend two labelings, keeping the most recently changed label.

    Where parents agree the child copies the label with the newer stamp of
    the two; where they conflict the strictly larger stamp wins and stamp
    ties fall to the first parent.
    """
    l1, s1 = parent1.labeling.labels, parent1.labeling.stamps
    l2, s2 = parent2.labeling.labels, parent2.labeling.stamps
    take2 = (l1 != l2) & (s2 > s1)
    labels = np.where(take2, l2, l1)
    agree = l1 == l2
    stamps = np.where(agree, np.maximum(s1, s2), np.where(take2, s2, s1))
    return Labeling(labels, stamps)


def _stream(seed, gen, slot):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(gen, slot)))


def _make_individual(mesh, labeling, weights, gen, lineage):
    report = evaluate_labeling(mesh, labeling, weights)
    return Individual(report.smoothed, report.fitness, gen, lineage)


def run_generation(archive, cfg, gen, mesh, lineage_base=0):
    """One generation; returns the number of candidates the archive accepted."""
    n = cfg.population
    selection_rng = _stream(cfg.seed, gen, _SELECTION_SLOT)
    parents = [select_from_archive(archive, selection_rng) for _ in range(n)]

    def mutate_slot(slot):
        parent = parents[slot]
        rng = _stream(cfg.seed, gen, slot)
        mutated = random_mutation(
            mesh, parent.labeling, parent.graph(mesh),
            parent.turning_points(mesh), rng, gen, cfg.graphcut_ratio,
        )
        mutated = smooth_boundaries(mesh, mutated, gen)
        return _make_individual(mesh, mutated, cfg.weights, gen, lineage_base + slot)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            mutants = list(pool.map(mutate_slot, range(n)))
    else:
        mutants = [mutate_slot(slot) for slot in range(n)]

    crossover_rng = _stream(cfg.seed, gen, _CROSSOVER_SLOT)
    pool_inds = mutants + archive.individuals()
    ranked = sorted(range(len(pool_inds)), key=lambda i: (pool_inds[i].fitness.total, i))
    children = []
    for c in range(cfg.crossovers):
        if len(pool_inds) < 2:
            break
        i = rank_draw(len(ranked), crossover_rng)
        j = i
        while j == i:
            j = rank_draw(len(ranked), crossover_rng)
        child_lab = crossover(pool_inds[ranked[i]], pool_inds[ranked[j]], gen)
        child_lab = smooth_boundaries(mesh, child_lab, gen)
        children.append(
            _make_individual(mesh, child_lab, cfg.weights, gen, lineage_base + n + c)
        )

    accepted = 0
    for ind in mutants + children:
        if archive.try_insert(ind):
            accepted += 1
    return accepted


def run_evolution(mesh, init, cfg, on_generation=None):
    """Full optimization: repairs, seeded archive, generation loop, repairs.

    Returns (best individual, history) where history rows are dicts with
    generation, best_total, the four fitness terms, and archive_size.
    """
    weights = cfg.weights
    lab = repair_opposite_boundary(mesh, init, weights, gen=0)
    lab = repair_high_valency_corner(mesh, lab, weights, gen=0)
    archive = Archive(cfg.archive_capacity)
    archive.try_insert(_make_individual(mesh, lab, weights, 0, 0))

    history = []
    stall = 0
    generations_run = 0
    for gen in range(1, cfg.generations + 1):
        before = archive.best.digest()
        run_generation(archive, cfg, gen, mesh, lineage_base=gen * 10_000)
        generations_run = gen
        best = archive.best
        history.append(
            {
                "generation": gen,
                "best_total": best.fitness.total,
                "v_p": best.fitness.validity,
                "e_w": best.fitness.workability,
                "e_f": best.fitness.fidelity,
                "e_c": best.fitness.compactness,
                "archive_size": len(archive),
            }
        )
        if on_generation is not None:
            on_generation(history[-1])
        stall = stall + 1 if archive.best.digest() == before else 0
        if stall >= cfg.stall_limit:
            break

    final_gen = generations_run + 1
    lab = repair_opposite_boundary(mesh, archive.best.labeling, weights, gen=final_gen)
    lab = repair_high_valency_corner(mesh, lab, weights, gen=final_gen)
    best = _make_individual(mesh, lab, weights, final_gen, -1)
    return best, history
