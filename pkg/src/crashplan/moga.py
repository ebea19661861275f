"""Multi-objective genetic algorithm: random topological encoding,
tournament selection, string-swap crossover, two-point mutation,
per-activity hill climbing, elitism, and duplicate/feasibility control.

NSGA-II (nsga2 module) reuses the operators and feasibility machinery
defined here so the two solvers differ only in their algorithmic core.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadParams, InitTimeout
from .evaluate import Chromosome, ObjectiveVector, evaluate
from .instance import ProjectInstance, instance_hash
from .pareto import ParetoArchive, nondominated_sort, pareto_filter
from .reporting import FrontReport

#: tuned defaults (optimum levels of the L25 screening)
DEFAULT_ELITISM = 0.05
DEFAULT_HILL_CLIMB = 0.8
DEFAULT_MUTATION = 0.6
DEFAULT_CROSSOVER = 0.8
DEFAULT_ITERATIONS = 2000
DEFAULT_POP_SIZE = 100


@dataclass(frozen=True)
class MogaParams:
    seed: int
    pop_size: int = DEFAULT_POP_SIZE
    iterations: int = DEFAULT_ITERATIONS
    crossover_rate: float = DEFAULT_CROSSOVER
    mutation_rate: float = DEFAULT_MUTATION
    hill_climb_rate: float = DEFAULT_HILL_CLIMB
    elitism_rate: float = DEFAULT_ELITISM

    def validate(self) -> None:
        if self.pop_size < 2:
            raise BadParams("pop_size must be >= 2")
        if self.iterations < 0:
            raise BadParams("iterations must be >= 0")
        for name in ("crossover_rate", "mutation_rate", "hill_climb_rate",
                     "elitism_rate"):
            value = getattr(self, name)
            if not (0 <= value <= 1):
                raise BadParams(f"{name} must be in [0, 1], got {value}")


def frac_count(rate: float, pop_size: int) -> int:
    """ceil(rate * pop_size) with a guard against float fuzz (0.05*100 -> 5)."""
    return math.ceil(rate * pop_size - 1e-9)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Pre-split RNG stream: one generator per (seed, spawn-key) pair."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=key)))


class Evaluator:
    """Counts evaluations and archives every feasible one.

    Order strings repeat heavily across a run, so each one is fully
    validated the first time it appears and trusted afterwards.
    """

    def __init__(self, inst: ProjectInstance, archive: ParetoArchive | None = None,
                 literal_eq15: bool = False):
        self.inst = inst
        self.archive = archive
        self.literal_eq15 = literal_eq15
        self.count = 0
        self._checked_orders: set[tuple[int, ...]] = set()

    def __call__(self, chrom: Chromosome):
        self.count += 1
        trusted = chrom.order in self._checked_orders
        obj, rep = evaluate(self.inst, chrom, literal_eq15=self.literal_eq15,
                            _trusted_order=trusted)
        if not trusted:
            self._checked_orders.add(chrom.order)
        if self.archive is not None and rep.valid_number == 3:
            self.archive.add(obj, chrom)
        return obj, rep


# ---------------------------------------------------------------------------
# Encoding operators

def random_topological_order(inst: ProjectInstance,
                             rng: np.random.Generator) -> tuple[int, ...]:
    """Random linear extension by uniform choice among ready activities."""
    indeg = [0] * inst.n
    for act in inst.activities:
        for h in act.successors:
            indeg[h - 1] += 1
    ready = [i + 1 for i in range(inst.n) if indeg[i] == 0]
    order: list[int] = []
    while ready:
        k = int(rng.integers(len(ready))) if len(ready) > 1 else 0
        i = ready.pop(k)
        order.append(i)
        for h in inst.activities[i - 1].successors:
            indeg[h - 1] -= 1
            if indeg[h - 1] == 0:
                ready.append(h)
    return tuple(order)


def random_chromosome(inst: ProjectInstance,
                      rng: np.random.Generator) -> Chromosome:
    """Uniform mode per activity, uniform duration within the mode's window."""
    modes = []
    durations = []
    for act in inst.activities:
        if act.is_dummy:
            modes.append(1)
            durations.append(0)
            continue
        m = int(rng.integers(1, len(act.modes) + 1))
        mode = act.modes[m - 1]
        modes.append(m)
        durations.append(int(rng.integers(mode.crash_duration,
                                          mode.normal_duration + 1)))
    return Chromosome(random_topological_order(inst, rng),
                      tuple(modes), tuple(durations))


def order_is_topological(inst: ProjectInstance, order: tuple[int, ...]) -> bool:
    pos = [0] * inst.n
    for p, i in enumerate(order):
        pos[i - 1] = p
    return all(pos[act.id - 1] < pos[h - 1]
               for act in inst.activities for h in act.successors)


def crossover(p1: Chromosome, p2: Chromosome) -> tuple[Chromosome, Chromosome]:
    """Swap the mode and duration strings as a pair; orders stay put."""
    c1 = Chromosome(p1.order, p2.modes, p2.durations)
    c2 = Chromosome(p2.order, p1.modes, p1.durations)
    return c1, c2


def mutate(inst: ProjectInstance, chrom: Chromosome,
           rng: np.random.Generator) -> Chromosome:
    """Two-point mutation: try to swap two non-dummy order positions (kept
    only if still topological) and redraw both activities' mode/duration."""
    real_pos = [p for p, a in enumerate(chrom.order)
                if not inst.activities[a - 1].is_dummy]
    if len(real_pos) < 2:
        return chrom
    picked = rng.choice(len(real_pos), size=2, replace=False)
    p, q = (real_pos[int(picked[0])], real_pos[int(picked[1])])
    order = list(chrom.order)
    order[p], order[q] = order[q], order[p]
    new_order = tuple(order) if order_is_topological(inst, tuple(order)) \
        else chrom.order
    modes = list(chrom.modes)
    durations = list(chrom.durations)
    for a in (chrom.order[p], chrom.order[q]):
        act = inst.activities[a - 1]
        m = int(rng.integers(1, len(act.modes) + 1))
        mode = act.modes[m - 1]
        modes[a - 1] = m
        durations[a - 1] = int(rng.integers(mode.crash_duration,
                                            mode.normal_duration + 1))
    return Chromosome(new_order, tuple(modes), tuple(durations))


def tournament_select(pop_ranks: list[int], rng: np.random.Generator) -> int:
    """Binary tournament on nondomination rank; equal ranks decided by coin."""
    n = len(pop_ranks)
    if n < 2:
        raise BadParams("tournament needs a population of at least 2")
    picked = rng.choice(n, size=2, replace=False)
    a, b = int(picked[0]), int(picked[1])
    if pop_ranks[a] < pop_ranks[b]:
        return a
    if pop_ranks[b] < pop_ranks[a]:
        return b
    return a if rng.random() < 0.5 else b


def replace_gene(chrom: Chromosome, activity_id: int, mode_index: int,
                 duration: int) -> Chromosome:
    modes = list(chrom.modes)
    durations = list(chrom.durations)
    modes[activity_id - 1] = mode_index
    durations[activity_id - 1] = duration
    return Chromosome(chrom.order, tuple(modes), tuple(durations))


def hill_climb(inst: ProjectInstance, chrom: Chromosome,
               rng: np.random.Generator | None = None,
               _eval=None) -> Chromosome:
    """Per-activity exhaustive improvement in order-string sequence.

    For each non-dummy activity, every (mode, duration) variant is built
    and the feasible ones are ranked together with the input; the scan
    stops at the first activity whose variants strictly outrank the input
    (ties among best-ranked variants broken uniformly when an RNG is
    given, else by scan order).  Without improvement the input returns
    unchanged; the result is never dominated by the input.
    """
    ev = _eval if _eval is not None else Evaluator(inst)
    base_obj, _ = ev(chrom)
    for a in chrom.order:
        act = inst.activities[a - 1]
        if act.is_dummy:
            continue
        cur_mode = chrom.modes[a - 1]
        cur_dur = chrom.durations[a - 1]
        variants: list[tuple[ObjectiveVector, Chromosome]] = []
        for m_idx, mode in enumerate(act.modes, start=1):
            for d in range(mode.crash_duration, mode.normal_duration + 1):
                if m_idx == cur_mode and d == cur_dur:
                    continue
                cand = replace_gene(chrom, a, m_idx, d)
                obj, rep = ev(cand)
                if rep.valid_number == 3:
                    variants.append((obj, cand))
        if not variants:
            continue
        ranks = nondominated_sort([base_obj] + [o for o, _ in variants])
        if ranks[0] == 0:
            continue  # nothing dominates the input at this activity
        best = [variants[k - 1][1] for k in range(1, len(ranks)) if ranks[k] == 0]
        if rng is None or len(best) == 1:
            return best[0]
        return best[int(rng.integers(len(best)))]
    return chrom


# ---------------------------------------------------------------------------
# Population machinery shared with NSGA-II

def draw_feasible(inst: ProjectInstance, rng: np.random.Generator, evaluator,
                  exclude: set[Chromosome], attempts: int):
    """Rejection-sample one feasible, non-duplicate chromosome.

    Raises InitTimeout with a per-constraint-group failure histogram when
    the attempt budget runs out.
    """
    histogram = {"resource": 0, "time": 0, "budget": 0, "duplicate": 0}
    for _ in range(attempts):
        chrom = random_chromosome(inst, rng)
        obj, rep = evaluator(chrom)
        if rep.valid_number == 3:
            if chrom in exclude:
                histogram["duplicate"] += 1
                continue
            return chrom, obj
        if not rep.resource_ok:
            histogram["resource"] += 1
        if not rep.time_ok:
            histogram["time"] += 1
        if not rep.budget_ok:
            histogram["budget"] += 1
    raise InitTimeout(
        f"no feasible non-duplicate chromosome in {attempts} draws; "
        f"failures: {histogram}", histogram)


def init_population(inst: ProjectInstance, params: "MogaParams",
                    *, attempts_factor: int = 10_000,
                    rng: np.random.Generator | None = None,
                    evaluator=None) -> list[Chromosome]:
    """Rejection-sample pop_size distinct chromosomes with valid_number 3."""
    params.validate()
    if rng is None:
        rng = make_rng(params.seed, 0)
    if evaluator is None:
        evaluator = Evaluator(inst)
    budget = attempts_factor * params.pop_size
    population: list[Chromosome] = []
    seen: set[Chromosome] = set()
    while len(population) < params.pop_size:
        chrom, _ = draw_feasible(inst, rng, evaluator, seen,
                                 budget - evaluator.count
                                 if budget > evaluator.count else 1)
        population.append(chrom)
        seen.add(chrom)
    return population


def resample_durations(inst: ProjectInstance, chrom: Chromosome,
                       rng: np.random.Generator) -> Chromosome:
    durations = []
    for act in inst.activities:
        if act.is_dummy:
            durations.append(0)
            continue
        mode = act.modes[chrom.modes[act.id - 1] - 1]
        durations.append(int(rng.integers(mode.crash_duration,
                                          mode.normal_duration + 1)))
    return Chromosome(chrom.order, chrom.modes, tuple(durations))


REPAIR_ATTEMPTS = 20


def control_offspring(inst: ProjectInstance, child: Chromosome,
                      rng: np.random.Generator, evaluator,
                      members: set[Chromosome], attempts: int):
    """Feasibility and duplicate control: repair by duration resampling,
    then fall back to a fresh random feasible chromosome."""
    obj, rep = evaluator(child)
    if rep.valid_number < 3:
        for _ in range(REPAIR_ATTEMPTS):
            fixed = resample_durations(inst, child, rng)
            obj2, rep2 = evaluator(fixed)
            if rep2.valid_number == 3:
                child, obj, rep = fixed, obj2, rep2
                break
    if rep.valid_number < 3 or child in members:
        child, obj = draw_feasible(inst, rng, evaluator, members, attempts)
    return child, obj


# ---------------------------------------------------------------------------
# Main loop

def _pick_by_rank(indices_by_rank: dict[int, list[int]], count: int,
                  rng: np.random.Generator, worst_first: bool = False) -> list[int]:
    """Select `count` indices by rank (ties broken randomly)."""
    chosen: list[int] = []
    for rank in sorted(indices_by_rank, reverse=worst_first):
        group = indices_by_rank[rank]
        need = count - len(chosen)
        if need <= 0:
            break
        if len(group) <= need:
            chosen.extend(group)
        else:
            picked = rng.choice(len(group), size=need, replace=False)
            chosen.extend(group[int(k)] for k in sorted(picked))
    return chosen


def run_moga(inst: ProjectInstance, params: MogaParams,
             *, use_archive: bool = True,
             max_evaluations: int | None = None,
             attempts_factor: int = 10_000,
             literal_eq15: bool = False,
             on_generation=None) -> FrontReport:
    """Run the genetic algorithm and return the resulting front.

    By default the front is the external archive (the nondominated set of
    every feasible evaluation); use_archive=False reports the final
    population's nondominated set only.  on_generation(gen, chromosomes,
    archive_front) is an observation hook used by tests.
    """
    params.validate()
    t0 = time.perf_counter()
    archive = ParetoArchive()
    evaluator = Evaluator(inst, archive, literal_eq15)
    attempts = attempts_factor * params.pop_size

    rng0 = make_rng(params.seed, 0)
    chroms = init_population(inst, params, attempts_factor=attempts_factor,
                             rng=rng0, evaluator=evaluator)
    objs = [evaluator(c)[0] for c in chroms]
    pop = list(zip(chroms, objs))

    n_elite = min(frac_count(params.elitism_rate, params.pop_size),
                  params.pop_size)
    n_cross = min(frac_count(params.crossover_rate, params.pop_size),
                  params.pop_size - n_elite)
    n_fill = params.pop_size - n_elite - n_cross
    locally_optimal: set[Chromosome] = set()

    for gen in range(1, params.iterations + 1):
        rng = make_rng(params.seed, gen)
        ranks = nondominated_sort([o for _, o in pop])
        by_rank: dict[int, list[int]] = {}
        for idx, r in enumerate(ranks):
            by_rank.setdefault(r, []).append(idx)

        elites = [pop[i] for i in _pick_by_rank(by_rank, n_elite, rng)]
        members = {c for c, _ in elites}

        offspring: list[tuple[Chromosome, ObjectiveVector]] = []
        while len(offspring) < n_cross:
            i1 = tournament_select(ranks, rng)
            i2 = tournament_select(ranks, rng)
            for child in crossover(pop[i1][0], pop[i2][0]):
                if len(offspring) >= n_cross:
                    break
                if rng.random() < params.mutation_rate:
                    child = mutate(inst, child, rng)
                child, obj = control_offspring(inst, child, rng, evaluator,
                                               members, attempts)
                offspring.append((child, obj))
                members.add(child)
        for _ in range(n_fill):
            child, obj = draw_feasible(inst, rng, evaluator, members, attempts)
            offspring.append((child, obj))
            members.add(child)

        n_climb = min(frac_count(params.hill_climb_rate, params.pop_size),
                      len(offspring))
        if n_climb:
            picked = rng.choice(len(offspring), size=n_climb, replace=False)
            for k in sorted(int(x) for x in picked):
                base = offspring[k][0]
                # a chromosome once verified locally optimal stays so; the
                # no-improvement branch consumes no randomness, so skipping
                # the re-scan leaves the run bit-identical
                if base in locally_optimal:
                    continue
                climbed = hill_climb(inst, base, rng=rng, _eval=evaluator)
                if climbed == base:
                    locally_optimal.add(base)
                else:
                    obj, _ = evaluator(climbed)
                    offspring[k] = (climbed, obj)

        pop = elites + offspring
        if on_generation is not None:
            on_generation(gen, [c for c, _ in pop], archive.front())
        if max_evaluations is not None and evaluator.count >= max_evaluations:
            break

    front = archive.front() if use_archive else pareto_filter(
        [(o, c) for c, o in pop])
    return FrontReport(
        front=front, algorithm="moga", seed=params.seed,
        instance_hash=instance_hash(inst), params=asdict(params),
        evaluations=evaluator.count,
        wall_ms=(time.perf_counter() - t0) * 1000.0)
