"""Pareto dominance under the fixed senses (min cost, min time, max productivity)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .evaluate import Chromosome, ObjectiveVector

DUPLICATE_TOL = 1e-9


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is at least as good on all objectives and strictly better on one."""
    if (math.isnan(a.npv_cost) or math.isnan(a.productivity)
            or math.isnan(b.npv_cost) or math.isnan(b.productivity)):
        raise ValueError("NaN objective value")
    if (a.npv_cost <= b.npv_cost and a.makespan <= b.makespan
            and a.productivity >= b.productivity):
        return (a.npv_cost < b.npv_cost or a.makespan < b.makespan
                or a.productivity > b.productivity)
    return False


def nondominated_sort(objectives: list[ObjectiveVector]) -> list[int]:
    """Rank per member: 0 = nondominated, k = nondominated after removing < k."""
    n = len(objectives)
    if n == 0:
        return []
    vals = [(o.npv_cost, o.makespan, o.productivity) for o in objectives]
    for c, _, p in vals:
        if math.isnan(c) or math.isnan(p):
            raise ValueError("NaN objective value")
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        ci, ti, pi = vals[i]
        for j in range(i + 1, n):
            cj, tj, pj = vals[j]
            if ci <= cj and ti <= tj and pi >= pj:
                if ci < cj or ti < tj or pi > pj:
                    dominated_by[i].append(j)
                    count[j] += 1
            elif cj <= ci and tj <= ti and pj >= pi:
                if cj < ci or tj < ti or pj > pi:
                    dominated_by[j].append(i)
                    count[i] += 1
    ranks = [0] * n
    current = [i for i in range(n) if count[i] == 0]
    rank = 0
    while current:
        nxt = []
        for i in current:
            ranks[i] = rank
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        rank += 1
        current = nxt
    return ranks


def _same_point(a: ObjectiveVector, b: ObjectiveVector, tol: float = DUPLICATE_TOL) -> bool:
    return (abs(a.npv_cost - b.npv_cost) <= tol
            and a.makespan == b.makespan
            and abs(a.productivity - b.productivity) <= tol)


@dataclass(frozen=True)
class FrontMember:
    """One nondominated point; contributors are every chromosome that
    evaluated to this objective vector (the first one is canonical)."""

    objectives: ObjectiveVector
    contributors: tuple[Chromosome, ...] = ()

    @property
    def chromosome(self) -> Chromosome | None:
        return self.contributors[0] if self.contributors else None


@dataclass(frozen=True)
class Front:
    """A mutually nondominated set under senses (min, min, max)."""

    members: tuple[FrontMember, ...]

    def __len__(self) -> int:
        return len(self.members)

    def objectives(self) -> list[ObjectiveVector]:
        return [m.objectives for m in self.members]

    def contains_point(self, obj: ObjectiveVector, tol: float = DUPLICATE_TOL) -> bool:
        return any(_same_point(m.objectives, obj, tol) for m in self.members)


def _canonical_key(m: FrontMember) -> tuple:
    return (m.objectives.npv_cost, m.objectives.makespan,
            -m.objectives.productivity)


def pareto_filter(pop: list[tuple[ObjectiveVector, Chromosome | None]]) -> Front:
    """Nondominated subset with near-equal objective vectors collapsed.

    The first occurrence of a duplicated vector is kept; every chromosome
    that produced it is recorded as a contributor.
    """
    objs = [obj for obj, _ in pop]
    ranks = nondominated_sort(objs)
    members: list[ObjectiveVector] = []
    contributors: list[list[Chromosome]] = []
    for (obj, chrom), rank in zip(pop, ranks):
        if rank != 0:
            continue
        for k, kept in enumerate(members):
            if _same_point(kept, obj):
                if chrom is not None:
                    contributors[k].append(chrom)
                break
        else:
            members.append(obj)
            contributors.append([] if chrom is None else [chrom])
    packed = [FrontMember(obj, tuple(chroms))
              for obj, chroms in zip(members, contributors)]
    packed.sort(key=_canonical_key)
    return Front(tuple(packed))


@dataclass
class ParetoArchive:
    """Incrementally maintained nondominated archive of feasible evaluations."""

    _members: list[FrontMember] = field(default_factory=list)

    def add(self, obj: ObjectiveVector, chrom: Chromosome | None = None) -> bool:
        """Insert a point; returns True when it enters the archive."""
        for k, m in enumerate(self._members):
            if _same_point(m.objectives, obj):
                if chrom is not None:
                    self._members[k] = FrontMember(m.objectives,
                                                   m.contributors + (chrom,))
                return False
            if dominates(m.objectives, obj):
                return False
        self._members = [m for m in self._members
                         if not dominates(obj, m.objectives)]
        self._members.append(FrontMember(obj, () if chrom is None else (chrom,)))
        return True

    def front(self) -> Front:
        return Front(tuple(sorted(self._members, key=_canonical_key)))

    def __len__(self) -> int:
        return len(self._members)
