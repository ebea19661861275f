"""Chromosome decoding and objective evaluation.

A chromosome is three integer strings: a topological activity order, a
1-based mode index per activity, and a realized duration per activity.
Decoding is earliest-start; resources are aggregate, so start times do
not depend on the order string (it is kept for operator compatibility).
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import EncodingError, NoRealActivities
from .instance import ProjectInstance

__all__ = [
    "Chromosome", "DecodedSchedule", "PaymentEvent", "PaymentPlan",
    "ObjectiveVector", "FeasibilityReport", "baseline_chromosome",
    "decode_schedule", "compute_payments", "npv_cost", "quality_stats",
    "productivity", "check_feasibility", "evaluate", "budget_balance",
    "format_solution", "parse_solution",
]


class Chromosome(NamedTuple):
    """Solution encoding; modes/durations are indexed by activity id - 1."""

    order: tuple[int, ...]
    modes: tuple[int, ...]
    durations: tuple[int, ...]


class DecodedSchedule(NamedTuple):
    start: tuple[int, ...]
    finish: tuple[int, ...]
    makespan: int


class PaymentEvent(NamedTuple):
    index: int
    activity: int
    time: int
    amount: float
    fallback: bool = False  # no activity finished at/after the threshold


class PaymentPlan(NamedTuple):
    events: tuple[PaymentEvent, ...]
    prepayment: float


class ObjectiveVector(NamedTuple):
    npv_cost: float
    makespan: int
    productivity: float

    def as_tuple(self) -> tuple[float, int, float]:
        return (self.npv_cost, self.makespan, self.productivity)


class FeasibilityReport(NamedTuple):
    resource_ok: bool
    time_ok: bool
    budget_ok: bool

    @property
    def valid_number(self) -> int:
        return int(self.resource_ok) + int(self.time_ok) + int(self.budget_ok)


def baseline_chromosome(inst: ProjectInstance) -> Chromosome:
    """All-normal, first-mode chromosome on the canonical topological order."""
    from .instance import topological_order
    durations = tuple(0 if a.is_dummy else a.modes[0].normal_duration
                      for a in inst.activities)
    return Chromosome(order=topological_order(inst),
                      modes=(1,) * inst.n,
                      durations=durations)


def check_encoding(inst: ProjectInstance, chrom: Chromosome) -> None:
    """Raise EncodingError unless the chromosome is structurally valid."""
    n = inst.n
    if (len(chrom.order) != n or len(chrom.modes) != n
            or len(chrom.durations) != n):
        raise EncodingError(f"string lengths must all be {n}")
    pos = [-1] * n
    for p, i in enumerate(chrom.order):
        if not (1 <= i <= n) or pos[i - 1] >= 0:
            raise EncodingError("order is not a permutation of 1..n")
        pos[i - 1] = p
    succ = inst.successor_table
    for k in range(n):
        pk = pos[k]
        for h in succ[k]:
            if pk >= pos[h - 1]:
                raise EncodingError(f"order violates precedence {k + 1} -> {h}")
    _check_genes(inst, chrom)


def _check_genes(inst: ProjectInstance, chrom: Chromosome) -> None:
    bounds = inst.duration_bounds
    dummy = inst.dummy_flags
    for k in range(inst.n):
        m = chrom.modes[k]
        row = bounds[k]
        if not (1 <= m <= len(row)):
            raise EncodingError(f"activity {k + 1}: mode {m} out of range")
        d = chrom.durations[k]
        if dummy[k]:
            if d != 0:
                raise EncodingError(f"dummy activity {k + 1} must have duration 0")
            continue
        lo, hi = row[m - 1]
        if not (lo <= d <= hi):
            raise EncodingError(
                f"activity {k + 1}: duration {d} outside [{lo}, {hi}]")


def decode_schedule(inst: ProjectInstance, chrom: Chromosome,
                    *, _trusted_order: bool = False) -> DecodedSchedule:
    """Earliest-start decoding: E_i = max over predecessors of their finish.

    _trusted_order skips the permutation/precedence re-validation for
    callers that evaluate many chromosomes sharing an already-checked
    order string; gene bounds are always verified.
    """
    if _trusted_order:
        _check_genes(inst, chrom)
    else:
        check_encoding(inst, chrom)
    n = inst.n
    preds = inst.predecessors
    dur = chrom.durations
    start = [0] * n
    finish = [0] * n
    for i in chrom.order:
        k = i - 1
        s = 0
        for p in preds[k]:
            f = finish[p - 1]
            if f > s:
                s = f
        start[k] = s
        finish[k] = s + dur[k]
    return DecodedSchedule(tuple(start), tuple(finish), finish[n - 1])


def compute_payments(inst: ProjectInstance, sched: DecodedSchedule) -> PaymentPlan:
    """Payment plan under the deadline-fraction event rule.

    Event j (j < J) is the activity with the smallest finish time at or
    after j*D/J (ties to the smallest id); its amount is the compensation
    share of the earned value accumulated since the previous event.  The
    final payment settles the remainder at the makespan.  If no activity
    finishes at or after a threshold the event falls back to activity n.
    """
    j_total = inst.payment_count
    gamma = inst.prepay_ratio
    theta = inst.compensation_ratio
    u = inst.price
    finish = sched.finish
    values = inst.earned_values
    n = inst.n

    events: list[PaymentEvent] = []
    prev_earned = 0.0
    paid = 0.0
    for j in range(1, j_total):
        threshold = j * inst.deadline / j_total
        best_id = 0
        best_t = 0
        for k in range(n):
            t = finish[k]
            if t >= threshold and (best_id == 0 or t < best_t):
                best_id, best_t = k + 1, t
        fallback = best_id == 0
        if fallback:
            best_id, best_t = n, sched.makespan
        earned = 0.0
        for k in range(n):
            if finish[k] <= best_t:
                earned += values[k]
        amount = (theta - gamma) * (earned - prev_earned)
        prev_earned = earned
        paid += amount
        events.append(PaymentEvent(j, best_id, best_t, amount, fallback))
    final = u - (gamma * u + paid)
    events.append(PaymentEvent(j_total, n, sched.makespan, final))
    return PaymentPlan(tuple(events), gamma * u)


def npv_cost(inst: ProjectInstance, chrom: Chromosome,
             sched: DecodedSchedule) -> float:
    """Net present value of direct, crash-premium, and overhead costs."""
    rate = 1.0 + inst.interest_rate
    table = inst.cost_table
    dummy = inst.dummy_flags
    total = 0.0
    for k in range(inst.n):
        if dummy[k]:
            continue
        normal_cost, slope, normal_duration = table[k][chrom.modes[k] - 1]
        cost = normal_cost + slope * (normal_duration - chrom.durations[k])
        total += cost / rate ** sched.finish[k]
    total += inst.overhead * sched.makespan / rate ** sched.makespan
    return total


def quality_stats(inst: ProjectInstance, chrom: Chromosome) -> tuple[float, float]:
    """(Q_min, Q_avg) over the selected modes of non-dummy activities."""
    table = inst.quality_table
    dummy = inst.dummy_flags
    q_min = float("inf")
    q_sum = 0.0
    count = 0
    for k in range(inst.n):
        if dummy[k]:
            continue
        q = table[k][chrom.modes[k] - 1]
        if q < q_min:
            q_min = q
        q_sum += q
        count += 1
    if count == 0:
        raise NoRealActivities("instance has only dummy activities")
    return q_min, q_sum / count


def productivity(inst: ProjectInstance, chrom: Chromosome,
                 sched: DecodedSchedule) -> float:
    """Blended quality divided by the NPV of total costs."""
    cost = npv_cost(inst, chrom, sched)
    if cost == 0:
        raise ZeroDivisionError("npv_cost is zero; productivity undefined")
    q_min, q_avg = quality_stats(inst, chrom)
    alpha = inst.quality_blend
    return (alpha * q_min + (1 - alpha) * q_avg) / cost


def _discounted_payments(inst: ProjectInstance, sched: DecodedSchedule,
                         plan: PaymentPlan, literal_eq15: bool) -> float:
    rate = 1.0 + inst.interest_rate
    total = 0.0
    for ev in plan.events:
        # payments discount at event completion; the literal variant uses
        # the payment activity's start time instead
        t = sched.start[ev.activity - 1] if literal_eq15 else ev.time
        total += ev.amount / rate ** t
    return total


def check_feasibility(inst: ProjectInstance, chrom: Chromosome,
                      sched: DecodedSchedule, plan: PaymentPlan,
                      *, literal_eq15: bool = False,
                      _known_cost: float | None = None,
                      _decoded: bool = False) -> FeasibilityReport:
    """The three constraint groups: resources, time/scheduling, budget.

    _decoded marks a schedule freshly produced by decode_schedule, for
    which the duration-bound and precedence parts of the time group hold
    by construction and are skipped.
    """
    n = inst.n
    demands = inst.demand_table
    used = [0] * len(inst.capacities)
    for k in range(n):
        row = demands[k][chrom.modes[k] - 1]
        for r in range(len(used)):
            used[r] += row[r]
    resource_ok = all(u <= cap for u, cap in zip(used, inst.capacities))

    time_ok = sched.makespan <= inst.deadline
    if time_ok and not _decoded:
        bounds = inst.duration_bounds
        dummy = inst.dummy_flags
        succ = inst.successor_table
        finish = sched.finish
        start = sched.start
        for k in range(n):
            if not dummy[k]:
                lo, hi = bounds[k][chrom.modes[k] - 1]
                if not (lo <= chrom.durations[k] <= hi):
                    time_ok = False
                    break
            fk = finish[k]
            for h in succ[k]:
                if fk > start[h - 1]:
                    time_ok = False
                    break
            else:
                continue
            break

    available = (inst.initial_capital + plan.prepayment
                 + _discounted_payments(inst, sched, plan, literal_eq15))
    cost = npv_cost(inst, chrom, sched) if _known_cost is None else _known_cost
    budget_ok = cost <= available + 1e-9
    return FeasibilityReport(resource_ok, time_ok, budget_ok)


def evaluate(inst: ProjectInstance, chrom: Chromosome,
             *, literal_eq15: bool = False,
             _trusted_order: bool = False) -> tuple[ObjectiveVector, FeasibilityReport]:
    """Full evaluation; equal to composing the individual operations."""
    sched = decode_schedule(inst, chrom, _trusted_order=_trusted_order)
    plan = compute_payments(inst, sched)
    cost = npv_cost(inst, chrom, sched)
    q_min, q_avg = quality_stats(inst, chrom)
    alpha = inst.quality_blend
    prod = (alpha * q_min + (1 - alpha) * q_avg) / cost
    report = check_feasibility(inst, chrom, sched, plan, literal_eq15=literal_eq15,
                               _known_cost=cost, _decoded=True)
    return ObjectiveVector(cost, sched.makespan, prod), report


def budget_balance(inst: ProjectInstance, chrom: Chromosome) -> float:
    """NPV cost minus prepayment and discounted payments; the initial
    capital needed to make the chromosome budget-feasible."""
    sched = decode_schedule(inst, chrom)
    plan = compute_payments(inst, sched)
    return (npv_cost(inst, chrom, sched) - plan.prepayment
            - _discounted_payments(inst, sched, plan, literal_eq15=False))


# ---------------------------------------------------------------------------
# Solution-string serialization: "a|m|d" triples joined by ":"

def format_solution(chrom: Chromosome) -> str:
    parts = []
    for a in chrom.order:
        parts.append(f"{a}|{chrom.modes[a - 1]}|{chrom.durations[a - 1]}")
    return ":".join(parts)


def parse_solution(text: str) -> Chromosome:
    order: list[int] = []
    modes: dict[int, int] = {}
    durations: dict[int, int] = {}
    try:
        for triple in text.strip().split(":"):
            a, m, d = (int(x) for x in triple.split("|"))
            order.append(a)
            modes[a] = m
            durations[a] = d
    except ValueError as exc:
        raise EncodingError(f"bad solution string {text!r}") from exc
    n = len(order)
    if sorted(order) != list(range(1, n + 1)):
        raise EncodingError("solution string is not a permutation of 1..n")
    return Chromosome(tuple(order),
                      tuple(modes[i] for i in range(1, n + 1)),
                      tuple(durations[i] for i in range(1, n + 1)))
