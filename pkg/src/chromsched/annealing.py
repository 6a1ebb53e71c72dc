"""Simulated annealing over per-machine operation sequences.

A solution is an encoding: one ordered operation sequence per machine.
Decoding re-times an encoding by forward placement under all constraints.
Neighbors move either single operations or packs (maximal same-family runs
with no setup or idle gap inside) by insertion or exchange; the first moved
item is drawn with probability proportional to its share of the total
tardiness, and the second is looked for between the first item's ready date
and its current start.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from itertools import accumulate

from .engine import (CompiledInstance, compile_instance, place_sequences,
                     schedule_from_arrays, sequences_from_schedule)
from .errors import NoSlotError, SchedulingError
from .model import Instance, Schedule, total_tardiness


class MoveType(str, Enum):
    INSERT = "insert"
    EXCHANGE = "exchange"


class ItemKind(str, Enum):
    OP = "op"
    PACK = "pack"


class MachineChoice(str, Enum):
    IDEM = "idem"
    EM = "em"
    UNIF = "unif"


class DateChoice(str, Enum):
    UNIF = "unif"
    LATE = "late"


class Structure(str, Enum):
    SIMPLE = "simple"
    OP = "op"
    OP_PA = "op_pa"


@dataclass(frozen=True)
class Mechanism:
    """One neighbor-generation mechanism (a row of the move table)."""

    id: int
    move: MoveType
    item: ItemKind
    same_family: bool
    machine_choice: MachineChoice
    date_choice: DateChoice


#: The eight move mechanisms.  Rows 0 and 3 are intentionally identical:
#: row 0 is reserved for the SIMPLE structure, rows 1-7 form OP and OP+PA.
MECHANISMS: tuple[Mechanism, ...] = (
    Mechanism(0, MoveType.INSERT, ItemKind.OP, False, MachineChoice.UNIF, DateChoice.UNIF),
    Mechanism(1, MoveType.INSERT, ItemKind.OP, True, MachineChoice.EM, DateChoice.UNIF),
    Mechanism(2, MoveType.EXCHANGE, ItemKind.OP, True, MachineChoice.EM, DateChoice.UNIF),
    Mechanism(3, MoveType.INSERT, ItemKind.OP, False, MachineChoice.UNIF, DateChoice.UNIF),
    Mechanism(4, MoveType.INSERT, ItemKind.PACK, True, MachineChoice.EM, DateChoice.UNIF),
    Mechanism(5, MoveType.EXCHANGE, ItemKind.PACK, True, MachineChoice.EM, DateChoice.UNIF),
    Mechanism(6, MoveType.INSERT, ItemKind.PACK, False, MachineChoice.UNIF, DateChoice.UNIF),
    Mechanism(7, MoveType.EXCHANGE, ItemKind.PACK, False, MachineChoice.IDEM, DateChoice.LATE),
)

STRUCTURE_MECHANISMS: dict[Structure, tuple[int, ...]] = {
    Structure.SIMPLE: (0,),
    Structure.OP: (1, 2, 3),
    Structure.OP_PA: (1, 2, 3, 4, 5, 6, 7),
}


@dataclass(frozen=True)
class SaParams:
    """Annealing schedule and neighborhood-structure parameters.

    A temperature level ends after `plateau_iterations` proposals or
    `plateau_acceptances` accepted ones; the run stops after `dead_levels`
    consecutive levels without any acceptance, at `max_iterations` total
    (descent included; None = unlimited), or at zero tardiness.
    `mechanism_ids` overrides the structure's mechanism set.
    """

    structure: Structure = Structure.OP_PA
    cooling_factor: float = 0.95
    descent_iterations: int = 100
    plateau_iterations: int = 400
    plateau_acceptances: int = 80
    initial_accept_prob: float = 0.8
    max_iterations: int | None = 15000
    dead_levels: int = 3
    resample_limit: int = 50
    mechanism_ids: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError("cooling_factor must be in (0, 1)")
        if not 0.0 < self.initial_accept_prob < 1.0:
            raise ValueError("initial_accept_prob must be in (0, 1)")

    def mechanisms(self) -> tuple[Mechanism, ...]:
        ids = self.mechanism_ids or STRUCTURE_MECHANISMS[self.structure]
        return tuple(MECHANISMS[i] for i in ids)


@dataclass(frozen=True)
class Encoding:
    """Per-machine processing sequences; machines without operations may be
    omitted.  Every operation appears exactly once, on an eligible machine."""

    sequences: tuple[tuple[str, tuple[str, ...]], ...]

    @classmethod
    def from_dict(cls, mapping) -> "Encoding":
        return cls(tuple(sorted(
            (machine, tuple(ops)) for machine, ops in mapping.items())))

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return dict(self.sequences)


@dataclass(frozen=True)
class Pack:
    """A maximal run of same-family operations on one machine with no setup
    or idle gap between consecutive members; may hold a single operation."""

    machine: str
    start_index: int
    stop_index: int
    family: str
    operations: tuple[str, ...]


class ProposalFailed(SchedulingError):
    """No admissible neighbor found within the resample limit."""


def initial_temperature(mean_delta: float, accept_prob: float = 0.8) -> float:
    """Temperature making a mean-sized degradation acceptable with the
    given probability: solves exp(-mean_delta/T) = accept_prob."""
    if mean_delta <= 0:
        raise ValueError("mean_delta must be positive")
    if not 0.0 < accept_prob < 1.0:
        raise ValueError("accept_prob must be in (0, 1)")
    return mean_delta / -math.log(accept_prob)


# ---------------------------------------------------------------------------
# Decoding and public helpers.


def _seqs_from_encoding(ci: CompiledInstance, encoding: Encoding) -> list[list[int]]:
    seqs: list[list[int]] = [[] for _ in ci.machine_ids]
    seen: set[int] = set()
    for machine, ops in encoding.sequences:
        m = ci.machine_index.get(machine)
        if m is None:
            raise ValueError(f"encoding references unknown machine {machine}")
        for op_id in ops:
            o = ci.op_index.get(op_id)
            if o is None:
                raise ValueError(f"encoding references unknown operation {op_id}")
            if o in seen:
                raise ValueError(f"operation {op_id} appears twice in encoding")
            if not ci.eligible_mask[o] & (1 << m):
                raise ValueError(f"operation {op_id} not eligible on {machine}")
            seen.add(o)
            seqs[m].append(o)
    if len(seen) != ci.n_ops:
        raise ValueError("encoding does not cover every operation")
    return seqs


def _encoding_from_seqs(ci: CompiledInstance, seqs: list[list[int]]) -> Encoding:
    return Encoding(tuple(
        (ci.machine_ids[m], tuple(ci.op_ids[o] for o in seq))
        for m, seq in enumerate(seqs)))


def decode(encoding: Encoding, instance: Instance) -> Schedule:
    """Deterministic forward placement of an encoding; always feasible or
    raises NoSlotError (callers treat that as a rejected move)."""
    ci = compile_instance(instance)
    seqs = _seqs_from_encoding(ci, encoding)
    _, starts, comps, setups = place_sequences(ci, seqs)
    return schedule_from_arrays(ci, seqs, starts, comps, setups)


def encode_schedule(instance: Instance, schedule: Schedule) -> Encoding:
    """The encoding induced by a schedule's per-machine start order."""
    ci = compile_instance(instance)
    return _encoding_from_seqs(ci, sequences_from_schedule(ci, schedule))


def packs_of(instance: Instance, schedule: Schedule, machine: str) -> list[Pack]:
    """Partition a machine's placements into maximal packs."""
    ops = instance.operations_by_id
    placements = sorted(
        (p for p in schedule.placements if p.machine == machine),
        key=lambda p: p.start)
    packs: list[Pack] = []
    i = 0
    while i < len(placements):
        k = i + 1
        while (k < len(placements)
               and not placements[k].setup_performed
               and placements[k].start == placements[k - 1].completion):
            k += 1
        members = placements[i:k]
        packs.append(Pack(
            machine=machine,
            start_index=i,
            stop_index=k,
            family=ops[members[0].operation_id].family,
            operations=tuple(p.operation_id for p in members)))
        i = k
    return packs


def item_selection_weights(instance: Instance, schedule: Schedule,
                           kind: ItemKind):
    """Selection weight of each op or pack: its share of total tardiness.

    A job's tardiness is split over its late-finishing operations in
    proportion to their own lateness, so weights over all ops sum to the
    schedule's total tardiness and on-time items get weight zero.
    """
    by_op = schedule.by_operation
    op_weight: dict[str, float] = {}
    for job in instance.jobs:
        comps = {op.id: by_op[op.id].completion for op in job.operations}
        job_tardiness = max(comps.values()) - job.due
        if job_tardiness <= 0:
            for op in job.operations:
                op_weight[op.id] = 0.0
            continue
        lateness = {oid: max(c - job.due, 0) for oid, c in comps.items()}
        total = sum(lateness.values())
        for oid, late in lateness.items():
            op_weight[oid] = job_tardiness * late / total
    if kind is ItemKind.OP:
        return op_weight
    pack_weight: dict[Pack, float] = {}
    for machine in instance.machines:
        for pack in packs_of(instance, schedule, machine):
            pack_weight[pack] = sum(op_weight[oid] for oid in pack.operations)
    return pack_weight


def select_first_item(instance: Instance, schedule: Schedule, kind: ItemKind,
                      rng: random.Random):
    """Draw the item to move, weighted by tardiness share."""
    weights = item_selection_weights(instance, schedule, kind)
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("total tardiness is zero: schedule is optimal")
    items = sorted(weights, key=str)
    cum = list(accumulate(weights[i] for i in items))
    r = rng.random() * total
    idx = bisect_right(cum, r)
    return items[min(idx, len(items) - 1)]


# ---------------------------------------------------------------------------
# Internal solution state and proposal machinery.


class _PackInfo:
    __slots__ = ("machine", "lo", "hi", "family", "start", "ready", "mask",
                 "machines", "weight", "index")

    def __init__(self, machine, lo, hi, family, start, ready, mask, machines,
                 weight, index):
        self.machine = machine
        self.lo = lo
        self.hi = hi
        self.family = family
        self.start = start
        self.ready = ready
        self.mask = mask
        self.machines = machines
        self.weight = weight
        self.index = index


class _Solution:
    __slots__ = ("seqs", "tardiness", "starts", "comps", "setups",
                 "machine_of", "pos_of", "op_cum", "op_total",
                 "_packs", "_packs_flat", "_pack_cum", "_pack_total")

    def __init__(self, ci: CompiledInstance, seqs, tardiness, starts, comps,
                 setups):
        self.seqs = seqs
        self.tardiness = tardiness
        self.starts = starts
        self.comps = comps
        self.setups = setups
        n = ci.n_ops
        machine_of = [0] * n
        pos_of = [0] * n
        for m, seq in enumerate(seqs):
            for pos, o in enumerate(seq):
                machine_of[o] = m
                pos_of[o] = pos
        self.machine_of = machine_of
        self.pos_of = pos_of
        weights = _op_weights(ci, comps)
        self.op_cum = list(accumulate(weights))
        self.op_total = self.op_cum[-1] if self.op_cum else 0.0
        self._packs = None
        self._packs_flat = None
        self._pack_cum = None
        self._pack_total = 0.0

    def pack_data(self, ci: CompiledInstance):
        if self._packs is None:
            op_w = self.op_cum
            packs: list[list[_PackInfo]] = []
            flat: list[_PackInfo] = []
            starts, comps, setups = self.starts, self.comps, self.setups
            for m, seq in enumerate(self.seqs):
                per_machine: list[_PackInfo] = []
                i = 0
                while i < len(seq):
                    k = i + 1
                    while (k < len(seq) and not setups[seq[k]]
                           and starts[seq[k]] == comps[seq[k - 1]]):
                        k += 1
                    members = seq[i:k]
                    mask = ci.eligible_mask[members[0]]
                    ready = ci.release[members[0]]
                    weight = _cum_at(op_w, members[0])
                    for o in members[1:]:
                        mask &= ci.eligible_mask[o]
                        r = ci.release[o]
                        if r < ready:
                            ready = r
                        weight += _cum_at(op_w, o)
                    machines = tuple(mm for mm in range(ci.n_machines)
                                     if mask & (1 << mm))
                    per_machine.append(_PackInfo(
                        m, i, k, ci.family[members[0]], starts[members[0]],
                        ready, mask, machines, weight, len(per_machine)))
                    i = k
                packs.append(per_machine)
                flat.extend(per_machine)
            self._packs = packs
            self._packs_flat = flat
            self._pack_cum = list(accumulate(p.weight for p in flat))
            self._pack_total = self._pack_cum[-1] if self._pack_cum else 0.0
        return self._packs, self._packs_flat, self._pack_cum, self._pack_total


def _cum_at(cum: list[float], i: int) -> float:
    return cum[i] - (cum[i - 1] if i else 0.0)


def _op_weights(ci: CompiledInstance, comps) -> list[float]:
    weights = [0.0] * ci.n_ops
    job_due = ci.job_due
    for j, ops in enumerate(ci.job_ops):
        due = job_due[j]
        worst = -1
        for o in ops:
            if comps[o] > worst:
                worst = comps[o]
        job_tardiness = worst - due
        if job_tardiness <= 0:
            continue
        total = 0
        for o in ops:
            late = comps[o] - due
            if late > 0:
                total += late
        for o in ops:
            late = comps[o] - due
            if late > 0:
                weights[o] = job_tardiness * late / total
    return weights


def _draw_index(cum: list[float], total: float, rng: random.Random) -> int:
    idx = bisect_right(cum, rng.random() * total)
    return min(idx, len(cum) - 1)


def _attempt_op(ci: CompiledInstance, sol: _Solution, mech: Mechanism,
                rng: random.Random):
    o1 = _draw_index(sol.op_cum, sol.op_total, rng)
    m1 = sol.machine_of[o1]
    ready = ci.release[o1]
    s1 = sol.starts[o1]
    if s1 <= ready:
        return None
    if mech.machine_choice is MachineChoice.IDEM:
        machines = (m1,)
    elif mech.machine_choice is MachineChoice.EM:
        machines = ci.eligible[o1]
    else:
        elig = ci.eligible[o1]
        machines = (elig[rng.randrange(len(elig))],)
    fam1 = ci.family[o1]
    need_family = mech.same_family
    exchanging = mech.move is MoveType.EXCHANGE
    m1_bit = 1 << m1
    family = ci.family
    eligible_mask = ci.eligible_mask
    starts = sol.starts
    cands = []
    for m in machines:
        for pos, o2 in enumerate(sol.seqs[m]):
            st = starts[o2]
            if st >= s1:
                break
            if st < ready:
                continue
            if need_family and family[o2] != fam1:
                continue
            if exchanging and not eligible_mask[o2] & m1_bit:
                continue
            cands.append((st, m, pos))
    if not cands:
        return None
    if mech.date_choice is DateChoice.LATE:
        best = cands[0]
        for c in cands[1:]:
            if c[0] > best[0]:
                best = c
        _, m2, i2 = best
    else:
        _, m2, i2 = cands[rng.randrange(len(cands))]
    i1 = sol.pos_of[o1]
    new = list(sol.seqs)
    if exchanging:
        if m1 == m2:
            s = list(new[m1])
            s[i1], s[i2] = s[i2], s[i1]
            new[m1] = s
        else:
            sa, sb = list(new[m1]), list(new[m2])
            sa[i1], sb[i2] = sb[i2], sa[i1]
            new[m1], new[m2] = sa, sb
    else:
        if m1 == m2:
            s = list(new[m1])
            s.pop(i1)
            s.insert(i2, o1)
            new[m1] = s
        else:
            sa = list(new[m1])
            sa.pop(i1)
            sb = list(new[m2])
            sb.insert(i2, o1)
            new[m1], new[m2] = sa, sb
    return new


def _attempt_pack(ci: CompiledInstance, sol: _Solution, mech: Mechanism,
                  rng: random.Random):
    packs, flat, cum, total = sol.pack_data(ci)
    if total <= 0:
        return None
    p1 = flat[_draw_index(cum, total, rng)]
    if mech.id == 7:
        per_machine = packs[p1.machine]
        if p1.index + 1 >= len(per_machine):
            return None
        succ = per_machine[p1.index + 1]
        seq = sol.seqs[p1.machine]
        new = list(sol.seqs)
        new[p1.machine] = (seq[:p1.lo] + seq[succ.lo:succ.hi]
                           + seq[p1.lo:p1.hi] + seq[succ.hi:])
        return new
    if p1.start <= p1.ready:
        return None
    if mech.machine_choice is MachineChoice.IDEM:
        machines = (p1.machine,)
    elif mech.machine_choice is MachineChoice.EM:
        machines = p1.machines
    else:
        machines = (p1.machines[rng.randrange(len(p1.machines))],)
    exchanging = mech.move is MoveType.EXCHANGE
    m1_bit = 1 << p1.machine
    cands = []
    for m in machines:
        for q in packs[m]:
            if q.start >= p1.start:
                break
            if q.start < p1.ready:
                continue
            if mech.same_family and q.family != p1.family:
                continue
            if exchanging and not q.mask & m1_bit:
                continue
            cands.append(q)
    if not cands:
        return None
    if mech.date_choice is DateChoice.LATE:
        p2 = cands[0]
        for q in cands[1:]:
            if q.start > p2.start:
                p2 = q
    else:
        p2 = cands[rng.randrange(len(cands))]
    new = list(sol.seqs)
    m1, m2 = p1.machine, p2.machine
    if exchanging:
        if m1 == m2:
            s = sol.seqs[m1]
            # p2 sits earlier on the same machine: p2.hi <= p1.lo
            new[m1] = (s[:p2.lo] + s[p1.lo:p1.hi] + s[p2.hi:p1.lo]
                       + s[p2.lo:p2.hi] + s[p1.hi:])
        else:
            sa, sb = sol.seqs[m1], sol.seqs[m2]
            new[m1] = sa[:p1.lo] + sb[p2.lo:p2.hi] + sa[p1.hi:]
            new[m2] = sb[:p2.lo] + sa[p1.lo:p1.hi] + sb[p2.hi:]
    else:
        block = sol.seqs[m1][p1.lo:p1.hi]
        if m1 == m2:
            s = list(sol.seqs[m1])
            del s[p1.lo:p1.hi]
            s[p2.lo:p2.lo] = block
            new[m1] = s
        else:
            sa = list(sol.seqs[m1])
            del sa[p1.lo:p1.hi]
            sb = list(sol.seqs[m2])
            sb[p2.lo:p2.lo] = block
            new[m1], new[m2] = sa, sb
    return new


def _propose(ci: CompiledInstance, sol: _Solution, mech: Mechanism,
             rng: random.Random, resample_limit: int):
    attempt = _attempt_op if mech.item is ItemKind.OP else _attempt_pack
    for _ in range(resample_limit):
        new_seqs = attempt(ci, sol, mech, rng)
        if new_seqs is not None:
            return new_seqs
    return None


def propose_neighbor(instance: Instance, encoding: Encoding,
                     mechanism: Mechanism, rng: random.Random,
                     resample_limit: int = 50) -> Encoding:
    """One neighbor of `encoding` under `mechanism`.

    Raises ProposalFailed when no admissible move is found within the
    resample limit, and ValueError at zero tardiness (nothing to improve).
    """
    ci = compile_instance(instance)
    seqs = _seqs_from_encoding(ci, encoding)
    tardiness, starts, comps, setups = place_sequences(ci, seqs)
    if tardiness <= 0:
        raise ValueError("total tardiness is zero: schedule is optimal")
    sol = _Solution(ci, seqs, tardiness, starts, comps, setups)
    new_seqs = _propose(ci, sol, mechanism, rng, resample_limit)
    if new_seqs is None:
        raise ProposalFailed(
            f"mechanism {mechanism.id}: no admissible second item")
    return _encoding_from_seqs(ci, new_seqs)


# ---------------------------------------------------------------------------
# The annealing run.


@dataclass
class SaResult:
    """Best schedule found plus run statistics and the per-iteration trace
    (iteration, temperature, current tardiness, best tardiness)."""

    schedule: Schedule
    tardiness: int
    initial_tardiness: int
    initial_temperature: float
    iterations: int
    evaluated: int
    accepted: int
    improved: int
    proposal_failures: int
    decode_failures: int
    levels_completed: int
    termination: str
    trace: list[tuple[int, float, int, int]] = field(repr=False, default_factory=list)


def run_sa(instance: Instance, initial: Schedule,
           params: SaParams | None = None, seed: int = 0) -> SaResult:
    """Anneal from a feasible initial schedule; never returns worse.

    Phase one is a pure descent over `descent_iterations` proposals whose
    mean absolute tardiness change calibrates the starting temperature so a
    mean-sized degradation is accepted with `initial_accept_prob`.  The main
    loop accepts any non-worsening neighbor and worse ones with probability
    exp(-delta/T), cooling geometrically per plateau.
    """
    params = params or SaParams()
    ci = compile_instance(instance)
    rng = random.Random(seed)
    mechs = params.mechanisms()
    n_mechs = len(mechs)

    initial_tardiness = total_tardiness(initial, instance)
    best_tardiness = initial_tardiness
    best_arrays = None  # None = the initial schedule as given
    trace: list[tuple[int, float, int, int]] = []
    evaluated = accepted = improved = 0
    proposal_failures = decode_failures = 0
    levels_completed = 0
    iteration = 0

    def result(termination: str, t0: float) -> SaResult:
        if best_arrays is None:
            schedule = initial
        else:
            schedule = schedule_from_arrays(ci, *best_arrays)
        return SaResult(
            schedule=schedule, tardiness=best_tardiness,
            initial_tardiness=initial_tardiness, initial_temperature=t0,
            iterations=iteration, evaluated=evaluated, accepted=accepted,
            improved=improved, proposal_failures=proposal_failures,
            decode_failures=decode_failures, levels_completed=levels_completed,
            termination=termination, trace=trace)

    if initial_tardiness == 0:
        return result("optimum", 0.0)

    seqs = sequences_from_schedule(ci, initial)
    tardiness, starts, comps, setups = place_sequences(ci, seqs)
    current = _Solution(ci, seqs, tardiness, starts, comps, setups)
    if tardiness < best_tardiness:
        best_tardiness = tardiness
        best_arrays = (seqs, starts, comps, setups)

    def budget_left() -> bool:
        return params.max_iterations is None or iteration < params.max_iterations

    # Descent phase: improvements only, collecting the mean |delta|.
    abs_delta_sum = 0.0
    abs_delta_count = 0
    while iteration < params.descent_iterations and budget_left():
        if best_tardiness == 0:
            return result("optimum", 0.0)
        iteration += 1
        mech = mechs[rng.randrange(n_mechs)]
        new_seqs = _propose(ci, current, mech, rng, params.resample_limit)
        if new_seqs is None:
            proposal_failures += 1
        else:
            try:
                placed = place_sequences(ci, new_seqs)
            except NoSlotError:
                decode_failures += 1
            else:
                evaluated += 1
                new_tardiness = placed[0]
                delta = new_tardiness - current.tardiness
                abs_delta_sum += abs(delta)
                abs_delta_count += 1
                if delta < 0:
                    accepted += 1
                    current = _Solution(ci, new_seqs, *placed)
                    if new_tardiness < best_tardiness:
                        improved += 1
                        best_tardiness = new_tardiness
                        best_arrays = (new_seqs, *placed[1:])
        trace.append((iteration, 0.0, current.tardiness, best_tardiness))

    mean_delta = abs_delta_sum / abs_delta_count if abs_delta_count else 0.0
    # Degenerate neighborhoods (every observed delta zero) get a nominal
    # temperature; the acceptance rule never consults it for delta <= 0.
    t0 = initial_temperature(mean_delta, params.initial_accept_prob) if mean_delta > 0 else 1.0
    temperature = t0

    level_iterations = 0
    level_acceptances = 0
    dead_run = 0
    while True:
        if best_tardiness == 0:
            return result("optimum", t0)
        if not budget_left():
            return result("max-iterations", t0)
        iteration += 1
        level_iterations += 1
        mech = mechs[rng.randrange(n_mechs)]
        new_seqs = _propose(ci, current, mech, rng, params.resample_limit)
        if new_seqs is None:
            proposal_failures += 1
        else:
            try:
                placed = place_sequences(ci, new_seqs)
            except NoSlotError:
                decode_failures += 1
            else:
                evaluated += 1
                new_tardiness = placed[0]
                delta = new_tardiness - current.tardiness
                if delta <= 0 or rng.random() < math.exp(-delta / temperature):
                    accepted += 1
                    level_acceptances += 1
                    current = _Solution(ci, new_seqs, *placed)
                    if new_tardiness < best_tardiness:
                        improved += 1
                        best_tardiness = new_tardiness
                        best_arrays = (new_seqs, *placed[1:])
        trace.append((iteration, temperature, current.tardiness, best_tardiness))
        if (level_iterations >= params.plateau_iterations
                or level_acceptances >= params.plateau_acceptances):
            dead_run = dead_run + 1 if level_acceptances == 0 else 0
            levels_completed += 1
            temperature *= params.cooling_factor
            level_iterations = 0
            level_acceptances = 0
            if dead_run >= params.dead_levels:
                return result("dead-levels", t0)
