import math
import random

import pytest

from chromsched.annealing import (DateChoice, Encoding, ItemKind,
                                  MachineChoice, MECHANISMS, Mechanism,
                                  MoveType, Pack, ProposalFailed, SaParams,
                                  Structure, STRUCTURE_MECHANISMS, decode,
                                  encode_schedule, initial_temperature,
                                  item_selection_weights, packs_of,
                                  propose_neighbor, run_sa, select_first_item)
from chromsched.availability import TimeWindowSet
from chromsched.errors import NoSlotError
from chromsched.generator import GenConfig, generate_instance
from chromsched.list_scheduler import run_lta
from chromsched.model import (ColumnType, Instance, Job, Operation, Schedule,
                              total_tardiness, validate_schedule)

from oracles import all_encodings


def tiny_instance(job_specs, machines=("m0",), columns=(("fA", 1), ("fB", 1)),
                  windows=None):
    jobs = []
    for job_id, release, due, ops in job_specs:
        jobs.append(Job(
            id=job_id, release=release, due=due,
            operations=tuple(
                Operation(id=f"{job_id}.{i+1}", job_id=job_id, family=fam,
                          processing=p, setup=s, eligible=frozenset(elig))
                for i, (fam, p, s, elig) in enumerate(ops))))
    return Instance(machines=tuple(machines),
                    column_types=tuple(ColumnType(f, u) for f, u in columns),
                    operator_windows=windows or TimeWindowSet.always(),
                    jobs=tuple(jobs))


class TestMechanismTable:
    # frozen rows: (move, item, family-constrained, machine, date)
    EXPECTED = {
        0: (MoveType.INSERT, ItemKind.OP, False, MachineChoice.UNIF, DateChoice.UNIF),
        1: (MoveType.INSERT, ItemKind.OP, True, MachineChoice.EM, DateChoice.UNIF),
        2: (MoveType.EXCHANGE, ItemKind.OP, True, MachineChoice.EM, DateChoice.UNIF),
        3: (MoveType.INSERT, ItemKind.OP, False, MachineChoice.UNIF, DateChoice.UNIF),
        4: (MoveType.INSERT, ItemKind.PACK, True, MachineChoice.EM, DateChoice.UNIF),
        5: (MoveType.EXCHANGE, ItemKind.PACK, True, MachineChoice.EM, DateChoice.UNIF),
        6: (MoveType.INSERT, ItemKind.PACK, False, MachineChoice.UNIF, DateChoice.UNIF),
        7: (MoveType.EXCHANGE, ItemKind.PACK, False, MachineChoice.IDEM, DateChoice.LATE),
    }

    @pytest.mark.parametrize("mech_id", sorted(EXPECTED))
    def test_row(self, mech_id):
        mech = MECHANISMS[mech_id]
        assert mech.id == mech_id
        assert (mech.move, mech.item, mech.same_family, mech.machine_choice,
                mech.date_choice) == self.EXPECTED[mech_id]

    def test_structure_sets(self):
        assert STRUCTURE_MECHANISMS[Structure.SIMPLE] == (0,)
        assert STRUCTURE_MECHANISMS[Structure.OP] == (1, 2, 3)
        assert STRUCTURE_MECHANISMS[Structure.OP_PA] == (1, 2, 3, 4, 5, 6, 7)

    def test_mechanism_override(self):
        params = SaParams(mechanism_ids=(0, 7))
        assert tuple(m.id for m in params.mechanisms()) == (0, 7)


class TestInitialTemperature:
    def test_printed_value(self):
        assert initial_temperature(100.0, 0.8) == pytest.approx(448.14, abs=0.01)

    def test_acceptance_probability_holds(self):
        t0 = initial_temperature(250.0, 0.8)
        assert math.exp(-250.0 / t0) == pytest.approx(0.8, rel=1e-12)

    def test_rejects_degenerate_input(self):
        with pytest.raises(ValueError):
            initial_temperature(0.0, 0.8)
        with pytest.raises(ValueError):
            initial_temperature(10.0, 1.0)


class TestDecode:
    def test_same_family_pair_one_setup(self):
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 20, 10, ("m0",))]),
            ("j1", 0, 10_000, [("fA", 30, 10, ("m0",))]),
        ])
        enc = Encoding.from_dict({"m0": ("j0.1", "j1.1")})
        schedule = decode(enc, inst)
        assert sum(p.setup_performed for p in schedule.placements) == 1
        assert validate_schedule(inst, schedule) == []

    def test_swapping_same_family_ops_keeps_setup_count(self):
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 20, 10, ("m0",))]),
            ("j1", 0, 10_000, [("fA", 30, 10, ("m0",))]),
        ])
        forward = decode(Encoding.from_dict({"m0": ("j0.1", "j1.1")}), inst)
        backward = decode(Encoding.from_dict({"m0": ("j1.1", "j0.1")}), inst)
        assert (sum(p.setup_performed for p in forward.placements)
                == sum(p.setup_performed for p in backward.placements) == 1)
        assert (forward.by_operation["j0.1"].completion
                != backward.by_operation["j0.1"].completion)

    def test_rejects_missing_or_duplicate_or_ineligible(self):
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 20, 10, ("m0",))]),
            ("j1", 0, 10_000, [("fB", 30, 10, ("m0",))]),
        ], machines=("m0", "m1"))
        with pytest.raises(ValueError, match="cover"):
            decode(Encoding.from_dict({"m0": ("j0.1",)}), inst)
        with pytest.raises(ValueError, match="twice"):
            decode(Encoding.from_dict({"m0": ("j0.1", "j0.1", "j1.1")}), inst)
        with pytest.raises(ValueError, match="eligible"):
            decode(Encoding.from_dict({"m1": ("j0.1",), "m0": ("j1.1",)}), inst)

    def test_no_slot_within_horizon_is_error(self):
        inst = tiny_instance(
            [("j0", 0, 10_000, [("fA", 20, 10, ("m0",))])],
            windows=TimeWindowSet(((-10, -5),)))  # operators never available
        with pytest.raises(NoSlotError):
            decode(Encoding.from_dict({"m0": ("j0.1",)}), inst)

    def test_redecoding_greedy_output_stays_feasible_and_rarely_differs(self):
        # Re-timing the greedy schedule's own sequences is feasible on all
        # 100 frozen draws.  Equality of tardiness is the norm but NOT
        # guaranteed: the encoding drops the greedy commit order, so a
        # contested single-unit column can go to a different machine
        # (3 of these 100 draws come out worse).
        worse = 0
        for seed in range(100):
            inst = generate_instance(GenConfig(
                n_jobs=8 + seed % 10, n_routings=4, n_machines=3,
                n_column_types=4, seed=seed, unchecked=True))
            sched = run_lta(inst)
            redecoded = decode(encode_schedule(inst, sched), inst)
            assert validate_schedule(inst, redecoded) == []
            if (total_tardiness(redecoded, inst)
                    > total_tardiness(sched, inst)):
                worse += 1
        assert worse <= 10


class TestPacks:
    def test_setup_splits_packs(self):
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 20, 10, ("m0",))]),
            ("j1", 0, 10_000, [("fA", 30, 10, ("m0",))]),
            ("j2", 0, 10_000, [("fB", 15, 10, ("m0",))]),
        ])
        schedule = decode(
            Encoding.from_dict({"m0": ("j0.1", "j1.1", "j2.1")}), inst)
        packs = packs_of(inst, schedule, "m0")
        assert [p.operations for p in packs] == [("j0.1", "j1.1"), ("j2.1",)]
        assert [p.family for p in packs] == ["fA", "fB"]

    def test_idle_gap_splits_packs(self):
        # second op not released until after the first completes: forced gap
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 20, 10, ("m0",))]),
            ("j1", 500, 10_000, [("fA", 30, 10, ("m0",))]),
        ])
        schedule = decode(Encoding.from_dict({"m0": ("j0.1", "j1.1")}), inst)
        packs = packs_of(inst, schedule, "m0")
        assert [p.operations for p in packs] == [("j0.1",), ("j1.1",)]

    def test_single_op_is_a_pack(self):
        inst = tiny_instance([("j0", 0, 10_000, [("fA", 20, 10, ("m0",))])])
        schedule = decode(Encoding.from_dict({"m0": ("j0.1",)}), inst)
        (pack,) = packs_of(inst, schedule, "m0")
        assert pack.operations == ("j0.1",)
        assert (pack.start_index, pack.stop_index) == (0, 1)


class TestItemSelection:
    def make_three_late_jobs(self):
        # three independent late jobs with tardiness 10 / 30 / 60
        inst = tiny_instance([
            ("j0", 0, 20, [("fA", 30, 0, ("m0",))]),
            ("j1", 0, 10, [("fB", 40, 0, ("m1",))]),
            ("j2", 0, 40, [("fA", 100, 0, ("m2",))]),
        ], machines=("m0", "m1", "m2"), columns=(("fA", 2), ("fB", 1)))
        enc = Encoding.from_dict({"m0": ("j0.1",), "m1": ("j1.1",),
                                  "m2": ("j2.1",)})
        return inst, decode(enc, inst)

    def test_weights_are_tardiness_shares(self):
        inst, schedule = self.make_three_late_jobs()
        weights = item_selection_weights(inst, schedule, ItemKind.OP)
        assert weights == {"j0.1": 10.0, "j1.1": 30.0, "j2.1": 60.0}
        total = sum(weights.values())
        assert [weights[k] / total for k in ("j0.1", "j1.1", "j2.1")] == [
            pytest.approx(0.1), pytest.approx(0.3), pytest.approx(0.6)]

    def test_pack_weights_sum_member_shares(self):
        inst, schedule = self.make_three_late_jobs()
        weights = item_selection_weights(inst, schedule, ItemKind.PACK)
        by_ops = {p.operations: w for p, w in weights.items()}
        assert by_ops == {("j0.1",): 10.0, ("j1.1",): 30.0, ("j2.1",): 60.0}

    def test_zero_tardiness_items_never_selected(self):
        inst = tiny_instance([
            ("j0", 0, 100_000, [("fA", 30, 0, ("m0",))]),  # on time
            ("j1", 0, 10, [("fB", 40, 0, ("m1",))]),        # late
        ], machines=("m0", "m1"))
        schedule = decode(Encoding.from_dict(
            {"m0": ("j0.1",), "m1": ("j1.1",)}), inst)
        rng = random.Random(0)
        for _ in range(50):
            assert select_first_item(inst, schedule, ItemKind.OP, rng) == "j1.1"

    def test_zero_total_signals_optimum(self):
        inst = tiny_instance([("j0", 0, 100_000, [("fA", 30, 0, ("m0",))])])
        schedule = decode(Encoding.from_dict({"m0": ("j0.1",)}), inst)
        with pytest.raises(ValueError, match="optimal"):
            select_first_item(inst, schedule, ItemKind.OP, random.Random(0))

    def test_multi_op_job_attribution_sums_to_job_tardiness(self):
        inst = tiny_instance([
            ("j0", 0, 50, [("fA", 30, 0, ("m0",)), ("fB", 80, 0, ("m1",))]),
        ], machines=("m0", "m1"))
        schedule = decode(Encoding.from_dict(
            {"m0": ("j0.1",), "m1": ("j0.2",)}), inst)
        weights = item_selection_weights(inst, schedule, ItemKind.OP)
        assert sum(weights.values()) == pytest.approx(
            total_tardiness(schedule, inst))
        # the op finishing on time contributes nothing
        assert weights["j0.1"] == 0.0


class TestProposeNeighbor:
    def test_mechanism_0_reverses_two_op_machine(self):
        inst = tiny_instance([
            ("j0", 0, 10_000, [("fA", 10, 0, ("m0",))]),
            ("j1", 0, 5, [("fA", 10, 0, ("m0",))]),  # late, starts second
        ])
        enc = Encoding.from_dict({"m0": ("j0.1", "j1.1")})
        got = propose_neighbor(inst, enc, MECHANISMS[0], random.Random(0))
        assert got.as_dict()["m0"] == ("j1.1", "j0.1")

    def test_mechanism_7_swaps_adjacent_packs(self):
        inst = tiny_instance([
            ("j0", 0, 5, [("fA", 10, 0, ("m0",))]),
            ("j1", 0, 5, [("fA", 10, 0, ("m0",))]),
            ("j2", 0, 10_000, [("fB", 10, 0, ("m0",))]),
        ])
        enc = Encoding.from_dict({"m0": ("j0.1", "j1.1", "j2.1")})
        got = propose_neighbor(inst, enc, MECHANISMS[7], random.Random(0))
        assert got.as_dict()["m0"] == ("j2.1", "j0.1", "j1.1")

    def test_proposal_failure_when_window_empty(self):
        # the only late op already starts at its release date
        inst = tiny_instance([("j0", 0, 5, [("fA", 10, 0, ("m0",))])])
        enc = Encoding.from_dict({"m0": ("j0.1",)})
        with pytest.raises(ProposalFailed):
            propose_neighbor(inst, enc, MECHANISMS[0], random.Random(0))

    def test_family_constrained_exchange_preserves_family_multisets(self):
        rng = random.Random(5)
        inst = generate_instance(GenConfig(
            n_jobs=36, n_routings=5, n_machines=3, n_column_types=4,
            seed=2, unchecked=True))
        schedule = run_lta(inst)
        enc = encode_schedule(inst, schedule)
        ops = inst.operations_by_id
        proposals = 0
        attempts = 0
        while proposals < 25 and attempts < 200:
            attempts += 1
            try:
                neighbor = propose_neighbor(inst, enc, MECHANISMS[2], rng)
            except ProposalFailed:
                continue
            proposals += 1
            for machine, seq in enc.as_dict().items():
                before = sorted(ops[o].family for o in seq)
                after = sorted(ops[o].family
                               for o in neighbor.as_dict()[machine])
                assert before == after
        assert proposals > 0

    def test_every_mechanism_yields_valid_encodings(self):
        rng = random.Random(17)
        inst = generate_instance(GenConfig(
            n_jobs=36, n_routings=6, n_machines=3, n_column_types=4,
            seed=33, unchecked=True))
        schedule = run_lta(inst)
        enc = encode_schedule(inst, schedule)
        all_ops = sorted(inst.operations_by_id)
        for mech in MECHANISMS:
            produced = 0
            for _ in range(40):
                try:
                    neighbor = propose_neighbor(inst, enc, mech, rng)
                except ProposalFailed:
                    continue
                produced += 1
                seen = sorted(o for _, seq in neighbor.sequences for o in seq)
                assert seen == all_ops
                for machine, seq in neighbor.sequences:
                    for op_id in seq:
                        assert machine in inst.operations_by_id[op_id].eligible
            assert produced > 0, f"mechanism {mech.id} never proposed"


class TestRunSa:
    def make_loaded_instance(self, seed=0):
        # overloaded on purpose: tardiness stays positive through short runs
        return generate_instance(GenConfig(
            n_jobs=36, n_routings=5, n_machines=3, n_column_types=4,
            seed=seed, unchecked=True))

    def test_never_worse_than_initial(self):
        for seed in range(5):
            inst = self.make_loaded_instance(seed)
            initial = run_lta(inst)
            res = run_sa(inst, initial, SaParams(max_iterations=400), seed=seed)
            assert res.tardiness <= res.initial_tardiness
            assert res.tardiness == total_tardiness(res.schedule, inst)
            assert validate_schedule(inst, res.schedule) == []

    def test_bit_for_bit_reproducible(self):
        inst = self.make_loaded_instance(3)
        initial = run_lta(inst)
        for structure in Structure:
            params = SaParams(structure=structure, max_iterations=600)
            a = run_sa(inst, initial, params, seed=11)
            b = run_sa(inst, initial, params, seed=11)
            assert a.schedule == b.schedule
            assert a.trace == b.trace
            assert (a.accepted, a.evaluated, a.iterations) == \
                   (b.accepted, b.evaluated, b.iterations)

    def test_temperature_cools_geometrically(self):
        inst = self.make_loaded_instance(2)
        initial = run_lta(inst)
        params = SaParams(max_iterations=3000, plateau_iterations=50,
                          plateau_acceptances=20)
        res = run_sa(inst, initial, params, seed=2)
        temps = [t for _, t, _, _ in res.trace if t > 0.0]
        distinct = sorted(set(temps), reverse=True)
        assert temps == sorted(temps, reverse=True)  # non-increasing
        for hot, cold in zip(distinct, distinct[1:]):
            assert cold == pytest.approx(hot * params.cooling_factor, rel=1e-9)
        assert distinct[0] == pytest.approx(res.initial_temperature)

    def test_best_trace_non_increasing(self):
        inst = self.make_loaded_instance(2)
        initial = run_lta(inst)
        res = run_sa(inst, initial, SaParams(max_iterations=800), seed=5)
        bests = [b for _, _, _, b in res.trace]
        assert all(x >= y for x, y in zip(bests, bests[1:]))

    def test_optimum_short_circuits(self):
        inst = tiny_instance([("j0", 0, 10_000, [("fA", 10, 5, ("m0",))])])
        initial = run_lta(inst)
        res = run_sa(inst, initial, SaParams(), seed=0)
        assert res.termination == "optimum"
        assert res.iterations == 0
        assert res.schedule == initial

    def test_micro_instances_reach_enumerated_optimum(self):
        # scaled-down sibling of the acceptance micro-optimality gate
        rng = random.Random(99)
        hits = total = 0
        for seed in range(25):
            inst = generate_instance(GenConfig(
                n_jobs=3, n_routings=2, n_machines=2, n_column_types=2,
                seed=seed, unchecked=True))
            if inst.n_operations > 5:
                continue
            best = min(total_tardiness(decode(enc, inst), inst)
                       for enc in all_encodings(inst))
            initial = run_lta(inst)
            res = run_sa(inst, initial,
                         SaParams(max_iterations=2000), seed=1)
            total += 1
            hits += res.tardiness == best
        assert total >= 3
        assert hits == total
