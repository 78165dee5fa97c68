import io
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from pemonitor.conditions import eval_condition, parse_condition
from pemonitor.entropy import PET
from pemonitor.pea import PEA, Transition, idiotypic_pea
from pemonitor.pelts import (
    CONT_T,
    EPSILON,
    START_T,
    STEADY,
    STOP_T,
    NonDeterminismExplosion,
    PeltsState,
    StuckError,
    execute,
    initial_state,
    path_form,
    read_execution,
    step,
)

FIXTURE = [0, 0, 1, 2, 2.87, 2.87, 2.87]


def branching_pea():
    c = parse_condition
    return PEA(
        {"a": c("H = 0 and dH = 0"), "b": c("H > 1 and dH = 0"), "c": c("H > 2 and dH = 0")},
        "a",
        [Transition("a", "x", "b"), Transition("a", "y", "c")],
    )


class TestStep:
    def test_steady(self):
        (s,) = step(PeltsState(0, "virgin", True, 0.0), (1, 0.0), idiotypic_pea())
        assert s.rule == STEADY and s.target == PeltsState(1, "virgin", True, 0.0)
        assert s.label.name is EPSILON

    def test_start(self):
        (s,) = step(PeltsState(1, "virgin", True, 0.0), (2, 0.8), idiotypic_pea())
        assert s.rule == START_T and s.target == PeltsState(2, "virgin", False, 0.8)

    def test_stop(self):
        (s,) = step(PeltsState(4, "virgin", False, 2.87), (5, 2.87), idiotypic_pea())
        assert s.rule == STOP_T
        assert s.label.name == "t0"
        assert s.target == PeltsState(5, "memory", True, 2.87)

    def test_continue(self):
        (s,) = step(PeltsState(4, "virgin", False, 2.0), (5, 2.87), idiotypic_pea())
        assert s.rule == CONT_T and s.target == PeltsState(5, "virgin", False, 2.87)

    def test_stuck(self):
        pea = PEA({"a": parse_condition("H = 0")}, "a")
        with pytest.raises(StuckError, match="stuck: no admissible rule") as info:
            step(initial_state(pea), (3, 1.0), pea)
        assert (info.value.t, info.value.h) == (3, 1.0)

    def test_time_must_increase(self):
        with pytest.raises(ValueError):
            step(PeltsState(2, "virgin", True, 0.0), (2, 0.0), idiotypic_pea())

    def test_nondeterministic_stop_in_declaration_order(self):
        steps = step(PeltsState(1, "a", False, 3.0), (2, 3.0), branching_pea())
        assert [s.label.name for s in steps] == ["x", "y"]


class TestExecute:
    def test_zero_pet(self):
        e = execute(idiotypic_pea(), PET.from_values([0.0] * 6))
        assert set(e.rules) == {STEADY}
        assert all(q.rho == "virgin" and q.b and q.h == 0 for q in e.states)

    def test_fixture(self):
        e = execute(idiotypic_pea(), PET.from_values(FIXTURE))
        assert e.states[0] == PeltsState(0, "virgin", True, 0.0)
        assert e.rules == (STEADY, STEADY, START_T, CONT_T, CONT_T, STOP_T, STEADY)
        assert [q.rho if q.b else "w" for q in e.states] == [
            "virgin", "virgin", "virgin", "w", "w", "w", "memory", "memory"
        ]
        assert [lb.name for lb in e.labels].count("t0") == 1
        assert path_form(e) == ("ends-steady", 1)

    def test_truncated_mid_rise(self):
        e = execute(idiotypic_pea(), PET.from_values(FIXTURE[:4]))
        assert path_form(e) == ("ends-in-transition", 0)

    def test_all_steady_form(self):
        assert path_form(execute(idiotypic_pea(), PET.from_values([0.0] * 3))) == ("ends-steady", 0)

    def test_enumerate_all(self):
        pet = PET.from_values([0.0, 3.0, 3.0, 3.0])
        runs = execute(branching_pea(), pet, policy="enumerate-all")
        assert len(runs) == 2
        assert {r.states[-1].rho for r in runs} == {"b", "c"}
        first = execute(branching_pea(), pet)
        assert first.states[-1].rho == "b"

    def test_cap(self):
        c = parse_condition
        pea = PEA({"a": c("H = 0 and dH = 0"), "b": c("dH = 0")}, "a",
                  [Transition("a", "x", "b"), Transition("a", "y", "b"),
                   Transition("b", "u", "b"), Transition("b", "v", "b")])
        pet = PET.from_values([1.0, 1.0] + [2.0, 2.0, 3.0, 3.0] * 3)
        with pytest.raises(NonDeterminismExplosion, match="non-determinism explosion"):
            execute(pea, pet, policy="enumerate-all", cap=8)

    def test_bad_policy_and_empty(self):
        with pytest.raises(ValueError):
            execute(idiotypic_pea(), PET.from_values([0.0]), policy="random")
        with pytest.raises(ValueError):
            execute(idiotypic_pea(), PET((), ()))

    def test_csv_round_trip(self):
        e = execute(idiotypic_pea(), PET.from_values(FIXTURE))
        text = e.to_csv()
        assert text.splitlines()[0] == "t,rho,b,h,label"
        assert text.splitlines()[7] == "6,memory,true,2.87,t0"
        back = read_execution(io.StringIO(text))
        assert back.states == e.states and back.labels == e.labels
        assert back.to_csv() == text


pet_values = st.lists(st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.87]), min_size=1, max_size=30)


@settings(max_examples=150, deadline=None)
@given(pet_values)
def test_round_trip_pet(values):
    pet = PET.from_values(values)
    assert execute(idiotypic_pea(), pet).pet() == pet


@settings(max_examples=150, deadline=None)
@given(pet_values)
def test_label_discipline_and_monotone_time(values):
    e = execute(idiotypic_pea(), PET.from_values(values))
    for prev, nxt, lb, rule in zip(e.states, e.states[1:], e.labels, e.rules):
        assert nxt.t > prev.t
        flips = (not prev.b) and nxt.b
        assert (lb.name is not EPSILON) == flips == (rule == STOP_T)


def test_rule_exclusivity_grid():
    pea = idiotypic_pea()
    hs = [i * 0.1 for i in range(50)]
    hdots = [-2.5 + i * 0.1 for i in range(50)]
    for rho, b, h1, hdot in product(pea.states, (True, False), hs, hdots):
        q = PeltsState(1, rho, b, h1 - hdot)
        steps = step(q, (2, h1), pea)
        guards = {
            STEADY: b and eval_condition(pea.condition(rho), h1, hdot),
            START_T: b and not eval_condition(pea.condition(rho), h1, hdot) and bool(pea.successors(rho)),
            CONT_T: (not b) and not any(eval_condition(pea.condition(t.target), h1, hdot) for t in pea.successors(rho)),
            STOP_T: (not b) and any(eval_condition(pea.condition(t.target), h1, hdot) for t in pea.successors(rho)),
        }
        assert sum(guards.values()) == 1
        assert {s.rule for s in steps} == {r for r, ok in guards.items() if ok}
