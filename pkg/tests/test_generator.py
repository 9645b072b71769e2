import dataclasses
from importlib import resources
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boa_nurse.generator import GeneratorSpec, SUITES, generate, write_suite
from boa_nurse.instance import PatternKind, dumps_instance, validate
from boa_nurse.oracle import brute_force_optimum
from boa_nurse.rules import RuleId, decode


def test_default_catalog_has_126_patterns():
    inst = generate(GeneratorSpec(n_nurses=30, grades=3, seed=0))
    assert inst.n_patterns == comb(7, 4) + comb(7, 5) + comb(7, 3) + comb(7, 4) == 126
    assert all(p.kind is not PatternKind.COMBINED for p in inst.patterns)


def test_zero_tightness_means_zero_demand_and_random_decode_is_feasible():
    inst = generate(GeneratorSpec(n_nurses=12, demand_tightness=0.0, seed=3))
    assert not inst.demand.any()
    roster = decode(inst, [RuleId.RANDOM] * 12, rng=np.random.default_rng(0))
    assert roster.feasible


def test_same_spec_gives_identical_bytes():
    spec = GeneratorSpec(n_nurses=10, seed=42, combined_nurses=2)
    assert dumps_instance(generate(spec)) == dumps_instance(generate(spec))
    assert dumps_instance(generate(spec)) != dumps_instance(generate(dataclasses.replace(spec, seed=43)))


specs = st.builds(
    GeneratorSpec,
    n_nurses=st.integers(1, 12),
    grades=st.integers(1, 4),
    day_fraction=st.floats(0, 1),
    D_range=st.tuples(st.integers(1, 4), st.integers(4, 7)),
    N_range=st.tuples(st.integers(1, 3), st.integers(3, 7)),
    demand_tightness=st.floats(0, 1.5),
    cost_profile=st.sampled_from(["mixture", "uniform", "zero"]),
    seed=st.integers(0, 2**31),
    combined_nurses=st.integers(0, 1),
)


@settings(max_examples=60, deadline=None)
@given(specs)
def test_every_generated_instance_is_valid(spec):
    inst = generate(spec)
    assert validate(inst) == []
    assert inst.n_nurses == spec.n_nurses
    assert (np.diff(inst.demand, axis=1) >= 0).all()
    assert all(0 <= c <= 100 for n in inst.nurses for c in n.preference_cost.values())


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("seed", range(4))
def test_slack_instances_have_a_feasible_optimum(n, seed):
    spec = GeneratorSpec(n_nurses=n, seed=100 + seed, demand_tightness=0.9,
                         D_range=(6, 6), N_range=(6, 6), day_fraction=0.5)
    assert brute_force_optimum(generate(spec)).undercover_units == 0


def test_combined_patterns_only_when_requested():
    inst = generate(GeneratorSpec(n_nurses=8, seed=1, combined_nurses=3, B_range=(4, 5)))
    combined = [p for p in inst.patterns if p.kind is PatternKind.COMBINED]
    assert combined
    special = [n for n in inst.nurses if n.both is not None]
    assert len(special) == 3
    for p in combined:
        last_day = max(k for k in range(7) if p.covers[k])
        first_night = min(k for k in range(7) if p.covers[7 + k])
        assert last_day < first_night


@pytest.mark.parametrize("name", sorted(SUITES))
def test_shipped_suites_match_the_generator(tmp_path, name):
    written = write_suite(name, tmp_path)
    assert len(written) == 12
    shipped = resources.files("boa_nurse") / "suites" / name
    for fname in written:
        assert (tmp_path / fname).read_text() == (shipped / fname).read_text()


@pytest.mark.parametrize("kwargs", [
    dict(n_nurses=0), dict(day_fraction=1.5), dict(D_range=(0, 3)), dict(N_range=(5, 4)),
    dict(demand_tightness=-1), dict(cost_profile="lognormal"), dict(combined_nurses=99),
    dict(grade_mix=(1.0,)),
])
def test_spec_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        GeneratorSpec(**kwargs)
