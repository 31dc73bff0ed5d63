import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpmisspec.errors import DimMismatch, ValidationError
from dpmisspec.factors import (ALL_KINDS, DependencyKind, DependencySpec, accuracy_factor,
                               check_deps, dependency_factor, factor_matrix, factor_vector,
                               label_flip_constant, pair_factor)

from conftest import FACTOR_TABLE, table_factor

COMBOS = list(itertools.product((-1, 0, 1), (-1, 0, 1), (-1, 1)))
votes = st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=12)


def test_accuracy_factor_examples():
    assert accuracy_factor([1], 1).tolist() == [1]
    assert accuracy_factor([0, 0], -1).tolist() == [0, 0]
    assert accuracy_factor([1, -1, 0], -1).tolist() == [-1, 1, 0]


@given(votes, st.sampled_from([-1, 1]))
def test_accuracy_factor_is_odd_in_label(row, y):
    assert np.array_equal(accuracy_factor(row, -y), -accuracy_factor(row, y))


@pytest.mark.parametrize("kind,lj,lk,y,expected", [
    ("fixing", -1, 1, 1, 1),
    ("fixing", 0, 1, 1, -1),
    ("reinforcing", 1, 1, 1, 1),
    ("priority", 1, -1, 1, -1),
    ("bolstering", 1, -1, 1, -1),
    ("negated", 1, 1, -1, -1),
])
def test_dependency_factor_examples(kind, lj, lk, y, expected):
    row = [lj, lk]
    assert dependency_factor(DependencySpec(0, 1, kind), row, y) == expected


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_double_abstain_is_zero(kind):
    for y in (-1, 1):
        assert dependency_factor(DependencySpec(0, 1, kind), [0, 0], y) == 0


@pytest.mark.parametrize("kind", [k.value for k in ALL_KINDS])
def test_exhaustive_table(kind):
    for lj, lk, y in COMBOS:
        assert pair_factor(kind, lj, lk, y) == table_factor(kind, lj, lk, y), (lj, lk, y)


# The case conditions as literal predicates; used to show the +1 / -1 cases never overlap.
CASES = {
    "fixing": (lambda a, b, y: a == -y and b == y, lambda a, b, y: a == 0 and b != 0),
    "reinforcing": (lambda a, b, y: a == b == y, lambda a, b, y: a == 0 and b != 0),
    "priority": (lambda a, b, y: a == -y and b == y, lambda a, b, y: a == y and b == -y),
    "bolstering": (lambda a, b, y: a == b == y,
                   lambda a, b, y: (a == b == -y) or (a == -b and a != 0)),
    "negated": (lambda a, b, y: a == -y and b == y,
                lambda a, b, y: (a == y and b == -y) or (a == b and a != 0)),
}


@pytest.mark.parametrize("kind", list(CASES))
def test_cases_are_mutually_exclusive(kind):
    pos, neg = CASES[kind]
    for a, b, y in COMBOS:
        assert not (pos(a, b, y) and neg(a, b, y))
        assert pair_factor(kind, a, b, y) == int(pos(a, b, y)) - int(neg(a, b, y))


def test_label_flip_constants():
    # The posterior-bound proof needs each factor to change by at most 1 when y
    # flips. Measured per kind over all 18 combinations:
    measured = {k.value: label_flip_constant(k) for k in ALL_KINDS}
    from_table = {
        kind: max(abs(table_factor(kind, a, b, y) - table_factor(kind, a, b, -y)) for a, b, y in COMBOS)
        for kind in FACTOR_TABLE
    }
    assert measured == from_table
    assert measured == {"fixing": 1, "reinforcing": 1, "priority": 2, "bolstering": 2, "negated": 2}


def test_label_flip_witnesses():
    # Concrete inputs where the factor changes by 2 on a label flip.
    assert pair_factor("priority", -1, 1, 1) - pair_factor("priority", -1, 1, -1) == 2
    assert pair_factor("bolstering", 1, 1, 1) - pair_factor("bolstering", 1, 1, -1) == 2
    assert pair_factor("negated", -1, 1, 1) - pair_factor("negated", -1, 1, -1) == 2


def test_factor_vector_examples():
    assert factor_vector([1, -1], 1, []).tolist() == [1, -1]
    assert factor_vector([-1, 1], 1, [DependencySpec(0, 1, "fixing")]).tolist() == [-1, 1, 1]


@given(votes, st.sampled_from([-1, 1]), st.sampled_from(list(ALL_KINDS)))
def test_factor_vector_bounded(row, y, kind):
    deps = [DependencySpec(0, 1, kind)] if len(row) > 1 else []
    phi = factor_vector(row, y, deps)
    assert phi.shape == (len(row) + len(deps),)
    assert np.all(np.abs(phi) <= 1)


def test_factor_matrix_matches_factor_vector(rng):
    rows = rng.integers(-1, 2, size=(40, 5))
    ys = np.where(rng.random(40) < 0.5, -1, 1)
    deps = check_deps([DependencySpec(0, 1, "fixing"), DependencySpec(3, 2, "negated"),
                       DependencySpec(4, 1, "bolstering")], 5)
    mat = factor_matrix(rows, ys, deps)
    for i in range(40):
        assert np.array_equal(mat[i], factor_vector(rows[i], int(ys[i]), deps))


def test_spec_rejects_self_pair():
    with pytest.raises(ValidationError):
        DependencySpec(0, 0, "fixing")


def test_bolstering_is_canonicalized():
    assert DependencySpec(3, 1, "bolstering") == DependencySpec(1, 3, "bolstering")
    assert DependencySpec(3, 1, "fixing") != DependencySpec(1, 3, "fixing")


def test_bolstering_table_is_symmetric():
    for a, b, y in COMBOS:
        assert pair_factor("bolstering", a, b, y) == pair_factor("bolstering", b, a, y)


def test_duplicates_and_out_of_range_rejected():
    with pytest.raises(ValidationError):
        check_deps([DependencySpec(0, 1, "fixing"), DependencySpec(0, 1, "fixing")], 2)
    with pytest.raises(ValidationError):
        check_deps([DependencySpec(0, 1, "bolstering"), DependencySpec(1, 0, "bolstering")], 2)
    with pytest.raises(DimMismatch):
        check_deps([DependencySpec(0, 2, "fixing")], 2)


def test_kind_serialization():
    assert [k.value for k in DependencyKind] == ["fixing", "reinforcing", "priority", "bolstering", "negated"]
    assert DependencyKind.parse("NEGATED") is DependencyKind.NEGATED
    with pytest.raises(ValidationError):
        DependencyKind.parse("similar")
    spec = DependencySpec(2, 0, "priority")
    assert DependencySpec.from_dict(spec.to_dict()) == spec


def test_invalid_votes_rejected():
    with pytest.raises(ValidationError):
        accuracy_factor([2], 1)
    with pytest.raises(ValidationError):
        accuracy_factor([1], 0)
