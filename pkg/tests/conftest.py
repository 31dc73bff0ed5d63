"""Shared brute-force oracles.

Everything here is written with plain Python loops, ``math.exp`` and a
hand-transcribed factor table so that it shares no code path with the
vectorized implementation it checks.
"""

import itertools
import math

import numpy as np
import pytest

# Nonzero entries of each dependency factor, keyed by (lambda_j, lambda_k, y).
# Transcribed case by case from the factor definitions; all other entries are 0.
FACTOR_TABLE = {
    "fixing": {
        (-1, 1, 1): 1, (0, -1, 1): -1, (0, 1, 1): -1,
        (1, -1, -1): 1, (0, -1, -1): -1, (0, 1, -1): -1,
    },
    "reinforcing": {
        (1, 1, 1): 1, (0, -1, 1): -1, (0, 1, 1): -1,
        (-1, -1, -1): 1, (0, -1, -1): -1, (0, 1, -1): -1,
    },
    "priority": {
        (-1, 1, 1): 1, (1, -1, 1): -1,
        (1, -1, -1): 1, (-1, 1, -1): -1,
    },
    "bolstering": {
        (1, 1, 1): 1, (-1, -1, 1): -1, (1, -1, 1): -1, (-1, 1, 1): -1,
        (-1, -1, -1): 1, (1, 1, -1): -1, (1, -1, -1): -1, (-1, 1, -1): -1,
    },
    "negated": {
        (-1, 1, 1): 1, (1, -1, 1): -1, (1, 1, 1): -1, (-1, -1, 1): -1,
        (1, -1, -1): 1, (-1, 1, -1): -1, (1, 1, -1): -1, (-1, -1, -1): -1,
    },
}


def table_factor(kind, lj, lk, y):
    return FACTOR_TABLE[kind].get((lj, lk, y), 0)


def brute_phi(row, y, deps):
    """(deps given as (j, k, kind-string) triples)"""
    phi = [v * y for v in row]
    phi += [table_factor(kind, row[j], row[k], y) for j, k, kind in deps]
    return phi


def _dep_triples(params):
    return [(d.j, d.k, d.kind.value) for d in params.deps]


def brute_log_weight(params, row, y):
    vec = list(params.mu1) + list(params.mu2)
    return math.fsum(w * f for w, f in zip(vec, brute_phi(row, y, _dep_triples(params))))


def brute_joint(params):
    """{(row, y): probability} by explicit summation over all configurations."""
    cells = {(row, y): math.exp(brute_log_weight(params, row, y))
             for row in itertools.product((-1, 0, 1), repeat=params.m) for y in (-1, 1)}
    z = math.fsum(cells.values())
    return {key: w / z for key, w in cells.items()}


def brute_log_likelihood(params, data):
    joint = brute_joint(params)
    return math.fsum(math.log(joint[(tuple(int(v) for v in row), 1)] + joint[(tuple(int(v) for v in row), -1)])
                     for row in data)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


# Filled by test_acceptance.py: criterion number -> (passed, detail line).
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
