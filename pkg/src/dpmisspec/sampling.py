"""Draw synthetic ``(Lambda, y)`` datasets from a known label model.

Random numbers come from numpy's PCG64 bit generator seeded with the integer
``seed``. ``sample_exact`` consumes exactly one uniform per row, in row order,
so row ``i`` is determined by the ``i``-th draw of the stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, softmax

from . import model as lm
from .errors import ValidationError
from .factors import ALL_KINDS, VOTES, DependencySpec, _pair_factor


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SyntheticDataset:
    labels: np.ndarray  # (n, m) int8 votes
    truth: np.ndarray  # (n,) int8 labels
    source_params: lm.ModelParams
    seed: int

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def save(self, directory):
        from .ingestion import save_dataset
        return save_dataset(self, directory)

    @classmethod
    def load(cls, directory) -> "SyntheticDataset":
        from .ingestion import load_dataset
        return load_dataset(directory)

    def __eq__(self, other):
        if not isinstance(other, SyntheticDataset):
            return NotImplemented
        return (self.seed == other.seed and self.source_params == other.source_params
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.truth, other.truth))


def sample_exact(params: lm.ModelParams, n: int, seed: int) -> SyntheticDataset:
    """Draw ``n`` i.i.d. rows by inverse CDF over the fully enumerated joint."""
    if n < 0:
        raise ValidationError(f"n must be nonnegative, got {n}")
    table = lm.joint_table(params)  # (3**m, 2), columns y = -1, +1
    cdf = np.cumsum(table.ravel())
    u = make_rng(seed).random(n) * cdf[-1]
    cells = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    rows = lm.all_rows(params.m)[cells // 2]
    truth = np.where(cells % 2 == 1, 1, -1).astype(np.int8)
    return SyntheticDataset(np.array(rows, dtype=np.int8), truth, params, int(seed))


class GibbsKernel:
    """Single-site Gibbs updates for many chains at once.

    Chain states are ``lam`` of shape ``(C, m)`` and ``y`` of shape ``(C,)``.
    A sweep visits ``lambda_1 .. lambda_m`` and then ``y``.
    """

    def __init__(self, params: lm.ModelParams):
        self.params = params
        self.incident = [[] for _ in range(params.m)]
        for idx, spec in enumerate(params.deps):
            self.incident[spec.j].append((idx, spec))
            self.incident[spec.k].append((idx, spec))
        self._votes = np.array(VOTES, dtype=np.int8)

    def lambda_conditional(self, lam, y, j) -> np.ndarray:
        """``p(lambda_j = v | rest)`` for v in (-1, 0, +1); shape ``(C, 3)``."""
        mu1, mu2 = self.params.mu1, self.params.mu2
        lam = np.asarray(lam, dtype=np.int8)
        y = np.asarray(y, dtype=np.int8)
        logits = np.empty((lam.shape[0], 3))
        for col, v in enumerate(self._votes):
            energy = mu1[j] * float(v) * y
            for idx, spec in self.incident[j]:
                lj = v if spec.j == j else lam[:, spec.j]
                lk = v if spec.k == j else lam[:, spec.k]
                energy = energy + mu2[idx] * _pair_factor(spec.kind, lj, lk, y)
            logits[:, col] = energy
        return softmax(logits, axis=1)

    def label_conditional(self, lam) -> np.ndarray:
        """``p(y = +1 | lambda)`` per chain."""
        return expit(lm.posterior_logit(self.params, lam))

    def sweep(self, lam, y, rng: np.random.Generator):
        """One in-place scan over all sites; consumes ``m + 1`` uniform vectors."""
        n_chains = lam.shape[0]
        for j in range(self.params.m):
            probs = self.lambda_conditional(lam, y, j)
            u = rng.random(n_chains)
            pick = (u >= probs[:, 0]).astype(np.int8) + (u >= probs[:, 0] + probs[:, 1])
            lam[:, j] = pick - 1
        u = rng.random(n_chains)
        y[:] = np.where(u < self.label_conditional(lam), 1, -1)

    def init_chains(self, n_chains, rng: np.random.Generator):
        lam = rng.integers(-1, 2, size=(n_chains, self.params.m)).astype(np.int8)
        y = np.where(rng.random(n_chains) < 0.5, 1, -1).astype(np.int8)
        return lam, y


def gibbs_sample(params: lm.ModelParams, n: int, burn_in: int, thin: int, seed: int,
                 chains: int = 64) -> SyntheticDataset:
    """Draw ``n`` rows with single-site Gibbs sampling, for any ``m``.

    ``chains`` independent chains run side by side; each discards ``burn_in``
    sweeps and then records its state every ``thin`` sweeps. Recorded states
    are interleaved step by step (all chains at step 1, then step 2, ...) and
    truncated to ``n`` rows.
    """
    if burn_in < 1 or thin < 1:
        raise ValidationError("burn_in and thin must both be >= 1")
    if n < 0 or chains < 1:
        raise ValidationError("n must be >= 0 and chains >= 1")
    rng = make_rng(seed)
    kernel = GibbsKernel(params)
    lam, y = kernel.init_chains(chains, rng)
    steps = -(-n // chains)
    rows = np.empty((steps * chains, params.m), dtype=np.int8)
    truth = np.empty(steps * chains, dtype=np.int8)
    for _ in range(burn_in):
        kernel.sweep(lam, y, rng)
    for step in range(steps):
        for _ in range(thin):
            kernel.sweep(lam, y, rng)
        rows[step * chains:(step + 1) * chains] = lam
        truth[step * chains:(step + 1) * chains] = y
    return SyntheticDataset(rows[:n].copy(), truth[:n].copy(), params, int(seed))


def empirical_joint(dataset: SyntheticDataset) -> np.ndarray:
    """Empirical frequencies laid out like :func:`model.joint_table`."""
    m = dataset.source_params.m
    counts = np.zeros((3 ** m, 2))
    if dataset.n:
        np.add.at(counts, (lm.row_codes(dataset.labels), (dataset.truth > 0).astype(int)), 1.0)
        counts /= dataset.n
    return counts


def random_params(rng: np.random.Generator, m: int, n_deps: int = 0, low=-2.0, high=2.0,
                  kinds=None) -> lm.ModelParams:
    """Uniform random parameters with ``n_deps`` distinct random dependencies."""
    kinds = tuple(kinds or ALL_KINDS)
    deps = []
    seen = set()
    attempts = 0
    while len(deps) < n_deps:
        attempts += 1
        if attempts > 1000:
            raise ValidationError(f"cannot draw {n_deps} distinct dependencies for m = {m}")
        j, k = rng.choice(m, size=2, replace=False)
        spec = DependencySpec(int(j), int(k), kinds[int(rng.integers(len(kinds)))])
        if spec not in seen:
            seen.add(spec)
            deps.append(spec)
    mu1 = rng.uniform(low, high, size=m)
    mu2 = rng.uniform(low, high, size=len(deps))
    return lm.ModelParams(mu1, mu2, tuple(deps))

