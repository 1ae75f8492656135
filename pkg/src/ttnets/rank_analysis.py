"""Rank certificates and Monte-Carlo checks of the format separations.

Three claims are checked by sampling:

* ``theorem1``  -- almost every tensor train with modes n and ranks r has
  a paired-mode (odd rows / even columns) matricization of rank at least
  ``q**(d/2)`` with ``q = min(n, r)``; by the matricization lower bound
  this forces separable-sum (CP) rank >= ``q**(d/2)``.
* ``hypothesis1`` -- the same statement restricted to trains whose
  interior cores are all equal (the weight-shared, RNN-like class).
* ``ht-bounds`` -- rank transfer between the chain and tree formats:
  a train of rank r has tree ranks <= r**2, and a tree of rank r has
  train ranks <= r**(log2(d)/2).

"Almost every" is operationalized as "every Monte-Carlo sample
satisfies the bound"; a single failing sample is reported rather than
tolerated, since it far more likely signals a tolerance bug than a
measure-zero event.  Per-sample generator streams are derived from
(seed, sample index), so results do not depend on evaluation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .decompositions import (
    ht_random,
    ranks_from_dense,
    tt_equal_cores_random,
    tt_random,
    tt_to_dense,
    ht_to_dense,
)
from .svd import DEFAULT_REL_TOL, numerical_rank
from .tensor import as_dense, matricize, odd_even_split

__all__ = [
    "BoundReport",
    "CERT_REL_TOL",
    "REPORT_CSV_HEADER",
    "SeparationReport",
    "cp_rank_lower_bound",
    "sample_rng",
    "verify_ht_tt_bounds",
    "verify_hypothesis1",
    "verify_theorem1",
]

# Random core products accumulate conditioning: the smallest genuine
# singular value of the sampled matricizations drifts down to ~1e-11 of
# the largest (measured over ~10^4 samples at d=6), while double
# precision noise sits near 1e-15.  The certificate threshold lives in
# that gap and is recorded in every report.
CERT_REL_TOL = 1e-12

REPORT_CSV_HEADER = ["sample", "seed", "d", "n", "r", "q", "threshold", "observed_rank", "pass"]


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one sample, derived from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(index))))


def cp_rank_lower_bound(x, splits, rel_tol: float = DEFAULT_REL_TOL) -> int:
    """Max matricization rank over the given splits.

    Every matricization of a separable sum with r terms has matrix rank
    at most r, so the returned value is a certified lower bound on the
    CP rank of ``x``.
    """
    x = as_dense(x)
    best = 0
    for split in splits:
        best = max(best, numerical_rank(matricize(x, split), rel_tol))
    return best


@dataclass
class SeparationReport:
    """Per-sample paired-mode ranks versus the q**(d/2) threshold."""

    d: int
    n: int
    r: int
    q: int
    threshold: int
    seed: int
    rel_tol: float
    observed_ranks: list[int] = field(default_factory=list)

    @property
    def num_samples(self) -> int:
        return len(self.observed_ranks)

    @property
    def num_satisfying(self) -> int:
        return sum(rank >= self.threshold for rank in self.observed_ranks)

    @property
    def all_pass(self) -> bool:
        return self.num_satisfying == self.num_samples

    def rows(self):
        for i, rank in enumerate(self.observed_ranks):
            yield [i, self.seed, self.d, self.n, self.r, self.q, self.threshold,
                   rank, int(rank >= self.threshold)]


@dataclass
class BoundReport:
    """Per-sample max ranks in the other format versus the transfer bound."""

    direction: str  # 'tt2ht' or 'ht2tt'
    d: int
    n: int
    r: int
    bound: int
    seed: int
    rel_tol: float
    observed_max_ranks: list[int] = field(default_factory=list)

    @property
    def num_samples(self) -> int:
        return len(self.observed_max_ranks)

    @property
    def observed_max(self) -> int:
        return max(self.observed_max_ranks, default=0)

    @property
    def violations(self) -> int:
        return sum(rank > self.bound for rank in self.observed_max_ranks)

    @property
    def all_pass(self) -> bool:
        return self.violations == 0

    def rows(self):
        # Same column contract as SeparationReport; threshold holds the
        # bound and pass means observed <= bound.
        for i, rank in enumerate(self.observed_max_ranks):
            yield [i, self.seed, self.d, self.n, self.r, self.r, self.bound,
                   rank, int(rank <= self.bound)]


def write_report_csv(path, reports) -> None:
    """Write one or more reports to a single CSV file."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_HEADER)
        for report in reports:
            writer.writerows(report.rows())


def verify_theorem1(d: int, n: int, r: int, num_samples: int, seed: int,
                    rel_tol: float = CERT_REL_TOL) -> SeparationReport:
    """Sample Gaussian tensor trains and check the separation threshold."""
    d, n, r = int(d), int(n), int(r)
    if d < 2 or d % 2:
        raise ValueError(f"the separation check needs an even d >= 2, got {d}")
    q = min(n, r)
    report = SeparationReport(d=d, n=n, r=r, q=q, threshold=q ** (d // 2),
                              seed=int(seed), rel_tol=rel_tol)
    split = odd_even_split(d)
    for i in range(int(num_samples)):
        tt = tt_random((n,) * d, (r,) * (d - 1), sample_rng(seed, i))
        mat = matricize(tt_to_dense(tt), split)
        report.observed_ranks.append(numerical_rank(mat, rel_tol))
    return report


def verify_hypothesis1(d: int, n_range, r_range, samples_per_cell: int, seed: int,
                       rel_tol: float = CERT_REL_TOL) -> list[SeparationReport]:
    """Same check on the equal-interior-core class, one report per (n, r) cell."""
    d = int(d)
    if d < 4 or d % 2:
        raise ValueError(f"the equal-core check needs an even d >= 4, got {d}")
    split = odd_even_split(d)
    reports = []
    for cell, (n, r) in enumerate((n, r) for n in n_range for r in r_range):
        q = min(int(n), int(r))
        report = SeparationReport(d=d, n=int(n), r=int(r), q=q,
                                  threshold=q ** (d // 2), seed=int(seed),
                                  rel_tol=rel_tol)
        for i in range(int(samples_per_cell)):
            tt = tt_equal_cores_random(d, n, r, sample_rng(seed, cell * 1_000_003 + i))
            mat = matricize(tt_to_dense(tt), split)
            report.observed_ranks.append(numerical_rank(mat, rel_tol))
        reports.append(report)
    return reports


def verify_ht_tt_bounds(d: int, n: int, r: int, num_samples: int, seed: int,
                        direction: str = "tt2ht",
                        rel_tol: float = CERT_REL_TOL) -> BoundReport:
    """Check the chain<->tree rank transfer bounds on random samples.

    ``tt2ht``: samples rank-r trains, measures max tree-node rank,
    bound r**2.  ``ht2tt``: samples trees with all node ranks r,
    measures max prefix rank, bound r**(log2(d)/2).
    """
    d, n, r = int(d), int(n), int(r)
    if d < 2 or d & (d - 1):
        raise ValueError(f"tree comparisons need d a power of two, got {d}")
    if direction not in ("tt2ht", "ht2tt"):
        raise ValueError(f"direction must be 'tt2ht' or 'ht2tt', got {direction!r}")
    if direction == "tt2ht":
        bound = r * r
    else:
        bound = round(r ** (np.log2(d) / 2.0))
    report = BoundReport(direction=direction, d=d, n=n, r=r, bound=bound,
                         seed=int(seed), rel_tol=rel_tol)
    for i in range(int(num_samples)):
        rng = sample_rng(seed, i)
        if direction == "tt2ht":
            dense = tt_to_dense(tt_random((n,) * d, (r,) * (d - 1), rng))
            ranks = ranks_from_dense(dense, "ht", rel_tol)
        else:
            dense = ht_to_dense(ht_random((n,) * d, r, rng))
            ranks = ranks_from_dense(dense, "tt", rel_tol)
        report.observed_max_ranks.append(int(ranks.max()))
    return report
