"""Friedman test, Nemenyi post-hoc comparison, and six-category verdicts.

Scores enter as an n x k block (n measurements, k algorithms). Lower-better
measurements are first mapped through s* = 1/(1+s) so that every row is
higher-better, then each row is ranked 1..k (best gets 1, ties averaged).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .exceptions import DegenerateInput

HIGHER = "higher"
LOWER = "lower"

BETTER_HIGH = "++"
BETTER = "+"
NEUTRAL = "0"
WORSE = "-"
WORSE_HIGH = "--"


@dataclass(frozen=True)
class ScoreBlock:
    algorithms: tuple[str, ...]
    measurements: tuple[str, ...]
    values: np.ndarray  # n x k
    orientations: tuple[str, ...]  # per measurement row

    def __post_init__(self):
        n, k = self.values.shape
        if k != len(self.algorithms) or n != len(self.measurements):
            raise DegenerateInput("values shape inconsistent with labels")
        if k < 2 or n < 1:
            raise DegenerateInput("need >= 2 algorithms and >= 1 measurement")
        if len(self.orientations) != n:
            raise DegenerateInput("need one orientation per measurement")
        if any(o not in (HIGHER, LOWER) for o in self.orientations):
            raise DegenerateInput("orientation must be 'higher' or 'lower'")


@dataclass(frozen=True)
class RankMatrix:
    ranks: np.ndarray  # n x k, each row a tie-averaged permutation of 1..k
    algorithms: tuple[str, ...]

    @property
    def mean_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def k(self) -> int:
        return self.ranks.shape[1]


@dataclass(frozen=True)
class SignificanceTable:
    algorithms: tuple[str, ...]
    verdicts: list[list[str]]  # row vs column; diagonal empty
    p_values: np.ndarray
    mean_ranks: np.ndarray

    def to_markdown(self) -> str:
        header = "| | " + " | ".join(self.algorithms) + " |"
        sep = "|---" * (len(self.algorithms) + 1) + "|"
        lines = [header, sep]
        for i, name in enumerate(self.algorithms):
            cells = [self.verdicts[i][j] if i != j else ""
                     for j in range(len(self.algorithms))]
            lines.append(f"| {name} | " + " | ".join(cells) + " |")
        return "\n".join(lines)

    def to_csv_rows(self) -> list[list[str]]:
        rows = [[""] + list(self.algorithms)]
        for i, name in enumerate(self.algorithms):
            rows.append([name] + [self.verdicts[i][j] if i != j else ""
                                  for j in range(len(self.algorithms))])
        return rows


def transform_lower_better(s: np.ndarray) -> np.ndarray:
    """Map a non-negative lower-is-better score into (0, 1], higher-better."""
    return 1.0 / (1.0 + s)


def normalize_scores(block: ScoreBlock) -> ScoreBlock:
    keep_rows = []
    values = []
    for i, orientation in enumerate(block.orientations):
        row = block.values[i]
        if orientation == LOWER:
            if np.any(row < 0):
                warnings.warn(
                    f"measurement {block.measurements[i]!r} has negative "
                    "lower-is-better scores; row dropped")
                continue
            row = transform_lower_better(row)
        keep_rows.append(i)
        values.append(row)
    if not values:
        raise DegenerateInput("no measurement rows survived normalization")
    return ScoreBlock(
        block.algorithms,
        tuple(block.measurements[i] for i in keep_rows),
        np.array(values),
        tuple(HIGHER for _ in keep_rows),
    )


def rank_rows(block: ScoreBlock) -> RankMatrix:
    if any(o != HIGHER for o in block.orientations):
        raise DegenerateInput("rank_rows expects higher-better rows; "
                              "run normalize_scores first")
    ranks = np.apply_along_axis(
        lambda row: stats.rankdata(-row, method="average"), 1, block.values)
    return RankMatrix(ranks, block.algorithms)


def friedman_test(ranks: RankMatrix, tie_correction: bool = False
                  ) -> tuple[float, float]:
    n, k = ranks.n, ranks.k
    if n < 2 or k < 2:
        raise DegenerateInput("Friedman needs n >= 2 and k >= 2")
    mean = ranks.mean_ranks
    stat = 12.0 * n / (k * (k + 1)) * float(np.sum(mean ** 2)) - 3.0 * n * (k + 1)
    if tie_correction:
        ties = 0.0
        for row in ranks.ranks:
            _, counts = np.unique(row, return_counts=True)
            ties += float(np.sum(counts ** 3 - counts))
        correction = 1.0 - ties / (n * k * (k ** 2 - 1))
        if correction <= 0:
            return 0.0, 1.0  # every row fully tied
        stat = stat / correction
    stat = max(stat, 0.0)
    return stat, float(stats.chi2.sf(stat, k - 1))


def nemenyi_pairwise(ranks: RankMatrix) -> np.ndarray:
    """Symmetric p-value matrix from the studentized-range distribution."""
    n, k = ranks.n, ranks.k
    if n < 2 or k < 2:
        raise DegenerateInput("Nemenyi needs n >= 2 and k >= 2")
    mean = ranks.mean_ranks
    se = np.sqrt(k * (k + 1) / (6.0 * n))
    p = np.ones((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            q = abs(mean[a] - mean[b]) / se * np.sqrt(2.0)
            value = float(stats.studentized_range.sf(q, k, np.inf))
            p[a, b] = p[b, a] = min(max(value, 0.0), 1.0)
    return p


def critical_difference(k: int, n: int, alpha: float = 0.05) -> float:
    q = float(stats.studentized_range.ppf(1.0 - alpha, k, np.inf)) / np.sqrt(2.0)
    return q * np.sqrt(k * (k + 1) / (6.0 * n))


def classify_pairs(p_values: np.ndarray, mean_ranks: np.ndarray,
                   algorithms: tuple[str, ...]) -> SignificanceTable:
    k = len(algorithms)
    verdicts = [["" for _ in range(k)] for _ in range(k)]
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            p = p_values[a, b]
            better = mean_ranks[a] < mean_ranks[b]  # lower mean rank wins
            if p <= 0.01:
                verdicts[a][b] = BETTER_HIGH if better else WORSE_HIGH
            elif p <= 0.05:
                verdicts[a][b] = BETTER if better else WORSE
            else:
                verdicts[a][b] = NEUTRAL
    return SignificanceTable(algorithms, verdicts, p_values, mean_ranks)


def significance_table(block: ScoreBlock,
                       tie_correction: bool = False) -> SignificanceTable:
    """normalize -> rank -> Friedman -> Nemenyi -> six-category verdicts."""
    ranks = rank_rows(normalize_scores(block))
    friedman_test(ranks, tie_correction)  # raises on degenerate input
    p = nemenyi_pairwise(ranks)
    return classify_pairs(p, ranks.mean_ranks, block.algorithms)
