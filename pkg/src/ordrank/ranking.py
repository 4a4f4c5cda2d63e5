"""Counting-based ranking from paired-comparison outcomes.

Items are scored by summing their observed comparison outcomes (raw ordinal
values, or their signs after binarization) and ranked by score.  The module
also provides the ranking-error metric (fraction of misordered pairs, ties
counting as errors), the expected score vectors, and the closed-form
normal-limit predictors for the two-item success probabilities and the
n-item expected ranking error.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .model import CorruptDataError, OrdinalModel

__all__ = [
    "PreferenceVector",
    "ComparisonDataset",
    "ScorePair",
    "two_item_metrics",
    "count_scores",
    "kendall_tau",
    "expected_scores",
    "asymptotic_two_item",
    "asymptotic_tau",
    "dataset_to_csv",
    "dataset_from_csv",
]


@dataclass(frozen=True)
class PreferenceVector:
    """True item preferences theta; pairwise difference theta_i - theta_j is
    the gamma fed to the comparison model."""

    theta: tuple[float, ...]
    centered: bool = False

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 1 or th.size < 1 or not np.all(np.isfinite(th)):
            raise ValueError("theta must be a finite 1-d vector")
        if self.centered and abs(th.sum()) > 1e-10:
            raise ValueError(f"centered theta sums to {th.sum()!r}")
        object.__setattr__(self, "theta", tuple(float(v) for v in th))

    @classmethod
    def equally_spaced(cls, n: int, gap: float) -> "PreferenceVector":
        """n items, descending, adjacent difference ``gap``, centered at 0."""
        if n < 2:
            raise ValueError("need at least two items")
        th = gap * ((n - 1) / 2.0 - np.arange(n))
        th -= th.mean()  # exact centering against float drift
        return cls(tuple(th), centered=True)

    @property
    def n(self) -> int:
        return len(self.theta)

    def gaps(self) -> np.ndarray:
        """Antisymmetric matrix of pairwise differences theta_i - theta_j."""
        th = np.asarray(self.theta)
        return th[:, None] - th[None, :]


@dataclass(frozen=True)
class ComparisonDataset:
    """Observed outcomes per unordered item pair, oriented i-before-j for
    i < j (the reverse orientation is the negation).  Pairs may be absent
    (incomplete graph); present pairs all carry ``rounds`` outcomes."""

    n: int
    rounds: int
    outcomes: dict[tuple[int, int], np.ndarray] = field(compare=False)

    def __post_init__(self):
        if self.n < 2 or self.rounds < 1:
            raise ValueError("need n >= 2 items and at least one round")
        cleaned = {}
        for (i, j), ys in self.outcomes.items():
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad pair ({i}, {j}) for n={self.n}")
            arr = np.asarray(ys, dtype=np.int64)
            if arr.shape != (self.rounds,):
                raise ValueError(
                    f"pair ({i}, {j}) has {arr.size} outcomes, expected {self.rounds}"
                )
            if np.any(arr == 0):
                raise CorruptDataError(f"pair ({i}, {j}) contains a zero outcome")
            cleaned[(i, j)] = arr
        object.__setattr__(self, "outcomes", cleaned)

    def is_complete(self) -> bool:
        return len(self.outcomes) == self.n * (self.n - 1) // 2


@dataclass(frozen=True)
class ScorePair:
    """Per-item counting scores from raw ordinal outcomes and from their
    signs, normalized by the round count.

    Integer totals are kept alongside: they are exact, so their per-item sum
    is exactly zero by antisymmetry, while the normalized views carry the
    usual division rounding.
    """

    ordinal_totals: tuple[int, ...]
    binary_totals: tuple[int, ...]
    rounds: int

    @property
    def ordinal_scores(self) -> np.ndarray:
        return np.asarray(self.ordinal_totals, dtype=float) / self.rounds

    @property
    def binary_scores(self) -> np.ndarray:
        return np.asarray(self.binary_totals, dtype=float) / self.rounds

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "ordinal_scores": list(self.ordinal_scores),
            "binary_scores": list(self.binary_scores),
        }


def two_item_metrics(outcomes) -> tuple[float, float]:
    """Mean outcome and mean outcome sign for a single pair's rounds."""
    arr = np.asarray(outcomes, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("need at least one outcome")
    if np.any(arr == 0):
        raise CorruptDataError("zero outcome in comparison sequence")
    return float(arr.mean()), float(np.sign(arr).mean())


def count_scores(data: ComparisonDataset) -> ScorePair:
    """Per-item score sums; the reverse orientation of each stored pair
    enters with the opposite sign."""
    raw = np.zeros(data.n, dtype=np.int64)
    signed = np.zeros(data.n, dtype=np.int64)
    for (i, j), ys in data.outcomes.items():
        s = int(ys.sum())
        b = int(np.sign(ys).sum())
        raw[i] += s
        raw[j] -= s
        signed[i] += b
        signed[j] -= b
    return ScorePair(tuple(int(v) for v in raw), tuple(int(v) for v in signed),
                     data.rounds)


def kendall_tau(scores, theta: PreferenceVector) -> float:
    """Fraction of item pairs ordered differently by the scores than by
    theta; pairs with equal scores count as errors."""
    s = np.asarray(scores, dtype=float)
    if s.shape != (theta.n,):
        raise ValueError(f"got {s.size} scores for {theta.n} items")
    ds = s[:, None] - s[None, :]
    dt = theta.gaps()
    iu = np.triu_indices(theta.n, k=1)
    bad = np.count_nonzero(ds[iu] * dt[iu] <= 0)
    return 2.0 * bad / (theta.n * (theta.n - 1))


def expected_scores(model: OrdinalModel, theta: PreferenceVector):
    """Expected score vectors under the model: the binarized one is the row
    sum of tanh(phi(theta_i - theta_j)); the ordinal one scales it by the
    mean outcome magnitude.  Both order items exactly as theta does."""
    t = np.tanh(model.link(theta.gaps()))
    np.fill_diagonal(t, 0.0)
    s_tilde = t.sum(axis=1)
    return model.pattern.mean() * s_tilde, s_tilde


def asymptotic_two_item(model: OrdinalModel, gamma: float, L: int) -> tuple[float, float]:
    """Normal-limit probabilities that the binarized and the raw counting
    metric rank a positive-gap pair correctly after L rounds.

    Returns (pB, pA) with pB >= pA; they coincide only for a degenerate
    magnitude law.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive (orient the pair first)")
    if L < 1:
        raise ValueError("L must be >= 1")
    phi = model.link(gamma)
    root_l = math.sqrt(L)
    p_binary = float(ndtr(root_l * math.sinh(phi)))
    t = math.tanh(phi)
    inv_snr = model.pattern.variance() / model.pattern.mean() ** 2
    p_ordinal = float(ndtr(root_l * t / math.sqrt(inv_snr + 1.0 - t * t)))
    return p_binary, p_ordinal


def _pairwise_drift_and_spread(model: OrdinalModel, theta_sorted: np.ndarray):
    """Per-pair mean drift and variance-proxy terms of the score-difference
    sums, both scaled by 1/(2n)."""
    n = theta_sorted.size
    gaps = theta_sorted[:, None] - theta_sorted[None, :]
    t = np.tanh(model.link(gaps))
    np.fill_diagonal(t, 0.0)
    q = t * t
    row_t = t.sum(axis=1)
    row_q = q.sum(axis=1)
    # D_ij = 2 t_ij + sum_{k != i,j} (t_ik - t_jk) collapses to the row-sum
    # difference; V_ij likewise to row_q_i + row_q_j + 2 q_ij.
    d = (row_t[:, None] - row_t[None, :]) / (2.0 * n)
    v = (row_q[:, None] + row_q[None, :] + 2.0 * q) / (2.0 * n)
    iu = np.triu_indices(n, k=1)
    return d[iu], v[iu]


def asymptotic_tau(model: OrdinalModel, theta: PreferenceVector, L: int) -> tuple[float, float]:
    """Limiting expected ranking errors of the ordinal and binarized counting
    scores for n items after L rounds."""
    if L < 1:
        raise ValueError("L must be >= 1")
    th = np.sort(np.asarray(theta.theta))[::-1]
    if np.any(np.diff(th) == 0):
        raise ValueError("theta must be strictly ordered after sorting")
    n = th.size
    d_bar, v_bar = _pairwise_drift_and_spread(model, th)
    scale = math.sqrt(2.0 * n * L)
    inv_snr = model.pattern.variance() / model.pattern.mean() ** 2
    tau_ordinal = float(np.mean(ndtr(-scale * d_bar / np.sqrt(inv_snr + 1.0 - v_bar))))
    tau_binary = float(np.mean(ndtr(-scale * d_bar / np.sqrt(1.0 - v_bar))))
    return tau_ordinal, tau_binary


def dataset_to_csv(data: ComparisonDataset) -> str:
    """Wire format: header ``i,j,l,y``; items zero-based, rounds one-based."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "l", "y"])
    for (i, j) in sorted(data.outcomes):
        for l, y in enumerate(data.outcomes[(i, j)], start=1):
            writer.writerow([i, j, l, int(y)])
    return buf.getvalue()


def dataset_from_csv(text: str, n: int | None = None) -> ComparisonDataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["i", "j", "l", "y"]:
        raise ValueError("expected CSV header 'i,j,l,y'")
    per_pair: dict[tuple[int, int], dict[int, int]] = {}
    max_item = -1
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            i, j, l, y = (int(v) for v in row)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: malformed row {row!r}") from exc
        if i == j:
            raise ValueError(f"line {lineno}: self-comparison {i}")
        if l < 1:
            raise ValueError(f"line {lineno}: rounds are one-based, got {l}")
        if i > j:
            i, j, y = j, i, -y
        rounds = per_pair.setdefault((i, j), {})
        if l in rounds:
            raise ValueError(f"line {lineno}: duplicate round {l} for pair ({i},{j})")
        rounds[l] = y
        max_item = max(max_item, j)
    if not per_pair:
        raise ValueError("no comparison rows found")
    counts = {len(r) for r in per_pair.values()}
    if len(counts) != 1:
        raise ValueError(f"pairs carry unequal round counts: {sorted(counts)}")
    L = counts.pop()
    outcomes = {}
    for pair, rounds in per_pair.items():
        if sorted(rounds) != list(range(1, L + 1)):
            raise ValueError(f"pair {pair} rounds are not 1..{L}")
        outcomes[pair] = np.array([rounds[l] for l in range(1, L + 1)], dtype=np.int64)
    n_items = n if n is not None else max_item + 1
    return ComparisonDataset(n=n_items, rounds=L, outcomes=outcomes)
