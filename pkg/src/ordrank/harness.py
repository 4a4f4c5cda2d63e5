"""Deterministic Monte-Carlo harness for the simulation scenarios.

Four experiment kinds are supported: ``two_item`` estimates the probabilities
that the raw-sum and sign-sum metrics rank a single pair correctly over a
(gamma, beta, L) grid; ``scenario1`` traces both n-item ranking errors over
L; ``scenario2`` relates the ordinal-minus-binary error gap to the magnitude
SNR over a beta grid; ``scenario3`` tracks the error ratio as L grows.

Replications are independent work units.  The generator for replication r of
grid point g is seeded with (base_seed, g, r), and per-point results are
reduced by an ordered fold over r, so outputs are bit-identical for any
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtri

from .model import OrdinalModel, PatternDistribution, StrengthLink
from .ranking import PreferenceVector, kendall_tau
from .snr import snr_of_pattern

__all__ = [
    "ExperimentConfig",
    "MetricEstimate",
    "GridPointResult",
    "ExperimentResult",
    "run_experiment",
    "run_two_item",
    "run_scenario1",
    "run_scenario2",
    "run_scenario3",
    "default_config",
]

SCENARIOS = ("two_item", "scenario1", "scenario2", "scenario3")

CSV_COLUMNS = ["scenario", "link", "pattern", "beta", "n", "K", "L",
               "gamma_or_w", "metric", "estimate", "se", "ci_lo", "ci_hi",
               "reps", "seed"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    link: dict
    pattern: dict
    K: int
    L_grid: tuple[int, ...]
    replications: int
    base_seed: int
    n: int = 2
    theta_gap: float | None = None
    theta: tuple[float, ...] | None = None
    gammas: tuple[float, ...] | None = None
    betas: tuple[float, ...] | None = None
    ci_level: float = 0.99

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        grid = tuple(int(v) for v in self.L_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ConfigError("L grid must be strictly increasing and positive")
        object.__setattr__(self, "L_grid", grid)
        if self.replications < 1:
            raise ConfigError("replication count must be >= 1")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError("CI level must lie in (0, 1)")
        if self.scenario == "two_item":
            if not self.gammas:
                raise ConfigError("two_item needs a gamma grid")
            if any(g <= 0 for g in self.gammas):
                raise ConfigError("two_item gammas must be positive")
            object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        else:
            if self.theta is None and self.theta_gap is None:
                raise ConfigError("ranking scenarios need theta or theta_gap")
        if self.betas is not None:
            object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.scenario == "scenario2" and not self.betas:
            raise ConfigError("scenario2 needs a beta grid")

    # -- model construction ------------------------------------------------

    def make_link(self) -> StrengthLink:
        return StrengthLink.from_dict(self.link)

    def make_pattern(self, beta: float | None = None) -> PatternDistribution:
        spec = self.pattern
        if "family" in spec:
            b = beta if beta is not None else spec.get("beta")
            if b is None:
                raise ConfigError("pattern family needs a beta")
            return PatternDistribution.from_family(spec["family"], float(b), self.K)
        if beta is not None:
            raise ConfigError("beta grid given but pattern is not a family")
        return PatternDistribution.from_dict({**spec, "K": self.K})

    def make_theta(self) -> PreferenceVector:
        if self.theta is not None:
            return PreferenceVector(tuple(self.theta))
        return PreferenceVector.equally_spaced(self.n, self.theta_gap)

    def pattern_label(self) -> str:
        return self.pattern.get("family", "weights")

    def pattern_betas(self) -> tuple[float | None, ...]:
        if self.betas:
            return self.betas
        if "family" in self.pattern and "beta" in self.pattern:
            return (float(self.pattern["beta"]),)
        return (None,)

    def to_dict(self) -> dict:
        d = {
            "scenario": self.scenario,
            "link": self.link,
            "pattern": self.pattern,
            "K": self.K,
            "L_grid": list(self.L_grid),
            "replications": self.replications,
            "base_seed": self.base_seed,
            "n": self.n,
            "ci_level": self.ci_level,
        }
        if self.theta_gap is not None:
            d["theta_gap"] = self.theta_gap
        if self.theta is not None:
            d["theta"] = list(self.theta)
        if self.gammas is not None:
            d["gammas"] = list(self.gammas)
        if self.betas is not None:
            d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        kwargs = dict(
            scenario=d["scenario"],
            link=d["link"],
            pattern=d["pattern"],
            K=int(d["K"]),
            L_grid=tuple(d["L_grid"]),
            replications=int(d["replications"]),
            base_seed=int(d["base_seed"]),
            n=int(d.get("n", 2)),
            ci_level=float(d.get("ci_level", 0.99)),
        )
        if d.get("theta_gap") is not None:
            kwargs["theta_gap"] = float(d["theta_gap"])
        if d.get("theta") is not None:
            kwargs["theta"] = tuple(float(v) for v in d["theta"])
        if d.get("gammas") is not None:
            kwargs["gammas"] = tuple(float(v) for v in d["gammas"])
        if d.get("betas") is not None:
            kwargs["betas"] = tuple(float(v) for v in d["betas"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MetricEstimate:
    estimate: float | None
    se: float | None
    ci_lo: float | None
    ci_hi: float | None
    flagged: bool = False


@dataclass(frozen=True)
class GridPointResult:
    grid_id: int
    params: dict
    metrics: dict[str, MetricEstimate]
    reps: int
    elapsed: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: tuple[GridPointResult, ...]
    seed_lineage: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        cfg = self.config
        link_label = _link_label(cfg.make_link())
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for point in self.points:
            beta = point.params.get("beta")
            gamma_or_w = point.params.get("gamma", point.params.get("w"))
            for name in sorted(point.metrics):
                m = point.metrics[name]
                writer.writerow([
                    cfg.scenario, link_label, cfg.pattern_label(),
                    _fmt(beta), cfg.n, cfg.K, point.params.get("L", ""),
                    _fmt(gamma_or_w), name,
                    _fmt(m.estimate), _fmt(m.se), _fmt(m.ci_lo), _fmt(m.ci_hi),
                    point.reps, cfg.base_seed,
                ])
        return buf.getvalue()

    def to_dict(self, annotate: bool = False) -> dict:
        points = []
        for p in self.points:
            entry = {
                "grid_id": p.grid_id,
                "params": p.params,
                "reps": p.reps,
                "metrics": {
                    k: {"estimate": v.estimate, "se": v.se,
                        "ci_lo": v.ci_lo, "ci_hi": v.ci_hi, "flagged": v.flagged}
                    for k, v in p.metrics.items()
                },
            }
            if annotate:
                entry["elapsed_s"] = p.elapsed
            points.append(entry)
        return {"config": self.config.to_dict(),
                "seed_lineage": self.seed_lineage,
                "points": points}


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _link_label(link: StrengthLink) -> str:
    names = {"cubic": "cubic", "identity": "identity",
             "tanh-sigmoid": "tanhsig"}
    if link.kind == "logit-of-cdf":
        base = "logitnorm" if link.base_cdf == "standard-normal" else "identity"
    else:
        base = names[link.kind]
    if link.scale != 1.0:
        return f"{base}:{link.scale!r}"
    return base


def _rep_rng(base_seed: int, grid_id: int, rep: int) -> np.random.Generator:
    return np.random.default_rng([base_seed, grid_id, rep])


def _map_reps(worker: Callable[[int], tuple], reps: int, threads: int) -> list:
    if threads <= 1:
        return [worker(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(reps)))


def _bernoulli_metric(hits: np.ndarray, z: float) -> MetricEstimate:
    reps = hits.size
    p = float(np.mean(hits))
    se = float(np.sqrt(p * (1.0 - p) / reps))
    return MetricEstimate(p, se, max(0.0, p - z * se), min(1.0, p + z * se))


def _sample_metric(values: np.ndarray, z: float, clip01: bool = True) -> MetricEstimate:
    reps = values.size
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    lo, hi = est - z * se, est + z * se
    if clip01:
        lo, hi = max(0.0, lo), min(1.0, hi)
    return MetricEstimate(est, se, lo, hi)


# -- per-replication workers ----------------------------------------------


def _draw_outcomes(values: np.ndarray, cdf: np.ndarray,
                   rng: np.random.Generator, count: int) -> np.ndarray:
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return values[np.minimum(idx, values.size - 1)]


def _two_item_rep(values, cdf, L, base_seed, grid_id, rep):
    rng = _rep_rng(base_seed, grid_id, rep)
    y = _draw_outcomes(values, cdf, rng, L)
    return int(y.sum()) > 0, int(np.sign(y).sum()) > 0


def _ranking_rep(pair_tables, n, L, base_seed, grid_id, rep, theta):
    """One full-graph replication; returns both ranking errors."""
    rng = _rep_rng(base_seed, grid_id, rep)
    raw = np.zeros(n, dtype=np.int64)
    signed = np.zeros(n, dtype=np.int64)
    for (i, j), (values, cdf) in pair_tables:
        y = _draw_outcomes(values, cdf, rng, L)
        s, b = int(y.sum()), int(np.sign(y).sum())
        raw[i] += s
        raw[j] -= s
        signed[i] += b
        signed[j] -= b
    return kendall_tau(raw, theta), kendall_tau(signed, theta)


def _pair_tables(model: OrdinalModel, theta: PreferenceVector):
    """Outcome tables per pair, computed once per grid point and reused; the
    table depends only on the pair's gamma, so equal gaps share one table."""
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    tables = []
    th = theta.theta
    for i in range(theta.n):
        for j in range(i + 1, theta.n):
            g = th[i] - th[j]
            if g not in cache:
                values, probs = model.pmf_table(g)
                cache[g] = (values, np.cumsum(probs))
            tables.append(((i, j), cache[g]))
    return tables


# -- experiment drivers ----------------------------------------------------


def run_two_item(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if config.scenario != "two_item":
        raise ConfigError("config is not a two_item experiment")
    link = config.make_link()
    z = float(ndtri(0.5 + config.ci_level / 2.0))
    points = []
    grid_id = 0
    for beta in config.pattern_betas():
        model = OrdinalModel(link, config.make_pattern(beta))
        for gamma in config.gammas:
            values, probs = model.pmf_table(gamma)
            cdf = np.cumsum(probs)
            for L in config.L_grid:
                t0 = time.perf_counter()
                gid = grid_id
                rows = _map_reps(
                    lambda r: _two_item_rep(values, cdf, L,
                                            config.base_seed, gid, r),
                    config.replications, threads)
                arr = np.asarray(rows, dtype=bool)
                # the two hit indicators share draws, so the gap gets its
                # own paired standard error
                gap = arr[:, 1].astype(float) - arr[:, 0].astype(float)
                metrics = {
                    "p_raw_positive": _bernoulli_metric(arr[:, 0], z),
                    "p_sign_positive": _bernoulli_metric(arr[:, 1], z),
                    "p_sign_minus_raw": _sample_metric(gap, z, clip01=False),
                }
                params = {"L": L, "gamma": gamma}
                if beta is not None:
                    params["beta"] = beta
                points.append(GridPointResult(gid, params, metrics,
                                              config.replications,
                                              time.perf_counter() - t0))
                grid_id += 1
    return _finish(config, points)


def _run_tau_grid(config: ExperimentConfig, threads: int,
                  grid: list[tuple[int, float | None]],
                  extra: Callable[[np.ndarray, PatternDistribution, float], dict]
                  ) -> ExperimentResult:
    link = config.make_link()
    theta = config.make_theta()
    z = float(ndtri(0.5 + config.ci_level / 2.0))
    points = []
    for grid_id, (L, beta) in enumerate(grid):
        pattern = config.make_pattern(beta)
        model = OrdinalModel(link, pattern)
        tables = _pair_tables(model, theta)
        t0 = time.perf_counter()
        rows = _map_reps(
            lambda r: _ranking_rep(tables, config.n, L, config.base_seed,
                                   grid_id, r, theta),
            config.replications, threads)
        taus = np.asarray(rows, dtype=float)
        metrics = {
            "tau_ordinal": _sample_metric(taus[:, 0], z),
            "tau_binary": _sample_metric(taus[:, 1], z),
        }
        metrics.update(extra(taus, pattern, z))
        params = {"L": L, "w": config.theta_gap}
        if beta is not None:
            params["beta"] = beta
        points.append(GridPointResult(grid_id, params, metrics,
                                      config.replications,
                                      time.perf_counter() - t0))
    return _finish(config, points)


def run_scenario1(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Ranking error of both counting scores over the L grid."""
    if config.scenario != "scenario1":
        raise ConfigError("config is not a scenario1 experiment")
    beta = config.pattern_betas()[0]
    grid = [(L, beta) for L in config.L_grid]
    return _run_tau_grid(config, threads, grid, lambda taus, pat, z: {})


def run_scenario2(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Error gap (ordinal minus binary) against the magnitude SNR over the
    beta grid; L is fixed to the single grid entry."""
    if config.scenario != "scenario2":
        raise ConfigError("config is not a scenario2 experiment")
    if len(config.L_grid) != 1:
        raise ConfigError("scenario2 uses a single L")
    L = config.L_grid[0]

    def extra(taus, pattern, z):
        gap = taus[:, 0] - taus[:, 1]  # paired per replication
        return {
            "tau_gap": _sample_metric(gap, z, clip01=False),
            "snr_exact": MetricEstimate(snr_of_pattern(pattern).snr, 0.0,
                                        None, None),
        }

    grid = [(L, beta) for beta in config.betas]
    return _run_tau_grid(config, threads, grid, extra)


def run_scenario3(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Binary-to-ordinal error ratio over the L grid; points where the
    ordinal error estimate is zero are flagged (ratio undefined at finite
    replication count)."""
    if config.scenario != "scenario3":
        raise ConfigError("config is not a scenario3 experiment")
    beta = config.pattern_betas()[0]

    def extra(taus, pattern, z):
        mean_ord = float(np.mean(taus[:, 0]))
        mean_bin = float(np.mean(taus[:, 1]))
        if mean_ord == 0.0:
            return {"tau_ratio": MetricEstimate(None, None, None, None,
                                                flagged=True)}
        ratio = mean_bin / mean_ord
        reps = taus.shape[0]
        cov = np.cov(taus[:, 1], taus[:, 0], ddof=1) if reps > 1 else np.zeros((2, 2))
        var = (cov[0, 0] / mean_ord**2
               + mean_bin**2 * cov[1, 1] / mean_ord**4
               - 2.0 * mean_bin * cov[0, 1] / mean_ord**3) / reps
        se = float(np.sqrt(max(var, 0.0)))
        return {"tau_ratio": MetricEstimate(ratio, se, max(0.0, ratio - z * se),
                                            ratio + z * se)}

    grid = [(L, beta) for L in config.L_grid]
    return _run_tau_grid(config, threads, grid, extra)


_RUNNERS = {
    "two_item": run_two_item,
    "scenario1": run_scenario1,
    "scenario2": run_scenario2,
    "scenario3": run_scenario3,
}


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    return _RUNNERS[config.scenario](config, threads=threads)


def _finish(config: ExperimentConfig, points: list[GridPointResult]) -> ExperimentResult:
    lineage = {"base_seed": config.base_seed,
               "scheme": "default_rng([base_seed, grid_id, replication])"}
    return ExperimentResult(config, tuple(points), lineage)


def default_config(scenario: str, paper_scale: bool = False, **overrides) -> ExperimentConfig:
    """Desk-scale defaults for the standard experiment grids; the
    paper-scale switch restores the full two-item replication count."""
    if scenario == "two_item":
        base = dict(
            scenario=scenario,
            link={"kind": "identity", "scale": 1.0},
            pattern={"family": "abs"},
            K=4,
            L_grid=tuple(range(50, 501, 50)),
            gammas=(0.05, 0.1, 0.15),
            betas=(0.1, 0.9),
            replications=10**6 if paper_scale else 10**5,
            base_seed=12345,
        )
    elif scenario in ("scenario1", "scenario2", "scenario3"):
        base = dict(
            scenario=scenario,
            link={"kind": "identity", "scale": 1.0},
            pattern={"family": "abs", "beta": 1.0},
            K=5,
            n=10,
            theta_gap=0.05,
            L_grid=tuple(range(100, 501, 50)),
            replications=1000,
            base_seed=12345,
        )
        if scenario == "scenario2":
            base["L_grid"] = (100,)
            base["betas"] = tuple(round(0.1 * i, 1) for i in range(1, 11))
            base["pattern"] = {"family": "abs"}
        if scenario == "scenario3":
            base["L_grid"] = tuple(100 * i for i in range(1, 11))
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    base.update(overrides)
    return ExperimentConfig(**base)
