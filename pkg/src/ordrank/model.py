"""Generative model for ordinal paired-comparison outcomes.

An outcome Y takes values in {-K, ..., -1, 1, ..., K} (no ties).  Its law is
an exponential-family tilt

    P(Y = k)  propto  exp( phi(sign(k) * gamma) + psi(|k|) ),

where ``phi`` is a strength link (monotone, odd) applied to the latent
preference difference ``gamma`` between the two items, and ``psi`` weights the
outcome magnitudes.  The law factorizes: sign(Y) is Bernoulli with
P(Y > 0) = sigmoid(2 * phi(gamma)), and |Y| is an independent draw from the
magnitude distribution with weights proportional to exp(psi(k)).  All
arithmetic here is done in log space so that steep links (e.g. cubic) do not
overflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import expit, log_ndtr, logsumexp

__all__ = [
    "InvalidPatternError",
    "CorruptDataError",
    "StrengthLink",
    "PatternDistribution",
    "ModelMoments",
    "OrdinalModel",
    "binarize",
    "model_to_json",
    "model_from_json",
]

LINK_KINDS = ("cubic", "identity", "tanh-sigmoid", "logit-of-cdf", "custom")
BASE_CDFS = ("logistic", "standard-normal")


class InvalidPatternError(ValueError):
    """Raised when magnitude weights cannot form a probability distribution."""


class CorruptDataError(ValueError):
    """Raised when observed outcomes violate the no-ties contract."""


def _check_finite(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("link argument must be finite")
    return x


@dataclass(frozen=True)
class StrengthLink:
    """Monotone, origin-antisymmetric map from preference difference to
    propensity scale.

    ``kind`` selects the functional form; ``scale`` is a positive multiplier.
    ``logit-of-cdf`` builds the link as scale * log(F(x) / (1 - F(x))) for a
    symmetric base CDF F.  For the logistic base this collapses exactly to
    scale * x; for the standard normal it is evaluated through log_ndtr on
    both tails, which keeps the two log terms accurate for |x| far beyond the
    point where 1 - F(x) underflows.
    """

    kind: str = "identity"
    scale: float = 1.0
    base_cdf: str | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("link scale must be a positive finite real")
        if self.kind == "logit-of-cdf":
            if self.base_cdf not in BASE_CDFS:
                raise ValueError(f"logit-of-cdf needs base_cdf in {BASE_CDFS}")
        elif self.base_cdf is not None:
            raise ValueError("base_cdf only applies to logit-of-cdf links")
        if self.kind == "custom":
            if self.fn is None:
                raise ValueError("custom link needs a callable")
            self.validate()

    def __call__(self, x):
        """Evaluate the link; accepts scalars or arrays, returns the same."""
        arr = _check_finite(x)
        if self.kind == "cubic":
            out = self.scale * arr**3
        elif self.kind == "identity":
            out = self.scale * arr
        elif self.kind == "tanh-sigmoid":
            # (1 - e^-x) / (1 + e^-x) == tanh(x / 2), exactly odd in floats
            out = self.scale * np.tanh(arr / 2.0)
        elif self.kind == "logit-of-cdf":
            if self.base_cdf == "logistic":
                # log(sigma(x)) - log(1 - sigma(x)) == x identically
                out = self.scale * arr
            else:
                out = self.scale * (log_ndtr(arr) - log_ndtr(-arr))
        else:
            out = self.scale * np.asarray(self.fn(arr), dtype=float)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def validate(self, grid: np.ndarray | None = None, tol: float = 1e-12) -> None:
        """Check monotonicity and origin antisymmetry on a test grid."""
        if grid is None:
            grid = np.linspace(-6.0, 6.0, 241)
        vals = self(grid)
        if not np.all(np.diff(vals) > 0):
            raise ValueError(f"link {self.kind!r} is not strictly increasing")
        if np.max(np.abs(vals + self(-grid))) > tol or self(0.0) != 0.0:
            raise ValueError(f"link {self.kind!r} is not origin-antisymmetric")

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom links are not serializable")
        d = {"kind": self.kind, "scale": self.scale}
        if self.base_cdf is not None:
            d["base_cdf"] = self.base_cdf
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StrengthLink":
        return cls(kind=d["kind"], scale=float(d.get("scale", 1.0)),
                   base_cdf=d.get("base_cdf"))


@dataclass(frozen=True)
class PatternDistribution:
    """Distribution of the outcome magnitude |Y| on {1, ..., K}.

    Canonical form is the normalized weight vector, so magnitude laws with
    zero-probability levels (log-weight -inf) are representable and adding a
    constant to the log weights is a no-op.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise InvalidPatternError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidPatternError("weights must be finite and non-negative")
        total = w.sum()
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-12):
            raise InvalidPatternError(f"weights sum to {total!r}, expected 1")
        if not np.any(w > 0):
            raise InvalidPatternError("at least one weight must be positive")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    @property
    def K(self) -> int:
        return len(self.weights)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "PatternDistribution":
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not (total > 0 and np.all(w >= 0) and np.all(np.isfinite(w))):
            raise InvalidPatternError("weights must be non-negative with positive sum")
        return cls(tuple(w / total))

    @classmethod
    def from_psi(cls, psi_values: Sequence[float]) -> "PatternDistribution":
        """Normalized exp(psi) weights, computed as a log-space softmax.

        Entries of -inf are allowed and map to weight exactly 0.
        """
        psi = np.asarray(psi_values, dtype=float)
        if psi.ndim != 1 or psi.size < 1:
            raise InvalidPatternError("psi must be a non-empty 1-d sequence")
        if np.any(np.isnan(psi)) or np.any(psi == np.inf):
            raise InvalidPatternError("psi entries must be real or -inf")
        top = np.max(psi)
        if top == -np.inf:
            raise InvalidPatternError("psi is -inf everywhere")
        shifted = np.exp(psi - top)
        return cls(tuple(shifted / shifted.sum()))

    @classmethod
    def uniform(cls, K: int) -> "PatternDistribution":
        if K < 1:
            raise InvalidPatternError("K must be >= 1")
        return cls((1.0 / K,) * K)

    @classmethod
    def from_family(cls, family: str, beta: float, K: int) -> "PatternDistribution":
        """Magnitude-penalty families: 'abs' is psi(k) = -beta*k and
        'sq' is psi(k) = -beta*k^2."""
        ks = np.arange(1, K + 1, dtype=float)
        if family == "abs":
            return cls.from_psi(-beta * ks)
        if family == "sq":
            return cls.from_psi(-beta * ks**2)
        raise ValueError(f"unknown pattern family {family!r}")

    @property
    def log_weights(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.weights))

    @property
    def magnitudes(self) -> np.ndarray:
        return np.arange(1, self.K + 1, dtype=float)

    def mean(self) -> float:
        return float(np.dot(self.magnitudes, self.weights))

    def second_moment(self) -> float:
        return float(np.dot(self.magnitudes**2, self.weights))

    def variance(self) -> float:
        return max(self.second_moment() - self.mean() ** 2, 0.0)

    def is_degenerate(self) -> bool:
        return sum(1 for w in self.weights if w > 0) == 1

    def to_dict(self) -> dict:
        # 17 significant digits round-trips IEEE doubles bit-exactly
        return {"K": self.K, "weights": [f"{w:.17g}" for w in self.weights]}

    @classmethod
    def from_dict(cls, d: dict) -> "PatternDistribution":
        if "weights" in d:
            w = [float(v) for v in d["weights"]]
            if "K" in d and int(d["K"]) != len(w):
                raise InvalidPatternError("K does not match weight count")
            return cls(tuple(w))
        if "psi" in d:
            return cls.from_psi([float(v) for v in d["psi"]])
        raise InvalidPatternError("pattern dict needs 'weights' or 'psi'")


class ModelMoments(NamedTuple):
    mean: float
    variance: float
    snr: float


def _log_cosh(x: float) -> float:
    # log cosh x = logaddexp(x, -x) - log 2, safe for large |x|
    return float(np.logaddexp(x, -x) - math.log(2.0))


@dataclass(frozen=True)
class OrdinalModel:
    """Ordinal comparison law over {-K..-1, 1..K} for given link and
    magnitude pattern; ``gamma`` is supplied per evaluation."""

    link: StrengthLink
    pattern: PatternDistribution

    @property
    def K(self) -> int:
        return self.pattern.K

    @property
    def support(self) -> np.ndarray:
        K = self.K
        return np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])

    def _check_outcome(self, k: int) -> int:
        k = int(k)
        if k == 0 or abs(k) > self.K:
            raise ValueError(f"outcome {k} outside {{-K..-1, 1..K}} with K={self.K}")
        return k

    def prob_positive(self, gamma: float) -> float:
        """P(Y > 0) = sigmoid(2 * phi(gamma)); does not depend on the
        magnitude pattern."""
        return float(expit(2.0 * self.link(gamma)))

    def pmf(self, gamma: float, k: int) -> float:
        """P(Y = k) = w_{|k|} * sigmoid(2 * sign(k) * phi(gamma))."""
        k = self._check_outcome(k)
        sign = 1.0 if k > 0 else -1.0
        return float(self.pattern.weights[abs(k) - 1]
                     * expit(2.0 * sign * self.link(gamma)))

    def pmf_table(self, gamma: float) -> tuple[np.ndarray, np.ndarray]:
        """Support values and their probabilities, ordered -K..-1, 1..K."""
        w = np.asarray(self.pattern.weights)
        p_pos = expit(2.0 * self.link(gamma))
        probs = np.concatenate([w[::-1] * (1.0 - p_pos), w * p_pos])
        return self.support, probs

    def moments(self, gamma: float) -> ModelMoments:
        """Mean, variance and signal-to-noise ratio of Y.

        mean = tanh(phi(gamma)) * E|Y|,  var = E|Y|^2 - mean^2,
        snr  = tanh^2 / (1/snr(|Y|) + 1 - tanh^2); a degenerate magnitude
        law at saturated tanh yields the +inf sentinel, never NaN.
        """
        t = math.tanh(self.link(gamma))
        m1 = self.pattern.mean()
        m2 = self.pattern.second_moment()
        mean = t * m1
        variance = m2 - mean * mean
        # 1/SNR(|Y|) = var(|Y|) / mean(|Y|)^2 vanishes for degenerate patterns
        inv_snr_mag = self.pattern.variance() / (m1 * m1)
        denom = inv_snr_mag + 1.0 - t * t
        if denom <= 0.0:
            snr = math.inf
        else:
            snr = t * t / denom
        return ModelMoments(mean, variance, snr)

    def sample(self, gamma: float, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` i.i.d. outcomes via inverse CDF over the 2K-row table."""
        if count < 0:
            raise ValueError("count must be >= 0")
        values, probs = self.pmf_table(gamma)
        cdf = np.cumsum(probs)
        idx = np.searchsorted(cdf, rng.random(count), side="right")
        return values[np.minimum(idx, values.size - 1)]

    def log_mgf(self, gamma: float, lam) -> float | np.ndarray:
        """log E[exp(lam * Y)] = log sum_k w_k cosh(phi + lam k) - log cosh(phi).

        Evaluated as a log-sum-exp over the 2K signed terms; ``lam`` may be a
        scalar or an array.
        """
        lam_arr = _check_finite(lam)
        phi = self.link(gamma)
        ks = self.pattern.magnitudes
        logw = self.pattern.log_weights
        shifted = lam_arr[..., None] * ks + phi
        terms = np.concatenate([logw + shifted, logw - shifted], axis=-1)
        out = logsumexp(terms, axis=-1) - np.logaddexp(phi, -phi)
        if np.ndim(lam) == 0:
            return float(out)
        return out

    def to_dict(self) -> dict:
        return {"link": self.link.to_dict(), "pattern": self.pattern.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "OrdinalModel":
        return cls(link=StrengthLink.from_dict(d["link"]),
                   pattern=PatternDistribution.from_dict(d["pattern"]))


def binarize(outcomes) -> np.ndarray:
    """Elementwise sign of ordinal outcomes; zeros are corrupt data."""
    arr = np.asarray(outcomes)
    if arr.size and np.any(arr == 0):
        raise CorruptDataError("zero outcome found; comparison data admits no ties")
    return np.sign(arr).astype(np.int64)


def model_to_json(model: OrdinalModel, **kwargs) -> str:
    return json.dumps(model.to_dict(), **kwargs)


def model_from_json(text: str) -> OrdinalModel:
    return OrdinalModel.from_dict(json.loads(text))
