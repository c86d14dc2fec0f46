"""Fusion of weighted Gaussian mixtures (PHD intensities).

The AA of mixtures is exact: concatenate the components after scaling by the
fusion weights.  The GA is approximated by dropping within-mixture cross
terms, so each component is raised to its power on its own and the fused
mixture is the table of all pairwise component products.  Its total mass is
then set to the AA of the input masses (cardinality consensus).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from avgfusion.core import FusionWeights, as_weights, gaussian_pdf

log = logging.getLogger(__name__)

# squared Mahalanobis distance below which two components of one mixture are
# considered overlapping and the cross-term omission becomes questionable
OVERLAP_WARNING_DISTANCE = 9.0
_overlap_warned = False


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: float
    variance: float

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"component weight must be positive, got {self.weight}")
        if not self.variance > 0:
            raise ValueError(f"component variance must be positive, got {self.variance}")

    def density(self, x) -> np.ndarray:
        return self.weight * gaussian_pdf(x, self.mean, self.variance)

    def to_dict(self) -> dict:
        return {"weight": self.weight, "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class GaussianMixture:
    """An unnormalised mixture; the weights sum to the expected target count.

    An empty mixture (zero mass) is allowed so that a sensor which reports
    nothing can still be represented.
    """

    components: tuple[GaussianComponent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def of(cls, *triples: tuple[float, float, float]) -> "GaussianMixture":
        return cls(tuple(GaussianComponent(*t) for t in triples))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def weight_sum(self) -> float:
        return math.fsum(c.weight for c in self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([c.variance for c in self.components])

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.components:
            out += c.density(x)
        return out

    def scaled(self, factor: float) -> "GaussianMixture":
        return GaussianMixture(
            tuple(GaussianComponent(c.weight * factor, c.mean, c.variance) for c in self.components)
        )

    def to_json(self) -> list[dict]:
        return [c.to_dict() for c in self.components]

    @classmethod
    def from_json(cls, records: Iterable[dict]) -> "GaussianMixture":
        return cls(tuple(
            GaussianComponent(float(r["weight"]), float(r["mean"]), float(r["variance"]))
            for r in records
        ))

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(), **kwargs)

    @classmethod
    def loads(cls, text: str) -> "GaussianMixture":
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class ExtractionRule:
    kind: Literal["threshold", "rank"]
    value: float

    def __post_init__(self):
        if self.kind == "threshold":
            if not self.value > 0:
                raise ValueError("threshold must be positive")
        elif self.kind == "rank":
            if self.value < 0 or int(self.value) != self.value:
                raise ValueError("rank must be a non-negative integer")
        else:
            raise ValueError(f"unknown extraction rule {self.kind!r}")

    @classmethod
    def threshold(cls, tau: float) -> "ExtractionRule":
        return cls("threshold", float(tau))

    @classmethod
    def rank(cls, n: int) -> "ExtractionRule":
        return cls("rank", int(n))


@dataclass(frozen=True)
class ReductionConfig:
    merge_threshold: float = 4.0
    prune_threshold: float = 1e-5
    max_components: int = 100

    def __post_init__(self):
        if self.merge_threshold < 0 or self.prune_threshold < 0:
            raise ValueError("reduction thresholds must be non-negative")
        if self.max_components < 1:
            raise ValueError("max_components must be >= 1")


def gc_power(c: GaussianComponent, omega: float) -> GaussianComponent:
    """Raise a weighted Gaussian to the power ``omega``; still a weighted Gaussian."""
    if not 0.0 < omega <= 1.0:
        raise ValueError(f"omega must lie in (0, 1], got {omega}")
    # log-domain scale factor: (2 pi P)^(1-omega) spans many decades
    log_eps = 0.5 * ((1.0 - omega) * math.log(2.0 * math.pi * c.variance) - math.log(omega))
    weight = math.exp(omega * math.log(c.weight) + log_eps)
    return GaussianComponent(weight, c.mean, c.variance / omega)


def _log_separation(m1, p1, m2, p2):
    s = p1 + p2
    return -0.5 * (m1 - m2) ** 2 / s - 0.5 * np.log(2.0 * np.pi * s)


def gc_product(c1: GaussianComponent, c2: GaussianComponent) -> GaussianComponent:
    p = 1.0 / (1.0 / c1.variance + 1.0 / c2.variance)
    m = p * (c1.mean / c1.variance + c2.mean / c2.variance)
    w = c1.weight * c2.weight * math.exp(_log_separation(c1.mean, c1.variance, c2.mean, c2.variance))
    if w == 0.0:
        raise ValueError("product weight underflows to zero; components are too far apart")
    return GaussianComponent(w, m, p)


def gm_aa(gms: Sequence[GaussianMixture], w) -> GaussianMixture:
    if not gms:
        raise ValueError("no mixtures to fuse")
    w = as_weights(w)
    if len(gms) != len(w):
        raise ValueError(f"{len(gms)} mixtures but {len(w)} weights")
    comps = []
    for wi, gm in zip(w, gms):
        comps.extend(GaussianComponent(wi * c.weight, c.mean, c.variance) for c in gm)
    return GaussianMixture(tuple(comps))


def _warn_overlap(gm: GaussianMixture) -> None:
    global _overlap_warned
    m, p = gm.means, gm.variances
    for i in range(len(m)):
        d2 = (m[i] - m[i + 1:]) ** 2 / (p[i] + p[i + 1:])
        if np.any(d2 < OVERLAP_WARNING_DISTANCE):
            # full warning once per process, then only at debug level
            level = logging.DEBUG if _overlap_warned else logging.WARNING
            _overlap_warned = True
            log.log(
                level,
                "mixture components overlap (squared Mahalanobis < %g); "
                "the GA power approximation assumes well separated components",
                OVERLAP_WARNING_DISTANCE,
            )
            return


def _ga_pair(gm1: GaussianMixture, gm2: GaussianMixture, w1: float, w2: float) -> GaussianMixture:
    """Two-mixture GA. Output component ``i * len(gm2) + j`` comes from the pair (i, j)."""
    for gm in (gm1, gm2):
        if len(gm) == 0:
            raise ValueError("cannot GA-fuse an empty mixture")
        _warn_overlap(gm)
    n1, n2 = gm1.weight_sum, gm2.weight_sum
    # normalise, raise each component to its power, in vectorised log form
    m1, v1 = gm1.means, gm1.variances / w1
    m2, v2 = gm2.means, gm2.variances / w2
    lw1 = w1 * np.log(gm1.weights / n1) + 0.5 * ((1 - w1) * np.log(2 * np.pi * gm1.variances) - np.log(w1))
    lw2 = w2 * np.log(gm2.weights / n2) + 0.5 * ((1 - w2) * np.log(2 * np.pi * gm2.variances) - np.log(w2))
    M1, M2 = np.meshgrid(m1, m2, indexing="ij")
    V1, V2 = np.meshgrid(v1, v2, indexing="ij")
    var = 1.0 / (1.0 / V1 + 1.0 / V2)
    mean = var * (M1 / V1 + M2 / V2)
    logw = lw1[:, None] + lw2[None, :] + _log_separation(M1, V1, M2, V2)
    # renormalise to a PDF, then scale to the AA of the input masses
    logw -= logw.max()
    weights = np.exp(logw)
    weights *= (w1 * n1 + w2 * n2) / weights.sum()
    return GaussianMixture(tuple(
        GaussianComponent(float(wt), float(mu), float(p))
        for wt, mu, p in zip(weights.ravel(), mean.ravel(), var.ravel())
        if wt > 0
    ))


def gm_ga_approx(gms: Sequence[GaussianMixture], w,
                 reduction: ReductionConfig | None = None) -> GaussianMixture:
    """Approximate GA of mixtures with cardinality consensus.

    More than two mixtures are folded left to right, each step fusing the
    running result (carrying the accumulated weight) with the next input.
    ``reduction``, when given, is applied after every fold step.
    """
    if not gms:
        raise ValueError("no mixtures to fuse")
    w = as_weights(w)
    if len(gms) != len(w):
        raise ValueError(f"{len(gms)} mixtures but {len(w)} weights")
    acc, acc_w = gms[0], w[0]
    for gm, wi in zip(gms[1:], w.weights[1:]):
        total = acc_w + wi
        acc = _ga_pair(acc, gm, acc_w / total, wi / total)
        acc_w = total
        if reduction is not None and len(gms) > 2:
            acc = reduce(acc, reduction.merge_threshold, reduction.prune_threshold,
                         reduction.max_components)
    return acc


def reduce(gm: GaussianMixture, merge_threshold: float = 4.0, prune_threshold: float = 1e-5,
           max_components: int = 100) -> GaussianMixture:
    """Prune, merge and cap a mixture while preserving its total weight.

    Merging is greedy from the heaviest component; every component within
    squared Mahalanobis distance ``merge_threshold`` of it (measured with the
    heaviest component's variance) is moment-matched into one.
    """
    if merge_threshold < 0 or prune_threshold < 0:
        raise ValueError("thresholds must be non-negative")
    if len(gm) == 0:
        return gm
    total = gm.weight_sum
    w, m, p = gm.weights, gm.means, gm.variances
    keep = w >= prune_threshold
    if not keep.any():
        keep[np.argmax(w)] = True
    w, m, p = w[keep], m[keep], p[keep]

    merged = []
    left = np.ones(w.size, dtype=bool)
    while left.any():
        idx = np.flatnonzero(left)
        j = idx[np.argmax(w[idx])]
        near = idx[(m[idx] - m[j]) ** 2 / p[j] <= merge_threshold]
        wsum = w[near].sum()
        mu = np.dot(w[near], m[near]) / wsum
        var = np.dot(w[near], p[near] + (m[near] - mu) ** 2) / wsum
        merged.append((wsum, mu, var))
        left[near] = False

    merged.sort(key=lambda t: -t[0])
    merged = merged[:max_components]
    scale = total / math.fsum(t[0] for t in merged)
    return GaussianMixture(tuple(GaussianComponent(wt * scale, mu, var) for wt, mu, var in merged))


def extract_states(gm: GaussianMixture, rule: ExtractionRule) -> list[float]:
    """Point estimates from a mixture, returned in ascending order.

    A rank larger than the number of components returns every mean.
    """
    if rule.kind == "threshold":
        return sorted(c.mean for c in gm if c.weight > rule.value)
    order = sorted(range(len(gm)),
                   key=lambda i: (-gm.components[i].weight, gm.components[i].mean, i))
    return sorted(gm.components[i].mean for i in order[: int(rule.value)])


def fig5_mixtures() -> tuple[GaussianMixture, GaussianMixture]:
    """Two mixtures with two matched components and one isolated one (mean 90)."""
    gm1 = GaussianMixture.of((0.7, 10.0, 100.0), (0.6, 50.0, 100.0), (0.5, 90.0, 200.0))
    gm2 = GaussianMixture.of((0.9, 11.0, 100.0), (0.8, 52.0, 120.0))
    return gm1, gm2


def fuse(gms: Sequence[GaussianMixture], rule: Literal["aa", "ga"], w: FusionWeights | None = None,
         reduction: ReductionConfig | None = None) -> GaussianMixture:
    """Fuse mixtures with ``rule``, defaulting to uniform weights; optionally reduce."""
    if len(gms) == 1:
        out = gms[0]
    else:
        w = FusionWeights.uniform(len(gms)) if w is None else w
        if rule == "aa":
            out = gm_aa(gms, w)
        elif rule == "ga":
            out = gm_ga_approx(gms, w, reduction)
        else:
            raise ValueError(f"unknown fusion rule {rule!r}")
    if reduction is not None:
        out = reduce(out, reduction.merge_threshold, reduction.prune_threshold,
                     reduction.max_components)
    return out
