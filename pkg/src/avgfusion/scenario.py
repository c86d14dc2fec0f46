"""Multi-sensor detection scenario: targets, misdetections and Poisson clutter.

Each sensor reports a Gaussian mixture with one component per detection and
one per false alarm.  Sensor ``k`` draws from Philox substream ``k`` of the
scenario seed, so reports do not depend on generation order.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from avgfusion.core import FusionWeights
from avgfusion.gmfusion import (
    ExtractionRule,
    GaussianComponent,
    GaussianMixture,
    ReductionConfig,
    extract_states,
    gm_aa,
    gm_ga_approx,
    reduce,
)
from avgfusion.montecarlo import stream

# Fig.-6 style diagnostics.  Detections have std 10, so merging is limited to
# one std to keep targets 20 apart distinct; the extraction threshold sits
# below a single sensor's uniformly weighted clutter mass (0.3 / 6).
FIG6_REDUCTION = ReductionConfig(merge_threshold=1.0, prune_threshold=1e-5, max_components=100)
FIG6_EXTRACTION = ExtractionRule.threshold(0.03)
FIG6_GATE = 10.0


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario parameters; the defaults are the six-sensor, five-target setup."""

    target_positions: tuple[float, ...] = (20.0, 40.0, 70.0, 110.0, 200.0)
    detection_prob: float = 0.9
    clutter_rate: float = 1.0
    clutter_range: tuple[float, float] = (0.0, 200.0)
    n_sensors: int = 6
    detection_weight: float = 0.8
    detection_variance: float = 100.0
    clutter_weight: float = 0.3
    clutter_variance: float = 150.0
    measurement_noise_std: float = 2.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target_positions", tuple(float(t) for t in self.target_positions))
        object.__setattr__(self, "clutter_range", tuple(float(t) for t in self.clutter_range))
        if not 0.0 < self.detection_prob <= 1.0:
            raise ValueError("detection_prob must lie in (0, 1]")
        if self.clutter_rate < 0:
            raise ValueError("clutter_rate must be non-negative")
        lo, hi = self.clutter_range
        if not lo < hi:
            raise ValueError("clutter_range must satisfy lo < hi")
        if self.n_sensors < 1:
            raise ValueError("n_sensors must be >= 1")
        for name in ("detection_weight", "detection_variance", "clutter_weight", "clutter_variance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.measurement_noise_std < 0:
            raise ValueError("measurement_noise_std must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target_positions"] = list(self.target_positions)
        d["clutter_range"] = list(self.clutter_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScenarioSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class SensorReport:
    """One sensor's mixture; ``truth_flags[k]`` is the target index or None for clutter."""

    sensor_id: int
    mixture: GaussianMixture
    truth_flags: tuple[int | None, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "truth_flags", tuple(self.truth_flags))
        if len(self.truth_flags) != len(self.mixture):
            raise ValueError("one truth flag per mixture component is required")

    def to_dict(self) -> dict:
        return {"sensor_id": self.sensor_id, "mixture": self.mixture.to_json(),
                "truth_flags": list(self.truth_flags)}


def generate(spec: ScenarioSpec) -> list[SensorReport]:
    reports = []
    lo, hi = spec.clutter_range
    for k in range(spec.n_sensors):
        rng = stream(spec.seed, k)
        comps, flags = [], []
        for t, pos in enumerate(spec.target_positions):
            # draw both variates unconditionally to keep stream usage fixed
            detected = rng.random() < spec.detection_prob
            noise = rng.normal(0.0, 1.0) * spec.measurement_noise_std
            if detected:
                comps.append(GaussianComponent(spec.detection_weight, pos + noise, spec.detection_variance))
                flags.append(t)
        n_clutter = int(rng.poisson(spec.clutter_rate))
        for x in rng.uniform(lo, hi, n_clutter):
            comps.append(GaussianComponent(spec.clutter_weight, float(x), spec.clutter_variance))
            flags.append(None)
        reports.append(SensorReport(k, GaussianMixture(tuple(comps)), tuple(flags)))
    return reports


def fuse_scenario(reports: Sequence[SensorReport], rule: Literal["aa", "ga"],
                  w: FusionWeights | None = None,
                  reduction: ReductionConfig | None = FIG6_REDUCTION) -> GaussianMixture:
    """Fuse sensor mixtures (ascending sensor id), then reduce.

    ``w=None`` means uniform weights.  For GA, reduction also runs after every
    pairwise fold step.  A GA including an empty report is empty.
    """
    if not reports:
        raise ValueError("no reports to fuse")
    reports = sorted(reports, key=lambda r: r.sensor_id)
    gms = [r.mixture for r in reports]
    if len(gms) == 1:
        if w is not None:
            raise ValueError("a single report takes no fusion weights")
        fused = gms[0]
    else:
        w = FusionWeights.uniform(len(gms)) if w is None else w
        if len(w) != len(gms):
            raise ValueError(f"{len(gms)} reports but {len(w)} weights")
        if rule == "aa":
            fused = gm_aa(gms, w)
        elif rule == "ga":
            if any(len(gm) == 0 for gm in gms):
                return GaussianMixture()
            fused = gm_ga_approx(gms, w, reduction)
        else:
            raise ValueError(f"unknown fusion rule {rule!r}")
    if reduction is not None:
        fused = reduce(fused, reduction.merge_threshold, reduction.prune_threshold,
                       reduction.max_components)
    return fused


@dataclass(frozen=True)
class Score:
    n_found: int
    n_false: int
    position_errors: tuple[float, ...]

    def __iter__(self):
        return iter((self.n_found, self.n_false, list(self.position_errors)))


def match_states(states: Sequence[float], truth: Sequence[float], gate: float) -> Score:
    """Greedy one-to-one nearest matching of estimates to truths within ``gate``.

    Not an optimal assignment: the globally closest remaining pair is taken
    first (ties by estimate then truth index).
    """
    if not gate > 0:
        raise ValueError("gate must be positive")
    pairs = sorted(
        (abs(s - t), i, j)
        for i, s in enumerate(states)
        for j, t in enumerate(truth)
        if abs(s - t) <= gate
    )
    used_s, used_t, errors = set(), set(), []
    for d, i, j in pairs:
        if i in used_s or j in used_t:
            continue
        used_s.add(i)
        used_t.add(j)
        errors.append(d)
    return Score(len(errors), len(states) - len(errors), tuple(errors))


def score(fused: GaussianMixture, rule: ExtractionRule, truth: Sequence[float], gate: float) -> Score:
    return match_states(extract_states(fused, rule), truth, gate)


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    seed: int
    rule: str
    n_targets: int
    n_found: int
    n_missed: int
    n_false: int
    mean_abs_error: float
    n_components: int
    weight_sum: float


def trial_seed(base_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([base_seed, trial]).generate_state(1, np.uint64)[0])


def run_trial(spec: ScenarioSpec, trial: int, rules: Sequence[str] = ("aa", "ga"),
              extraction: ExtractionRule = FIG6_EXTRACTION, gate: float = FIG6_GATE,
              reduction: ReductionConfig = FIG6_REDUCTION) -> list[TrialOutcome]:
    seed = trial_seed(spec.seed, trial)
    reports = generate(spec.with_seed(seed))
    out = []
    for rule in rules:
        fused = fuse_scenario(reports, rule, reduction=reduction)
        s = score(fused, extraction, spec.target_positions, gate)
        out.append(TrialOutcome(
            trial=trial,
            seed=seed,
            rule=rule,
            n_targets=len(spec.target_positions),
            n_found=s.n_found,
            n_missed=len(spec.target_positions) - s.n_found,
            n_false=s.n_false,
            mean_abs_error=float(np.mean(s.position_errors)) if s.position_errors else math.nan,
            n_components=len(fused),
            weight_sum=fused.weight_sum,
        ))
    return out


def run_trials(spec: ScenarioSpec, trials: int, rules: Sequence[str] = ("aa", "ga"),
               extraction: ExtractionRule = FIG6_EXTRACTION, gate: float = FIG6_GATE,
               reduction: ReductionConfig = FIG6_REDUCTION, jobs: int = 1) -> list[TrialOutcome]:
    """Run independent trials; output is sorted by (trial, rule) whatever ``jobs`` is."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    args = [(spec, t, tuple(rules), extraction, gate, reduction) for t in range(trials)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_trial_args, args, chunksize=max(1, trials // (4 * jobs))))
    else:
        batches = [_run_trial_args(a) for a in args]
    rows = [o for batch in batches for o in batch]
    return sorted(rows, key=lambda o: (o.trial, o.rule))


def _run_trial_args(args) -> list[TrialOutcome]:
    return run_trial(*args)


def paired_sign_test(a: Sequence[float], b: Sequence[float]) -> dict:
    """One-sided sign test that ``b`` tends to exceed ``a`` (ties dropped)."""
    from scipy.stats import binomtest

    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    n_pos, n_neg = int((d > 0).sum()), int((d < 0).sum())
    p = binomtest(n_pos, n_pos + n_neg, 0.5, alternative="greater").pvalue if n_pos + n_neg else 1.0
    return {"n_greater": n_pos, "n_less": n_neg, "n_ties": int(d.size - n_pos - n_neg), "p_value": float(p)}


def summarize(rows: Sequence[TrialOutcome]) -> dict:
    """Per-rule means, plus GA-vs-AA paired comparisons when both rules ran."""
    by_rule: dict[str, list[TrialOutcome]] = {}
    for o in rows:
        by_rule.setdefault(o.rule, []).append(o)
    out: dict = {}
    for rule, rs in by_rule.items():
        out[rule] = {
            "trials": len(rs),
            "mean_missed": float(np.mean([o.n_missed for o in rs])),
            "mean_false": float(np.mean([o.n_false for o in rs])),
            "mean_components": float(np.mean([o.n_components for o in rs])),
        }
    if "aa" in by_rule and "ga" in by_rule:
        aa = sorted(by_rule["aa"], key=lambda o: o.trial)
        ga = sorted(by_rule["ga"], key=lambda o: o.trial)
        out["missed_ga_vs_aa"] = paired_sign_test([o.n_missed for o in aa], [o.n_missed for o in ga])
        out["false_aa_vs_ga"] = paired_sign_test([o.n_false for o in ga], [o.n_false for o in aa])
    return out
