"""Experiment designs: full factorial grids, randomization, blocking, and
replicate sizing by simulated statistical power.

Plans are reproducible bit-for-bit from the design seed: the canonical
pre-shuffle order is replicate-major with the last factor varying fastest,
blocks (when present) are assigned cyclically by replicate index, and the
execution order comes from a Fisher-Yates shuffle driven by the SplitMix64
stream documented in :mod:`evalbench.rng` (shuffled within blocks when block
labels exist, globally otherwise).

Replicate sizing replaces the classic operating-characteristic curve lookup
with a Monte-Carlo estimate of the one-way F test's power, which answers the
same question (how many replicates reach a target power) without tabulated
noncentral distributions.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DesignError, PowerTargetError
from .rng import SplitMix64, fisher_yates
from .special import f_critical

FACTOR_ROLES = frozenset({"design", "held-constant", "blocking"})


@dataclass(frozen=True)
class Factor:
    name: str
    kind: str  # resource | workload | quality
    levels: tuple = ()
    role: str = "design"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "levels": list(self.levels),
            "role": self.role,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Factor":
        return cls(
            name=data["name"],
            kind=data.get("kind", "resource"),
            levels=tuple(data.get("levels", [])),
            role=data.get("role", "design"),
        )


@dataclass(frozen=True)
class DesignSpec:
    factors: tuple[Factor, ...]
    replicates: int
    seed: int
    response_metrics: tuple[str, ...] = ()
    blocking: Optional[Factor] = None

    def to_dict(self) -> dict:
        return {
            "factors": [f.to_dict() for f in self.factors],
            "replicates": self.replicates,
            "seed": self.seed,
            "response_metrics": list(self.response_metrics),
            "blocking": self.blocking.to_dict() if self.blocking else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignSpec":
        return cls(
            factors=tuple(Factor.from_dict(f) for f in data["factors"]),
            replicates=int(data["replicates"]),
            seed=int(data["seed"]),
            response_metrics=tuple(data.get("response_metrics", [])),
            blocking=Factor.from_dict(data["blocking"]) if data.get("blocking") else None,
        )


@dataclass
class RunSpec:
    index: int  # 1-based position in execution order
    combination: dict
    replicate: int  # 1..r
    block: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "combination": dict(self.combination),
            "replicate": self.replicate,
            "block": self.block,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunSpec":
        return cls(
            index=data["index"],
            combination=dict(data["combination"]),
            replicate=data["replicate"],
            block=data.get("block"),
        )


def _check_spec(spec: DesignSpec) -> None:
    if spec.replicates < 1:
        raise DesignError("replicates must be >= 1")
    if not spec.factors:
        raise DesignError("at least one design factor is required")
    names = [f.name for f in spec.factors]
    if len(set(names)) != len(names):
        raise DesignError("design factor names must be unique")
    for factor in spec.factors:
        if factor.role != "design":
            raise DesignError(f"factor {factor.name!r} has role {factor.role!r}; expected design")
        if len(factor.levels) < 2:
            raise DesignError(f"design factor {factor.name!r} needs at least 2 levels")
        if len({str(l) for l in factor.levels}) != len(factor.levels):
            raise DesignError(f"design factor {factor.name!r} has duplicate levels")
    if spec.blocking is not None and len(spec.blocking.levels) < 2:
        raise DesignError(f"blocking factor {spec.blocking.name!r} needs at least 2 levels")


def assign_blocks(runs: Sequence[RunSpec], blocking_factor: Factor) -> list[RunSpec]:
    """Label runs with blocks, cycling the blocking levels by replicate index.

    Replicate i takes level (i-1) mod #levels, the classic arrangement where
    each full replicate forms one block. What a block physically means (a
    day, a machine, an operator) is up to the evaluator.
    """
    if len(blocking_factor.levels) < 2:
        raise DesignError(f"blocking factor {blocking_factor.name!r} needs at least 2 levels")
    labeled: list[RunSpec] = []
    for run in runs:
        if run.replicate is None or run.replicate < 1:
            raise DesignError(f"run {run.index} lacks a replicate index")
        label = str(blocking_factor.levels[(run.replicate - 1) % len(blocking_factor.levels)])
        labeled.append(RunSpec(run.index, dict(run.combination), run.replicate, label))
    return labeled


def randomize_order(runs: Sequence[RunSpec], seed: int) -> list[RunSpec]:
    """Deterministic Fisher-Yates permutation of the runs.

    Multiset-equal to the input (run fields untouched, including any block
    labels). When block labels are present, runs are permuted only within
    the position set of their own block, blocks taken in order of first
    appearance; one SplitMix64 stream seeded with ``seed`` drives all draws.
    """
    rng = SplitMix64(seed)
    items = list(runs)
    if not items:
        return []
    if any(r.block is not None for r in items):
        out: list[Optional[RunSpec]] = [None] * len(items)
        seen: list[str] = []
        for run in items:
            label = run.block if run.block is not None else ""
            if label not in seen:
                seen.append(label)
        for label in seen:
            positions = [
                i for i, r in enumerate(items) if (r.block if r.block is not None else "") == label
            ]
            shuffled = fisher_yates([items[i] for i in positions], rng)
            for pos, run in zip(positions, shuffled):
                out[pos] = run
        return [r for r in out if r is not None]
    return fisher_yates(items, rng)


def full_factorial(spec: DesignSpec) -> list[RunSpec]:
    """Every level combination, replicated ``spec.replicates`` times, blocked
    and randomized per the design seed. Run indices are assigned 1..N in the
    final execution order."""
    _check_spec(spec)
    names = [f.name for f in spec.factors]
    level_lists = [list(f.levels) for f in spec.factors]
    runs: list[RunSpec] = []
    for replicate in range(1, spec.replicates + 1):
        for combo in itertools.product(*level_lists):
            runs.append(
                RunSpec(
                    index=0,
                    combination=dict(zip(names, combo)),
                    replicate=replicate,
                    block=None,
                )
            )
    if spec.blocking is not None:
        runs = assign_blocks(runs, spec.blocking)
    runs = randomize_order(runs, spec.seed)
    for position, run in enumerate(runs, start=1):
        run.index = position
    return runs


# ---------------------------------------------------------------------------
# Tabular plan export (archival format: one row per run)


def plan_to_csv(plan: Sequence[RunSpec], factor_names: Sequence[str]) -> str:
    """Render a plan as CSV with columns: run, block, replicate, then one
    column per factor in design order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", "block", "replicate", *factor_names])
    for run in plan:
        writer.writerow(
            [
                run.index,
                run.block if run.block is not None else "",
                run.replicate,
                *[run.combination.get(name, "") for name in factor_names],
            ]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Replicate sizing by simulated power


def _validate_power_args(k: int, n: int, means: Sequence[float], sigma: float, alpha: float, trials: int) -> None:
    if k < 2:
        raise DesignError("need at least 2 groups")
    if len(means) != k:
        raise DesignError(f"expected {k} group means, got {len(means)}")
    if n < 2:
        raise DesignError("per-group sample size must be >= 2")
    if sigma <= 0:
        raise DesignError("sigma must be positive")
    if not 0.0 < alpha < 1.0:
        raise DesignError("alpha must be in (0, 1)")
    if trials < 1000:
        raise DesignError("trials must be >= 1000 for a stable estimate")


def simulate_power(
    k: int,
    n: int,
    means: Sequence[float],
    sigma: float,
    alpha: float = 0.05,
    trials: int = 20000,
    seed: int = 0,
) -> float:
    """Monte-Carlo power of the one-way fixed-effects F test.

    Draws ``trials`` experiments of ``k`` normal groups (given means, common
    ``sigma``, ``n`` observations each, PCG64 stream seeded with ``seed``)
    and returns the fraction rejected at level ``alpha``. The per-trial F
    statistic is the same sums-of-squares statistic as
    :func:`evalbench.analysis.anova_oneway` (agreement is pinned by a test),
    and rejection compares F against the critical value from
    :func:`evalbench.special.f_critical`, which is equivalent to p < alpha.
    """
    _validate_power_args(k, n, means, sigma, alpha, trials)
    rng = np.random.Generator(np.random.PCG64(seed))
    mu = np.asarray(means, dtype=float)
    data = rng.normal(loc=mu[None, :, None], scale=sigma, size=(trials, k, n))
    group_means = data.mean(axis=2)
    grand = group_means.mean(axis=1, keepdims=True)
    ss_between = n * ((group_means - grand) ** 2).sum(axis=1)
    ss_within = ((data - group_means[:, :, None]) ** 2).sum(axis=(1, 2))
    df_between = k - 1
    df_within = k * (n - 1)
    f_stats = (ss_between / df_between) / (ss_within / df_within)
    critical = f_critical(alpha, df_between, df_within)
    return float(np.mean(f_stats > critical))


def estimate_replicates(
    k: int,
    means: Sequence[float],
    sigma: float,
    alpha: float,
    target_power: float,
    n_max: int,
    trials: int = 20000,
    seed: int = 0,
) -> int:
    """Smallest per-group n in [2, n_max] whose simulated power reaches the
    target; each candidate n reuses the same seed so the scan is reproducible."""
    if not 0.0 < target_power < 1.0:
        raise DesignError("target power must be in (0, 1)")
    if n_max < 2:
        raise DesignError("n_max must be >= 2")
    achieved = 0.0
    for n in range(2, n_max + 1):
        achieved = simulate_power(k, n, means, sigma, alpha, trials, seed)
        if achieved >= target_power:
            return n
    raise PowerTargetError(
        f"target power {target_power} unreachable within n_max={n_max} "
        f"(achieved {achieved:.4f} at n={n_max})",
        achieved_power=achieved,
        n_max=n_max,
    )
