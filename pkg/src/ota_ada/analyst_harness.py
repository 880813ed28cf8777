"""Analysts and the empirical (alpha, beta)-accuracy evaluator.

Three analyst behaviours are provided: a fixed list of queries, random
non-adaptive queries, and an overfitting attack. The attack asks random 0/1
probe queries, notes whether each answer came back above or below the
population mean, and finally asks the sign-weighted majority of the probes.
On a small dataset that last query concentrates on the sampled points, so
its empirical answer drifts far from its true answer unless the answers were
noisy enough to hide the signs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .bounds import SystemConfig
from .federated_sim import (
    ChannelModel,
    Dataset,
    Population,
    QueryTable,
    Transcript,
    derive_streams,
    run_session,
    sample_datasets,
)

__all__ = [
    "AnalystPolicy",
    "AccuracyReport",
    "SimContext",
    "SimTemplate",
    "FixedQueryAnalyst",
    "RandomQueryAnalyst",
    "OverfitAttackAnalyst",
    "make_random_query",
    "overfit_attack_final_query",
    "run_policy_session",
    "evaluate_accuracy",
    "wilson_interval",
]

PolicyKind = Literal["fixed_queries", "random_nonadaptive", "overfit_attack"]

# z for a two-sided 95% interval
Z95 = 1.959963984540054


def make_random_query(domain_size: int, rng: np.random.Generator) -> QueryTable:
    if domain_size < 1:
        raise ValueError("domain_size must be >= 1")
    return QueryTable(rng.integers(0, 2, size=domain_size).astype(float))


def _final_from_probes(probes: np.ndarray, answers: np.ndarray, population_mean: float) -> QueryTable:
    signs = np.where(answers > population_mean, 1.0, -1.0)
    votes = signs @ (2.0 * probes - 1.0)
    return QueryTable((votes > 0).astype(float))


def overfit_attack_final_query(
    transcript: Transcript,
    probe_queries: Sequence[QueryTable],
    population_mean: float = 0.5,
) -> QueryTable:
    """Majority vote of the probes, each signed by its answer's side of the mean.

    ``final[x] = 1`` iff ``sum_j s_j (2 probe_j[x] - 1) > 0`` where ``s_j`` is
    +1 when the j-th normalized answer exceeds ``population_mean``. Ties give 0.
    """
    if len(probe_queries) == 0:
        raise ValueError("need at least one probe")
    if len(transcript) < len(probe_queries):
        raise ValueError(
            f"transcript has {len(transcript)} answers for {len(probe_queries)} probes"
        )
    probes = np.stack([q.values for q in probe_queries])
    answers = transcript.normalized_answers[: len(probe_queries)]
    return _final_from_probes(probes, answers, population_mean)


class FixedQueryAnalyst:
    def __init__(self, queries: Sequence[QueryTable]):
        self.queries = list(queries)

    def next_query(self, transcript: Transcript) -> QueryTable | None:
        i = len(transcript)
        return self.queries[i] if i < len(self.queries) else None


class RandomQueryAnalyst:
    """Uniform random 0/1 queries; never looks at the answers."""

    def __init__(self, domain_size: int, rng: np.random.Generator, count: int | None = None):
        self.domain_size = domain_size
        self.rng = rng
        self.count = count

    def next_query(self, transcript: Transcript) -> QueryTable | None:
        if self.count is not None and len(transcript) >= self.count:
            return None
        return make_random_query(self.domain_size, self.rng)


class OverfitAttackAnalyst:
    """``n_probes`` random probes followed by one majority-vote query."""

    def __init__(self, domain_size: int, n_probes: int, rng: np.random.Generator,
                 population_mean: float = 0.5):
        if n_probes < 1:
            raise ValueError("the attack needs at least one probe")
        self.domain_size = domain_size
        self.n_probes = n_probes
        self.rng = rng
        self.population_mean = population_mean
        self._probes = np.empty((n_probes, domain_size))
        self.final_query: QueryTable | None = None

    def next_query(self, transcript: Transcript) -> QueryTable | None:
        i = len(transcript)
        if i < self.n_probes:
            q = make_random_query(self.domain_size, self.rng)
            self._probes[i] = q.values
            return q
        if i == self.n_probes:
            answers = transcript.normalized_answers[: self.n_probes]
            self.final_query = _final_from_probes(self._probes, answers, self.population_mean)
            return self.final_query
        return None


@dataclass(frozen=True)
class AnalystPolicy:
    """Which analyst to run.

    ``queries`` is used by ``fixed_queries``, ``count`` optionally caps
    ``random_nonadaptive``, and ``population_mean`` is the attack's sign
    threshold (0.5 is the exact mean of a uniform random probe under any P).
    """

    kind: PolicyKind
    queries: tuple[QueryTable, ...] = ()
    count: int | None = None
    population_mean: float = 0.5

    def __post_init__(self):
        if self.kind not in ("fixed_queries", "random_nonadaptive", "overfit_attack"):
            raise ValueError(f"unknown policy kind {self.kind!r}")

    def build(self, domain_size: int, k: int, rng: np.random.Generator):
        if self.kind == "fixed_queries":
            return FixedQueryAnalyst(self.queries)
        if self.kind == "random_nonadaptive":
            return RandomQueryAnalyst(domain_size, rng, self.count)
        if k < 2:
            raise ValueError("overfit_attack needs k >= 2 (probes plus the final query)")
        return OverfitAttackAnalyst(domain_size, k - 1, rng, self.population_mean)


@dataclass
class SimContext:
    """Everything one session needs, with its random streams already bound."""

    population: Population
    datasets: list[Dataset]
    cfg: SystemConfig
    channel: ChannelModel
    analyst_rng: np.random.Generator


@dataclass(frozen=True, eq=False)
class SimTemplate:
    """Recipe for fresh trials: population plus system parameters."""

    population: Population
    cfg: SystemConfig

    def context(self, seed: int | np.random.SeedSequence) -> SimContext:
        streams = derive_streams(seed)
        return SimContext(
            population=self.population,
            datasets=sample_datasets(self.population, self.cfg, streams.data),
            cfg=self.cfg,
            channel=ChannelModel(self.cfg.sigma_ch, streams.channel),
            analyst_rng=streams.analyst,
        )


def run_policy_session(policy: AnalystPolicy, ctx: SimContext, k: int) -> Transcript:
    analyst = policy.build(ctx.population.domain_size, k, ctx.analyst_rng)
    transcript = run_session(ctx.population, ctx.datasets, analyst, ctx.cfg, k, ctx.channel)
    if len(transcript) < k and not transcript.short:
        transcript.short = True
    return transcript


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the endpoints are exactly 0 / 1 at the extremes; avoid rounding residue
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


@dataclass
class AccuracyReport:
    trials: int
    max_errors: np.ndarray
    alpha: float
    failure_rate: float
    wilson_interval: tuple[float, float]
    # pooled empirical minus true answer of each trial's last query
    final_gaps: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def failures(self) -> int:
        return int(np.sum(self.max_errors >= self.alpha))

    def to_csv(self, fh: io.TextIOBase | None = None, header: Iterable[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", "max_error", "failed"])
        for i, e in enumerate(self.max_errors):
            writer.writerow([i, repr(float(e)), int(e >= self.alpha)])
        lo, hi = self.wilson_interval
        writer.writerow(["summary", repr(float(self.failure_rate)), self.failures])
        buf.write(f"# summary: alpha={self.alpha!r} trials={self.trials} "
                  f"failure_rate={float(self.failure_rate)!r} wilson95=[{lo!r}, {hi!r}]\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def evaluate_accuracy(
    policy: AnalystPolicy,
    template: SimTemplate,
    k: int,
    alpha: float,
    trials: int = 200,
    master_seed: int = 0,
) -> AccuracyReport:
    """Estimate ``Pr[max_i |q_i(P) - a_i| >= alpha]`` over independent sessions.

    Every trial gets fresh datasets, noise and analyst randomness from its own
    child of ``master_seed``; errors are measured against exact true answers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_errors = np.empty(trials)
    gaps = np.empty(trials)
    for i, child in enumerate(np.random.SeedSequence(master_seed).spawn(trials)):
        transcript = run_policy_session(policy, template.context(child), k)
        max_errors[i] = transcript.max_error()
        if transcript.rounds:
            last = transcript.rounds[-1]
            gaps[i] = float(np.mean(last.ep_answers)) - last.true_answer
        else:
            gaps[i] = 0.0
    failed = int(np.sum(max_errors >= alpha))
    return AccuracyReport(
        trials=trials,
        max_errors=max_errors,
        alpha=alpha,
        failure_rate=failed / trials,
        wilson_interval=wilson_interval(failed, trials),
        final_gaps=gaps,
    )
