"""Protocol simulator: finite-domain data, statistical queries, AWGN / MAC channel.

Each edge point (EP) holds ``n0`` samples, computes the empirical mean of the
current query and transmits it scaled by ``A_t``. Over the multiple-access
channel the transmissions add up and a single Gaussian draw is added to the
sum. The analyst divides by ``L * A_t``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from .bounds import SystemConfig

__all__ = [
    "Population",
    "Dataset",
    "QueryTable",
    "ChannelModel",
    "Round",
    "Transcript",
    "Streams",
    "Analyst",
    "derive_streams",
    "true_answer",
    "sample_dataset",
    "sample_datasets",
    "empirical_answer",
    "transmit_p2p",
    "transmit_mac",
    "normalize_received",
    "run_session",
]


@dataclass(frozen=True, eq=False)
class Population:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, domain_size: int) -> "Population":
        return cls(np.full(domain_size, 1.0 / domain_size))

    @property
    def domain_size(self) -> int:
        return self.probabilities.size

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.probabilities == self.probabilities[0]))


@dataclass(frozen=True, eq=False)
class QueryTable:
    """A statistical query ``q: {0..N-1} -> [0, 1]`` stored by value."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("query table must be a non-empty vector")
        if not (np.all(v >= 0.0) and np.all(v <= 1.0)):
            raise ValueError("query values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, domain_size: int, value: float) -> "QueryTable":
        return cls(np.full(domain_size, float(value)))

    def __len__(self) -> int:
        return self.values.size


@dataclass(eq=False)
class Dataset:
    samples: np.ndarray
    ep_id: int = 0
    domain_size: int | None = None
    _counts: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be a vector of domain indices")
        if self.samples.size and self.samples.min() < 0:
            raise ValueError("sample indices must be non-negative")
        if self.domain_size is not None and self.samples.size and self.samples.max() >= self.domain_size:
            raise ValueError("sample index outside the domain")

    def __len__(self) -> int:
        return self.samples.size

    def counts(self, domain_size: int) -> np.ndarray:
        """Histogram of the samples over ``{0..domain_size-1}`` (cached)."""
        if self._counts is None or self._counts.size != domain_size:
            self._counts = np.bincount(self.samples, minlength=domain_size).astype(float)
        return self._counts


class ChannelModel:
    """Block-constant AWGN channel with its own random stream.

    ``draws`` counts how many noise samples have been consumed.
    """

    def __init__(self, sigma_ch: float, rng: np.random.Generator | int | None = None):
        if not sigma_ch >= 0 or math.isinf(sigma_ch):
            raise ValueError(f"sigma_ch must be finite and >= 0, got {sigma_ch!r}")
        self.sigma_ch = float(sigma_ch)
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.draws = 0

    def noise(self) -> float:
        self.draws += 1
        return float(self.rng.normal(0.0, self.sigma_ch))


@dataclass(frozen=True, eq=False)
class Round:
    query: QueryTable
    ep_answers: np.ndarray
    received: float
    normalized: float
    true_answer: float

    @property
    def abs_error(self) -> float:
        return abs(self.true_answer - self.normalized)


@dataclass(eq=False)
class Transcript:
    rounds: list[Round] = field(default_factory=list)
    short: bool = False
    reason: str = ""

    def __len__(self) -> int:
        return len(self.rounds)

    def append(self, rnd: Round) -> None:
        self.rounds.append(rnd)

    @property
    def normalized_answers(self) -> np.ndarray:
        return np.array([r.normalized for r in self.rounds])

    @property
    def true_answers(self) -> np.ndarray:
        return np.array([r.true_answer for r in self.rounds])

    def max_error(self) -> float:
        if not self.rounds:
            return 0.0
        return float(np.max(np.abs(self.true_answers - self.normalized_answers)))

    def same_as(self, other: "Transcript") -> bool:
        """Exact equality of queries, per-EP answers and received values."""
        if len(self) != len(other) or self.short != other.short:
            return False
        for a, b in zip(self.rounds, other.rounds):
            if not (
                np.array_equal(a.query.values, b.query.values)
                and np.array_equal(a.ep_answers, b.ep_answers)
                and a.received == b.received
                and a.normalized == b.normalized
                and a.true_answer == b.true_answer
            ):
                return False
        return True

    def to_csv(self, fh: io.TextIOBase | None = None, header: Iterable[str] = ()) -> str:
        """Write ``round,true_answer,received_normalized,abs_error`` rows.

        ``header`` lines are emitted first as ``#`` comments. Returns the text.
        """
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["round", "true_answer", "received_normalized", "abs_error"])
        for i, r in enumerate(self.rounds, start=1):
            writer.writerow([i, repr(r.true_answer), repr(r.normalized), repr(r.abs_error)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


@dataclass
class Streams:
    data: np.random.Generator
    channel: np.random.Generator
    analyst: np.random.Generator


def derive_streams(seed: int | np.random.SeedSequence) -> Streams:
    """Three independent generators (data, channel, analyst) from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    data, channel, analyst = (np.random.default_rng(s) for s in ss.spawn(3))
    return Streams(data=data, channel=channel, analyst=analyst)


class Analyst(Protocol):
    def next_query(self, transcript: Transcript) -> QueryTable | None:
        """Next query given the history, or ``None`` to stop."""


def true_answer(pop: Population, q: QueryTable) -> float:
    if len(q) != pop.domain_size:
        raise ValueError(f"query has {len(q)} entries, domain has {pop.domain_size}")
    if pop.is_uniform:
        # mean() is exact for constant tables where a weighted dot product is not
        return float(min(max(q.values.mean(), 0.0), 1.0))
    return float(min(max(pop.probabilities @ q.values, 0.0), 1.0))


def sample_dataset(pop: Population, n: int, rng: np.random.Generator, ep_id: int = 0) -> Dataset:
    if n < 1:
        raise ValueError("n must be >= 1")
    if pop.is_uniform:
        samples = rng.integers(0, pop.domain_size, size=n)
    else:
        samples = rng.choice(pop.domain_size, size=n, p=pop.probabilities)
    return Dataset(samples, ep_id=ep_id, domain_size=pop.domain_size)


def sample_datasets(pop: Population, cfg: SystemConfig, rng: np.random.Generator) -> list[Dataset]:
    return [sample_dataset(pop, cfg.n0, rng, ep_id=l) for l in range(cfg.L)]


def empirical_answer(ds: Dataset, q: QueryTable) -> float:
    if len(ds) == 0:
        raise ValueError("empty dataset")
    # float sums of [0,1] values can round a hair past 1
    return float(min(max(ds.counts(len(q)) @ q.values / len(ds), 0.0), 1.0))


def transmit_p2p(ds: Dataset, q: QueryTable, A_t: float, ch: ChannelModel) -> float:
    return A_t * empirical_answer(ds, q) + ch.noise()


def _mac(datasets: Sequence[Dataset], q: QueryTable, A_t: float, ch: ChannelModel) -> tuple[np.ndarray, float]:
    if len(datasets) == 0:
        raise ValueError("need at least one EP")
    answers = np.array([empirical_answer(ds, q) for ds in datasets])
    return answers, A_t * float(answers.sum()) + ch.noise()


def transmit_mac(datasets: Sequence[Dataset], q: QueryTable, A_t: float, ch: ChannelModel) -> float:
    """Over-the-air sum of ``A_t * q(S_l)`` plus one shared noise draw."""
    return _mac(datasets, q, A_t, ch)[1]


def normalize_received(a: float, L: int, A_t: float) -> float:
    return a / (L * A_t)


def run_session(
    pop: Population,
    datasets: Sequence[Dataset],
    analyst: Analyst,
    cfg: SystemConfig,
    k: int,
    channel: ChannelModel,
) -> Transcript:
    """Run up to ``k`` adaptive rounds and record them.

    ``channel`` must carry ``cfg.sigma_ch``. If the analyst stops early the transcript is marked ``short``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(datasets) != cfg.L:
        raise ValueError(f"expected {cfg.L} datasets, got {len(datasets)}")
    if channel.sigma_ch != cfg.sigma_ch:
        raise ValueError("channel noise does not match cfg.sigma_ch")
    sizes = {len(ds) for ds in datasets}
    if len(sizes) != 1:
        raise ValueError(f"EP dataset sizes must be equal, got {sorted(sizes)}")

    transcript = Transcript()
    for i in range(k):
        q = analyst.next_query(transcript)
        if q is None:
            transcript.short = True
            transcript.reason = f"analyst stopped after {i} of {k} rounds"
            break
        answers, received = _mac(datasets, q, cfg.A_t, channel)
        transcript.append(Round(
            query=q,
            ep_answers=answers,
            received=received,
            normalized=normalize_received(received, cfg.L, cfg.A_t),
            true_answer=true_answer(pop, q),
        ))
    return transcript
