"""Sequence clustering of traces with a mixture of first-order Markov chains.

Hard (classification) EM: initialize K chains at random, score every case's
activity sequence under each chain, assign each case wholly to its best
chain, re-estimate chain parameters from the assigned sequences with
add-alpha smoothing, and repeat until the assignment stops changing. The
probability a chain gives a sequence x of length L is

    P(x | chain) = initial[x_0] * prod_{i=1..L-1} transitions[x_{i-1}, x_i]

with no end-state term, so probabilities normalize per sequence length.
All likelihood arithmetic happens in log space; posteriors over clusters
use a max-shifted softmax under uniform cluster priors. Everything is
deterministic given the seed: restart r derives its generator keys from
(seed, r), and each Dirichlet row draw has its own derived key, so results
do not depend on scheduling or trace order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .log import EmptyLogError, EventLog

__all__ = [
    "AssignmentError",
    "ActivitySequence",
    "MarkovChainModel",
    "ClusterModel",
    "ClusteringResult",
    "InstanceGroup",
    "ClusterBreakdown",
    "ClusterSummary",
    "to_sequences",
    "sequence_log_likelihood",
    "init_models",
    "assign",
    "reestimate",
    "fit",
    "split_log",
    "summarize_clusters",
]

STOCHASTIC_TOL = 1e-9


class AssignmentError(RuntimeError):
    """Every chain scores some sequence at -inf; the model cannot place it."""

    def __init__(self, case_id: str):
        super().__init__(f"no cluster has non-zero probability for case {case_id!r}")
        self.case_id = case_id


@dataclass(frozen=True)
class ActivitySequence:
    """A trace encoded as alphabet indices, in trace order."""

    case_id: str
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError(f"sequence for case {self.case_id!r} is empty")

    @property
    def length(self) -> int:
        return len(self.symbols)


@dataclass(eq=False)
class MarkovChainModel:
    """Initial distribution plus row-stochastic transition matrix."""

    alphabet: tuple[str, ...]
    initial: np.ndarray  # shape (n,)
    transitions: np.ndarray  # shape (n, n), row i = P(next | current=i)

    def validate(self) -> None:
        n = len(self.alphabet)
        if self.initial.shape != (n,) or self.transitions.shape != (n, n):
            raise ValueError("model shapes do not match alphabet size")
        vectors = [self.initial, *self.transitions]
        for vec in vectors:
            if np.any(vec < 0) or np.any(vec > 1):
                raise ValueError("probabilities must lie in [0, 1]")
            if abs(vec.sum() - 1.0) > STOCHASTIC_TOL:
                raise ValueError(f"stochastic vector sums to {vec.sum()!r}, not 1")


@dataclass(eq=False)
class ClusterModel:
    """A mixture of K Markov chains over one shared alphabet."""

    chains: tuple[MarkovChainModel, ...]
    smoothing_alpha: float = 0.0

    def __post_init__(self) -> None:
        if not self.chains:
            raise ValueError("cluster model needs at least one chain")
        alphabet = self.chains[0].alphabet
        if any(c.alphabet != alphabet for c in self.chains):
            raise ValueError("all chains must share one alphabet")
        if self.smoothing_alpha < 0:
            raise ValueError("smoothing_alpha must be non-negative")

    @property
    def k(self) -> int:
        return len(self.chains)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.chains[0].alphabet


@dataclass(eq=False)
class ClusteringResult:
    model: ClusterModel
    hard_assignment: dict[str, int]
    memberships: dict[str, tuple[tuple[int, float], ...]]
    objective_trace: tuple[float, ...]
    iterations: int
    converged: bool
    seed: int
    restarts: int
    reseed_count: int = 0  # empty-cluster reinitializations in the winning run


@dataclass(frozen=True)
class InstanceGroup:
    """Cases of one cluster sharing an identical activity sequence."""

    case_ids: tuple[str, ...]
    events_per_case: int
    max_case_duration_ms: int

    @property
    def case_count(self) -> int:
        return len(self.case_ids)


@dataclass(frozen=True)
class ClusterBreakdown:
    cluster: int
    groups: tuple[InstanceGroup, ...]
    case_count: int
    event_count: int


@dataclass(frozen=True)
class ClusterSummary:
    clusters: tuple[ClusterBreakdown, ...]


def to_sequences(log: EventLog) -> list[ActivitySequence]:
    """Encode each trace as alphabet indices (first-appearance order)."""
    order = log.activity_order()
    index = {a: i for i, a in enumerate(order)}
    return [
        ActivitySequence(
            case_id=t.case_id,
            symbols=tuple(index[a] for a in t.activities),
        )
        for t in log.traces
    ]


def sequence_log_likelihood(seq: ActivitySequence, chain: MarkovChainModel) -> float:
    """Log-probability of a sequence under one chain.

    Smoothing is an estimation-time concern (see reestimate); scoring uses
    the stored parameters as-is, so a zero-probability factor yields -inf.
    """
    n = len(chain.alphabet)
    symbols = np.asarray(seq.symbols, dtype=np.intp)
    if symbols.min() < 0 or symbols.max() >= n:
        raise ValueError(
            f"case {seq.case_id!r} uses symbols outside the {n}-letter alphabet"
        )
    with np.errstate(divide="ignore"):
        ll = float(np.log(chain.initial[symbols[0]]))
        if len(symbols) > 1:
            ll += float(np.log(chain.transitions[symbols[:-1], symbols[1:]]).sum())
    return ll


def _row_rng(key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(key)


def _seed_key(seed: int | tuple[int, ...]) -> tuple[int, ...]:
    return seed if isinstance(seed, tuple) else (seed,)


def _dirichlet_row(key: tuple[int, ...], n: int) -> np.ndarray:
    row = _row_rng(key).dirichlet(np.ones(n))
    return row / row.sum()


def _random_chain(
    alphabet: tuple[str, ...], key: tuple[int, ...], chain_index: int
) -> MarkovChainModel:
    # Row 0 of the key space is the initial vector, rows 1..n the matrix rows,
    # so every stochastic vector has its own derived generator.
    n = len(alphabet)
    initial = _dirichlet_row((*key, chain_index, 0), n)
    transitions = np.stack(
        [_dirichlet_row((*key, chain_index, i + 1), n) for i in range(n)]
    )
    return MarkovChainModel(alphabet=alphabet, initial=initial, transitions=transitions)


def init_models(
    alphabet: Sequence[str],
    k: int,
    seed: int | tuple[int, ...],
    alpha: float = 0.0,
) -> ClusterModel:
    """Draw K random chains, each stochastic vector from a flat Dirichlet.

    Deterministic: the generator for chain c's row r is keyed by
    (seed..., c, r), so identical inputs give identical models.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    alphabet = tuple(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be non-empty")
    key = _seed_key(seed)
    chains = tuple(_random_chain(alphabet, key, c) for c in range(k))
    return ClusterModel(chains=chains, smoothing_alpha=alpha)


def _encode(sequences: Sequence[ActivitySequence]) -> list[np.ndarray]:
    return [np.asarray(s.symbols, dtype=np.intp) for s in sequences]


def _score_matrix(
    encoded: list[np.ndarray], model: ClusterModel
) -> np.ndarray:
    """Log-likelihood of every sequence (rows) under every chain (columns)."""
    lls = np.empty((len(encoded), model.k))
    with np.errstate(divide="ignore"):
        for j, chain in enumerate(model.chains):
            log_init = np.log(chain.initial)
            log_trans = np.log(chain.transitions)
            for i, sym in enumerate(encoded):
                ll = log_init[sym[0]]
                if len(sym) > 1:
                    ll += log_trans[sym[:-1], sym[1:]].sum()
                lls[i, j] = ll
    return lls


def _posteriors(row: np.ndarray, case_id: str) -> np.ndarray:
    top = row.max()
    if top == -np.inf:
        raise AssignmentError(case_id)
    weights = np.exp(row - top)
    return weights / weights.sum()


def assign(
    sequences: Sequence[ActivitySequence], model: ClusterModel
) -> tuple[dict[str, int], dict[str, tuple[tuple[int, float], ...]]]:
    """Score each sequence under every chain and take the argmax.

    Posteriors are a stable softmax of the log-likelihoods under uniform
    cluster priors; ties go to the lowest cluster index (np.argmax picks the
    first maximum). Raises AssignmentError if a sequence scores -inf under
    every chain.
    """
    encoded = _encode(sequences)
    for seq in sequences:
        if max(seq.symbols) >= len(model.alphabet):
            raise ValueError(
                f"case {seq.case_id!r} uses symbols outside the model alphabet"
            )
    lls = _score_matrix(encoded, model)
    hard: dict[str, int] = {}
    memberships: dict[str, tuple[tuple[int, float], ...]] = {}
    for i, seq in enumerate(sequences):
        post = _posteriors(lls[i], seq.case_id)
        hard[seq.case_id] = int(np.argmax(lls[i]))
        memberships[seq.case_id] = tuple((j, float(p)) for j, p in enumerate(post))
    return hard, memberships


def reestimate(
    sequences: Sequence[ActivitySequence],
    hard_assignment: dict[str, int],
    alphabet: Sequence[str],
    k: int,
    alpha: float,
    *,
    reseed_key: tuple[int, ...] = (),
) -> ClusterModel:
    """Re-fit every chain from the sequences assigned to it.

    Add-alpha smoothing: initial[a] = (starts_a + alpha) / (n_k + alpha*|A|)
    and transitions[i][j] = (bigrams_ij + alpha) / (bigrams_i + alpha*|A|).
    With alpha = 0, rows with no observations fall back to uniform (they are
    unconstrained by the data). A cluster with no assigned sequences is
    replaced by a fresh random draw keyed by reseed_key, deterministically.
    """
    alphabet = tuple(alphabet)
    n = len(alphabet)
    start_counts = np.zeros((k, n))
    bigram_counts = np.zeros((k, n, n))
    assigned = np.zeros(k, dtype=int)
    for seq in sequences:
        c = hard_assignment[seq.case_id]
        if not 0 <= c < k:
            raise ValueError(f"case {seq.case_id!r} assigned to invalid cluster {c}")
        sym = np.asarray(seq.symbols, dtype=np.intp)
        assigned[c] += 1
        start_counts[c, sym[0]] += 1
        if len(sym) > 1:
            np.add.at(bigram_counts[c], (sym[:-1], sym[1:]), 1)

    chains = []
    for c in range(k):
        if assigned[c] == 0:
            chains.append(_random_chain(alphabet, reseed_key, c))
            continue
        initial = _smoothed(start_counts[c], alpha)
        transitions = np.stack(
            [_smoothed(bigram_counts[c, i], alpha) for i in range(n)]
        )
        chains.append(
            MarkovChainModel(alphabet=alphabet, initial=initial, transitions=transitions)
        )
    return ClusterModel(chains=tuple(chains), smoothing_alpha=alpha)


def _smoothed(counts: np.ndarray, alpha: float) -> np.ndarray:
    total = counts.sum()
    if total == 0 and alpha == 0:
        return np.full(len(counts), 1.0 / len(counts))
    return (counts + alpha) / (total + alpha * len(counts))


def fit(
    log: EventLog,
    k: int,
    seed: int,
    alpha: float = 0.01,
    max_iter: int = 100,
    tol: float = 1e-6,
    restarts: int = 10,
) -> ClusteringResult:
    """Cluster the log's cases into K groups of similar activity sequences.

    Runs `restarts` independent EM runs (restart r keyed by (seed, r)) and
    keeps the one with the highest final objective, ties to the lowest r.
    The objective is the sum over sequences of the best log-likelihood over
    chains; a run stops when the hard assignment repeats, the relative
    objective improvement drops below tol, or max_iter is reached.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not log.traces:
        raise EmptyLogError("cannot cluster an empty log")
    sequences = to_sequences(log)
    alphabet = log.activity_order()
    encoded = _encode(sequences)

    best: dict | None = None
    for r in range(restarts):
        run = _single_run(
            sequences, encoded, alphabet, k, (seed, r), alpha, max_iter, tol
        )
        if best is None or run["objective"] > best["objective"]:
            best = run
    assert best is not None

    return ClusteringResult(
        model=best["model"],
        hard_assignment=best["hard"],
        memberships=best["memberships"],
        objective_trace=tuple(best["trace"]),
        iterations=len(best["trace"]),
        converged=best["converged"],
        seed=seed,
        restarts=restarts,
        reseed_count=best["reseeds"],
    )


def _single_run(
    sequences: Sequence[ActivitySequence],
    encoded: list[np.ndarray],
    alphabet: tuple[str, ...],
    k: int,
    key: tuple[int, ...],
    alpha: float,
    max_iter: int,
    tol: float,
) -> dict:
    model = init_models(alphabet, k, key, alpha=alpha)
    trace: list[float] = []
    prev_hard: np.ndarray | None = None
    prev_obj: float | None = None
    converged = False
    reseeds = 0
    hard_arr = np.zeros(len(sequences), dtype=int)
    memberships: dict[str, tuple[tuple[int, float], ...]] = {}

    for iteration in range(1, max_iter + 1):
        lls = _score_matrix(encoded, model)
        for i, seq in enumerate(sequences):
            post = _posteriors(lls[i], seq.case_id)
            hard_arr[i] = int(np.argmax(lls[i]))
            memberships[seq.case_id] = tuple(
                (j, float(p)) for j, p in enumerate(post)
            )
        objective = float(np.max(lls, axis=1).sum())
        trace.append(objective)

        if prev_hard is not None and np.array_equal(hard_arr, prev_hard):
            converged = True
            break
        if prev_obj is not None:
            rel = abs(objective - prev_obj) / max(abs(prev_obj), 1e-12)
            if rel < tol:
                converged = True
                break
        prev_hard = hard_arr.copy()
        prev_obj = objective
        hard = {seq.case_id: int(hard_arr[i]) for i, seq in enumerate(sequences)}
        reseeds += k - len(set(hard.values()))
        # Reseed keys carry the iteration so repeated reseeds differ.
        model = reestimate(
            sequences, hard, alphabet, k, alpha, reseed_key=(*key, iteration)
        )

    return {
        "model": model,
        "hard": {seq.case_id: int(hard_arr[i]) for i, seq in enumerate(sequences)},
        "memberships": memberships,
        "trace": trace,
        "objective": trace[-1],
        "converged": converged,
        "reseeds": reseeds,
    }


def split_log(
    log: EventLog,
    result: ClusteringResult,
    tau: float | None = None,
) -> list[EventLog]:
    """Split a log into one sub-log per cluster.

    Without tau, each case goes only to its hard cluster and the sub-logs
    partition the log. With tau in (0, 1], a case is copied into every
    cluster whose posterior is >= tau (and always into its hard cluster),
    so sub-logs may overlap and their event counts can exceed the log's.
    """
    if tau is not None and not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    if set(result.hard_assignment) != {t.case_id for t in log.traces}:
        raise ValueError("clustering result does not cover this log's cases")
    k = result.model.k
    members: list[list] = [[] for _ in range(k)]
    for trace in log.traces:
        case = trace.case_id
        targets = {result.hard_assignment[case]}
        if tau is not None:
            targets.update(
                c for c, p in result.memberships[case] if p >= tau
            )
        for c in targets:
            members[c].append(trace)
    return [EventLog.from_traces(traces) for traces in members]


def summarize_clusters(sub_logs: Iterable[EventLog]) -> ClusterSummary:
    """Per-cluster instance groups.

    Within a cluster, cases sharing an identical activity sequence form one
    group reporting its case ids, events per case, and the longest case
    duration. Groups are sorted by case count, then max duration, descending.
    """
    breakdowns = []
    for idx, sub in enumerate(sub_logs):
        groups: dict[tuple[str, ...], list] = {}
        for trace in sub.traces:
            groups.setdefault(trace.activities, []).append(trace)
        built = [
            InstanceGroup(
                case_ids=tuple(t.case_id for t in traces),
                events_per_case=len(seq),
                max_case_duration_ms=max(t.duration_ms for t in traces),
            )
            for seq, traces in groups.items()
        ]
        built.sort(key=lambda g: (-g.case_count, -g.max_case_duration_ms))
        breakdowns.append(
            ClusterBreakdown(
                cluster=idx,
                groups=tuple(built),
                case_count=sub.case_count,
                event_count=sub.event_count,
            )
        )
    return ClusterSummary(clusters=tuple(breakdowns))
