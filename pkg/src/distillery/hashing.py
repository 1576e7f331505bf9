"""Classical Monte Carlo for hashing-style distillation of Bell-diagonal states.

A Bell-diagonal n-copy state is represented by its index vector: one symbol
from {0, 1, 2, 3} per pair, in the fixed Bell label order.  Symbols are
encoded as bit pairs (high bit first, so pair i occupies flat bits 2i and
2i+1); the low bit of a pair is the one read out by a measurement round, and
we call it the amplitude bit.  Each round consumes one pair and reveals one
parity of the surviving description, exactly the linear-algebra shadow of the
bilateral-CNOT measurement network.

Decoding enumerates the closed typicality window
|-(1/n) sum_j log2 P(x_j) - H| <= epsilon by depth-first search with
log-probability pruning, then keeps candidates whose parities match every
revealed bit.  A trial succeeds when every surviving candidate agrees with
the truth about the final (unmeasured) pairs; when nothing survives, an
arbitrary fallback sequence is decoded and almost always counts as failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DecoderBudgetError,
    DimensionMismatchError,
    EntropyTooHighError,
    InvalidDistributionError,
)

__all__ = [
    "DEFAULT_DECODER_BUDGET",
    "SourceDist",
    "BellIndexVector",
    "YieldPlan",
    "HashingTrialResult",
    "FailureBound",
    "MissEstimate",
    "shannon_entropy",
    "is_typical",
    "parity",
    "round_update",
    "plan_yield",
    "run_hashing_trial",
    "failure_bound",
    "typicality_miss_estimate",
    "net_rate",
    "enumerate_typical",
]

DEFAULT_DECODER_BUDGET = 10**6
_SUM_TOL = 1e-12


def shannon_entropy(p) -> float:
    """Base-2 entropy of a probability vector; zero entries contribute zero."""
    values = [float(v) for v in p]
    if min(values) < -_SUM_TOL:
        raise InvalidDistributionError(f"negative probability {min(values)}")
    total = sum(values)
    if abs(total - 1.0) > 1e-9:
        raise InvalidDistributionError(f"probabilities sum to {total}, not 1")
    acc = 0.0
    for v in values:
        if v > 0.0:
            acc -= v * math.log2(v)
    return acc


@dataclass(frozen=True)
class SourceDist:
    """Bell-index source: i.i.d. symbols from {0,1,2,3} with weights p.

    The entropy is computed once at construction and cached on ``h``.
    """

    p: tuple[float, float, float, float]
    h: float = None  # type: ignore[assignment]  # filled in __post_init__

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        if len(values) != 4:
            raise InvalidDistributionError(f"need four symbol weights, got {len(values)}")
        if min(values) < 0.0:
            raise InvalidDistributionError(f"negative probability {min(values)}")
        if abs(sum(values) - 1.0) > _SUM_TOL:
            raise InvalidDistributionError(
                f"probabilities sum to {sum(values)}, not 1 within {_SUM_TOL}"
            )
        object.__setattr__(self, "p", values)
        object.__setattr__(self, "h", shannon_entropy(values))

    def surprisals(self) -> tuple[float, float, float, float]:
        """-log2 p per symbol; infinite for zero-probability symbols."""
        return tuple(-math.log2(v) if v > 0.0 else math.inf for v in self.p)


@dataclass(frozen=True)
class BellIndexVector:
    """Immutable vector of Bell indices with the bit-pair flattening attached."""

    entries: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.entries)
        for v in values:
            if v not in (0, 1, 2, 3):
                raise ValueError(f"Bell index must be in 0..3, got {v}")
        object.__setattr__(self, "entries", values)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __xor__(self, other: "BellIndexVector") -> "BellIndexVector":
        if len(other) != len(self):
            raise DimensionMismatchError("XOR needs equal-length vectors")
        return BellIndexVector(tuple(a ^ b for a, b in zip(self.entries, other.entries)))

    def to_bits(self) -> np.ndarray:
        """Flat 2m bit string; pair i occupies bits (2i, 2i+1), high bit first."""
        out = np.empty(2 * len(self.entries), dtype=np.uint8)
        for i, v in enumerate(self.entries):
            out[2 * i] = v >> 1
            out[2 * i + 1] = v & 1
        return out

    @classmethod
    def from_bits(cls, bits) -> "BellIndexVector":
        arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if arr.size % 2 != 0:
            raise ValueError(f"bit string length {arr.size} is odd")
        pairs = arr.reshape(-1, 2)
        return cls(tuple(int(2 * hi + lo) for hi, lo in pairs))


def parity(s, x) -> int:
    """GF(2) inner product of two equal-length bit strings."""
    sa = np.asarray(s, dtype=np.uint8).reshape(-1)
    xa = np.asarray(x, dtype=np.uint8).reshape(-1)
    if sa.shape != xa.shape:
        raise DimensionMismatchError(f"bit strings of length {sa.size} vs {xa.size}")
    return int((sa & xa).sum() & 1)


def round_update(s, x: BellIndexVector) -> tuple[int, BellIndexVector]:
    """One measurement round: reveal the parity s.x and drop one pair.

    Interpreting s pairwise, a pair is selected when its s-pair is non-zero;
    the selected combination (amplitude bit, phase bit, or their XOR) is
    rotated into the amplitude slot, all selected amplitude bits accumulate
    into the lowest selected pair (whose phase spreads back onto the other
    selected phases), that amplitude bit is read out as the parity, and the
    read pair is deleted.  The map is linear over GF(2) and revealed bits
    equal parity(s, x) exactly.
    """
    m = len(x)
    sa = np.asarray(s, dtype=np.uint8).reshape(-1)
    if sa.size != 2 * m:
        raise DimensionMismatchError(f"need {2 * m} parity bits, got {sa.size}")
    if not sa.any():
        raise ValueError("all-zero parity string selects nothing; caller must resample")
    bits = x.to_bits()
    hi = bits[0::2].astype(np.uint8)  # phase bits
    lo = bits[1::2].astype(np.uint8)  # amplitude bits
    s_hi = sa[0::2]
    s_lo = sa[1::2]
    selected = (s_hi | s_lo).astype(bool)

    # Rotate each selected pair so the selected bit sits in the amplitude slot.
    swap = (s_hi == 1) & (s_lo == 0)
    hi[swap], lo[swap] = lo[swap].copy(), hi[swap].copy()
    both = (s_hi == 1) & (s_lo == 1)
    lo[both] ^= hi[both]

    chosen = np.flatnonzero(selected)
    i0 = int(chosen[0])
    others = chosen[1:]
    lo[i0] ^= np.bitwise_xor.reduce(lo[others]) if others.size else 0
    hi[others] ^= hi[i0]
    t = int(lo[i0])

    keep = np.ones(m, dtype=bool)
    keep[i0] = False
    remaining = tuple(int(2 * h + l) for h, l in zip(hi[keep], lo[keep]))
    return t, BellIndexVector(remaining)


@dataclass(frozen=True)
class YieldPlan:
    """Round count and typicality window for a hashing run of n pairs."""

    n: int
    epsilon: float
    r: int
    m: int
    h: float
    delta: float
    rate_guarantee: float


def plan_yield(
    src: SourceDist, n: int, epsilon: float | None = None, r: int | None = None
) -> YieldPlan:
    """Default schedule: r = floor(n(1+h)/2) rounds, epsilon = (1-h)/4.

    Keeps m = n - r >= n(1-h)/2 output pairs, so the guaranteed rate m/n is
    at least half the entropy defect.  Sources with h >= 1 are rejected.
    """
    n = int(n)
    if n < 4:
        raise DimensionMismatchError(f"need n >= 4 pairs, got {n}")
    h = src.h
    if h >= 1.0:
        raise EntropyTooHighError(
            f"source entropy {h} >= 1 bit: the yield formulas give nothing"
        )
    if epsilon is None:
        epsilon = (1.0 - h) / 4.0
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise InvalidDistributionError(f"epsilon must be positive, got {epsilon}")
    if r is None:
        r = math.floor(n * (1.0 + h) / 2.0)
    r = int(r)
    if not 1 <= r <= n - 1:
        raise DimensionMismatchError(f"round count r={r} outside [1, {n - 1}]")
    m = n - r
    return YieldPlan(
        n=n,
        epsilon=epsilon,
        r=r,
        m=m,
        h=h,
        delta=(1.0 - h) / 2.0 - epsilon,
        rate_guarantee=m / n,
    )


def is_typical(x, src: SourceDist, epsilon: float) -> bool:
    """Closed typicality window on the empirical mean surprisal.

    A string containing a zero-probability symbol is never typical.
    """
    if epsilon <= 0.0:
        raise InvalidDistributionError(f"epsilon must be positive, got {epsilon}")
    entries = x.entries if isinstance(x, BellIndexVector) else tuple(int(v) for v in x)
    n = len(entries)
    if n == 0:
        raise DimensionMismatchError("typicality needs at least one symbol")
    surprisal = src.surprisals()
    total = 0.0
    for v in entries:
        s = surprisal[v]
        if math.isinf(s):
            return False
        total += s
    return abs(total / n - src.h) <= epsilon


_TYPICAL_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray, int]] = {}


def enumerate_typical(
    src: SourceDist, n: int, epsilon: float, budget: int = DEFAULT_DECODER_BUDGET
) -> tuple[np.ndarray, np.ndarray, int]:
    """All typical index strings of length n, by pruned depth-first search.

    Returns (symbols, bits, visits): a (C, n) symbol matrix, its (C, 2n) bit
    flattening, and the number of search nodes visited.  Enumerations are
    cached per (source, n, epsilon); exceeding the visit budget raises.
    """
    key = (src.p, int(n), float(epsilon))
    cached = _TYPICAL_CACHE.get(key)
    if cached is not None and cached[2] <= budget:
        return cached

    surprisal = src.surprisals()
    symbols = [k for k in range(4) if not math.isinf(surprisal[k])]
    finite = [surprisal[k] for k in symbols]
    min_s, max_s = min(finite), max(finite)
    lo = n * (src.h - epsilon)
    hi = n * (src.h + epsilon)
    out: list[tuple[int, ...]] = []
    visits = 0
    prefix = [0] * n

    def descend(depth: int, total: float) -> None:
        nonlocal visits
        visits += 1
        if visits > budget:
            raise DecoderBudgetError(
                f"typical-set enumeration exceeded {budget} visits", visits=visits
            )
        remaining = n - depth
        # Prune branches that cannot land inside the window (small slack so
        # roundoff never drops a boundary string; leaves recheck exactly).
        if total + remaining * max_s < lo - 1e-9:
            return
        if total + remaining * min_s > hi + 1e-9:
            return
        if depth == n:
            if abs(total / n - src.h) <= epsilon:
                out.append(tuple(prefix))
            return
        for k in symbols:
            prefix[depth] = k
            descend(depth + 1, total + surprisal[k])

    descend(0, 0.0)
    syms = np.array(out, dtype=np.uint8).reshape(len(out), n)
    bits = np.empty((len(out), 2 * n), dtype=np.uint8)
    bits[:, 0::2] = syms >> 1
    bits[:, 1::2] = syms & 1
    result = (syms, bits, visits)
    _TYPICAL_CACHE[key] = result
    return result


@dataclass(frozen=True)
class HashingTrialResult:
    """Outcome of one simulated hashing run."""

    sampled: tuple[int, ...]
    parity_bits: tuple[int, ...]
    true_final: BellIndexVector
    decoded_final: BellIndexVector
    success: bool
    typical: bool
    parities_matched: int
    candidates_visited: int
    budget_exceeded: bool


def _draw_nonzero_bits(rng: np.random.Generator, length: int) -> np.ndarray:
    while True:
        s = rng.integers(0, 2, size=length, dtype=np.uint8)
        if s.any():
            return s


def _parity_matrix(s_list: list[np.ndarray], n: int) -> np.ndarray:
    """Push bit-basis vectors through the rounds; column j holds the parities
    revealed when the input is the j-th flat basis bit.  Linearity of the
    round map makes this the full parity functional of any input."""
    r = len(s_list)
    t_matrix = np.zeros((r, 2 * n), dtype=np.uint8)
    basis = np.zeros(2 * n, dtype=np.uint8)
    for j in range(2 * n):
        basis[:] = 0
        basis[j] = 1
        x = BellIndexVector.from_bits(basis)
        for k, s in enumerate(s_list):
            t, x = round_update(s, x)
            t_matrix[k, j] = t
    return t_matrix


def _chain(s_list: list[np.ndarray], x: BellIndexVector) -> tuple[list[int], BellIndexVector]:
    bits = []
    for s in s_list:
        t, x = round_update(s, x)
        bits.append(t)
    return bits, x


def _fallback_sequence(src: SourceDist, n: int) -> BellIndexVector:
    best = max(range(4), key=lambda k: (src.p[k], -k))
    return BellIndexVector((best,) * n)


def run_hashing_trial(
    src: SourceDist,
    plan: YieldPlan,
    seed,
    budget: int = DEFAULT_DECODER_BUDGET,
) -> HashingTrialResult:
    """Sample one index string, run the measurement rounds, decode, compare.

    ``seed`` feeds a fresh generator; derive per-trial seeds as
    (master_seed, trial_index) sequences so partitioning trials across
    workers cannot change any individual outcome.
    """
    if abs(plan.h - src.h) > 1e-12:
        raise DimensionMismatchError(
            f"plan entropy {plan.h} does not match source entropy {src.h}"
        )
    n, r = plan.n, plan.r
    rng = np.random.default_rng(seed)
    sampled = tuple(int(v) for v in rng.choice(4, size=n, p=np.asarray(src.p)))
    x0 = BellIndexVector(sampled)
    s_list = [_draw_nonzero_bits(rng, 2 * (n - k)) for k in range(r)]
    parity_bits, true_final = _chain(s_list, x0)
    typical = is_typical(x0, src, plan.epsilon)

    budget_exceeded = False
    try:
        _, cand_bits, visits = enumerate_typical(src, n, plan.epsilon, budget=budget)
    except DecoderBudgetError as exc:
        cand_bits = np.empty((0, 2 * n), dtype=np.uint8)
        visits = exc.visits
        budget_exceeded = True

    survivors: list[int] = []
    if cand_bits.shape[0]:
        t_matrix = _parity_matrix(s_list, n)
        predicted = (cand_bits.astype(np.int64) @ t_matrix.T.astype(np.int64)) & 1
        target = np.asarray(parity_bits, dtype=np.int64)
        survivors = list(np.flatnonzero((predicted == target).all(axis=1)))

    if survivors:
        finals = [
            _chain(s_list, BellIndexVector.from_bits(cand_bits[i]))[1] for i in survivors
        ]
        decoded_final = finals[0]
        success = all(f == true_final for f in finals)
    else:
        # Nothing matched (or nothing was typical): decode an arbitrary
        # sequence, which only counts as success by coincidence.
        _, decoded_final = _chain(s_list, _fallback_sequence(src, n))
        success = decoded_final == true_final and not budget_exceeded

    return HashingTrialResult(
        sampled=sampled,
        parity_bits=tuple(parity_bits),
        true_final=true_final,
        decoded_final=decoded_final,
        success=success,
        typical=typical,
        parities_matched=len(survivors),
        candidates_visited=visits,
        budget_exceeded=budget_exceeded,
    )


@dataclass(frozen=True)
class FailureBound:
    """Decoding failure bound: typicality miss plus the parity collision term."""

    total: float
    collision_term: float
    q_estimate: float


def failure_bound(src: SourceDist, plan: YieldPlan, q_estimate: float) -> FailureBound:
    """q + 2^(n h + n epsilon - r): miss the window, or collide on all parities."""
    q = float(q_estimate)
    if not 0.0 <= q <= 1.0:
        raise InvalidDistributionError(f"q estimate {q} outside [0, 1]")
    collision = 2.0 ** (plan.n * (plan.h + plan.epsilon) - plan.r)
    return FailureBound(total=q + collision, collision_term=collision, q_estimate=q)


@dataclass(frozen=True)
class MissEstimate:
    """Monte Carlo estimate of the typicality miss probability with Wilson CI."""

    q_hat: float
    lower: float
    upper: float
    trials: int


_WILSON_Z = 1.959963984540054  # two-sided 95%


def typicality_miss_estimate(
    src: SourceDist, n: int, epsilon: float, trials: int, seed: int = 0
) -> MissEstimate:
    """Sample strings from the source and count those outside the window."""
    trials = int(trials)
    if trials < 1:
        raise DimensionMismatchError(f"need at least one trial, got {trials}")
    rng = np.random.default_rng(seed)
    surprisal = np.array(
        [s if not math.isinf(s) else np.inf for s in src.surprisals()]
    )
    draws = rng.choice(4, size=(trials, int(n)), p=np.asarray(src.p))
    means = surprisal[draws].sum(axis=1) / float(n)
    misses = int((np.abs(means - src.h) > epsilon).sum())
    q_hat = misses / trials
    z2 = _WILSON_Z**2
    denom = 1.0 + z2 / trials
    center = (q_hat + z2 / (2 * trials)) / denom
    radius = (
        _WILSON_Z
        * math.sqrt(q_hat * (1.0 - q_hat) / trials + z2 / (4.0 * trials**2))
        / denom
    )
    return MissEstimate(
        q_hat=q_hat,
        lower=max(0.0, center - radius),
        upper=min(1.0, center + radius),
        trials=trials,
    )


def net_rate(copies_per_pair: int, entropy: float) -> float:
    """Guaranteed rate (1 - h) / (2 N) when each input pair costs N raw copies."""
    n = int(copies_per_pair)
    if n < 1:
        raise DimensionMismatchError(f"copies per pair must be >= 1, got {n}")
    h = float(entropy)
    if h >= 1.0:
        raise EntropyTooHighError(f"entropy {h} >= 1 bit gives rate zero")
    if h < 0.0:
        raise InvalidDistributionError(f"entropy must be non-negative, got {h}")
    return (1.0 - h) / (2.0 * n)
