"""Local operations: Kraus channels, two-sided filters, and selective outcomes.

Operator-sum maps here are always understood as products of an Alice part and
a Bob part acting on the copy-major global ordering.  Channels record a short
``provenance`` note saying how they were built from local instruments, since
membership in the local-operations class is asserted by construction rather
than decided algorithmically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidChannelError,
    InvalidFilterError,
    InvalidStateError,
    NothingToCarveError,
    ZeroProbabilityError,
)
from .qstate import (
    DensityOperator,
    UnnormalizedOperator,
    format_real,
    max_side_dim,
)

__all__ = [
    "COMPLETENESS_TOL",
    "PRODUCT_FORM_TOL",
    "ZERO_PROBABILITY_TOL",
    "KrausChannel",
    "LocalFilter",
    "SelectiveOutcome",
    "CarveReport",
    "apply_channel",
    "apply_selective",
    "postselect_compose",
    "support_projector",
    "carve_pairs",
    "product_factor_singular_values",
    "channel_to_json",
    "channel_from_json",
]

COMPLETENESS_TOL = 1e-9
PRODUCT_FORM_TOL = 1e-8
ZERO_PROBABILITY_TOL = 1e-12
_SUPPORT_RANK_TOL = 1e-8


def product_factor_singular_values(
    op: np.ndarray, in_dims: tuple[int, int], out_dims: tuple[int, int]
) -> np.ndarray:
    """Singular values of the operator rearranged so rank one means A tensor B.

    The operator maps (a_in * b_in) -> (a_out * b_out) in copy-major order;
    grouping (Alice out, Alice in) against (Bob out, Bob in) turns a product
    operator into a rank-one matrix.
    """
    a_in, b_in = in_dims
    a_out, b_out = out_dims
    arr = op.reshape(a_out, b_out, a_in, b_in).transpose(0, 2, 1, 3)
    return np.linalg.svd(arr.reshape(a_out * a_in, b_out * b_in), compute_uv=False)


def _is_product_form(op, in_dims, out_dims) -> bool:
    s = product_factor_singular_values(op, in_dims, out_dims)
    return len(s) < 2 or s[1] < PRODUCT_FORM_TOL


@dataclass(frozen=True)
class KrausChannel:
    """Operator-sum map with declared input bipartition and output copy layout.

    ``trace_preserving`` distinguishes full channels from selective branches
    (completeness sum at most the identity).  ``product_form`` declares every
    Kraus operator to factor as an Alice part tensor a Bob part; the claim is
    verified numerically on construction.
    """

    kraus_ops: tuple[np.ndarray, ...]
    in_dims: tuple[int, int]
    out_factors: tuple[tuple[int, int], ...]
    product_form: bool = False
    trace_preserving: bool = False
    provenance: str = ""

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "in_dims", (int(self.in_dims[0]), int(self.in_dims[1])))
        object.__setattr__(
            self, "out_factors", tuple((int(a), int(b)) for a, b in self.out_factors)
        )
        if not ops:
            raise InvalidChannelError("channel needs at least one Kraus operator")
        din = self.in_dim
        dout = self.out_dim
        for op in ops:
            if op.shape != (dout, din):
                raise InvalidChannelError(
                    f"Kraus operator shape {op.shape} does not match ({dout}, {din})"
                )
        gram = sum(op.conj().T @ op for op in ops)
        eigenvalues = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
        if eigenvalues.max() > 1.0 + COMPLETENESS_TOL:
            raise InvalidChannelError(
                f"completeness sum exceeds the identity (max eigenvalue {eigenvalues.max():.12f})"
            )
        if self.trace_preserving:
            residue = np.abs(gram - np.eye(din)).max()
            if residue > COMPLETENESS_TOL:
                raise InvalidChannelError(
                    f"declared trace preserving but completeness residue is {residue:.3e}"
                )
        if self.product_form:
            for i, op in enumerate(ops):
                if not _is_product_form(op, self.in_dims, self.out_dims):
                    raise InvalidChannelError(
                        f"Kraus operator {i} is not a product of local operators"
                    )

    @property
    def in_dim(self) -> int:
        return self.in_dims[0] * self.in_dims[1]

    @property
    def out_dims(self) -> tuple[int, int]:
        return (
            math.prod(a for a, _ in self.out_factors),
            math.prod(b for _, b in self.out_factors),
        )

    @property
    def out_dim(self) -> int:
        a, b = self.out_dims
        return a * b


@dataclass(frozen=True)
class LocalFilter:
    """One Kraus operator per side: rho -> (A tensor B) rho (A tensor B)†.

    Normalized filters have spectral norm at most one per side, so the filter
    trace reads as a probability.  Set ``normalized=False`` to carry analysis
    operators that are only used structurally (e.g. for support projectors).
    """

    a_op: np.ndarray
    b_op: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        a = np.array(self.a_op, dtype=complex)
        b = np.array(self.b_op, dtype=complex)
        if a.ndim != 2 or b.ndim != 2:
            raise InvalidFilterError("filter operators must be matrices")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a_op", a)
        object.__setattr__(self, "b_op", b)
        if self.normalized:
            for name, op in (("a_op", a), ("b_op", b)):
                norm = np.linalg.norm(op, 2)
                if norm > 1.0 + COMPLETENESS_TOL:
                    raise InvalidFilterError(
                        f"{name} has spectral norm {norm:.12f} > 1; "
                        "flag the filter as unnormalized if this is intended"
                    )

    @property
    def in_dims(self) -> tuple[int, int]:
        return (self.a_op.shape[1], self.b_op.shape[1])

    @property
    def out_dims(self) -> tuple[int, int]:
        return (self.a_op.shape[0], self.b_op.shape[0])


@dataclass(frozen=True)
class SelectiveOutcome:
    """One branch of a selective map: unnormalized state plus its probability."""

    unnormalized_state: UnnormalizedOperator
    probability: float

    def __post_init__(self):
        p = float(self.probability)
        object.__setattr__(self, "probability", p)
        if not 0.0 < p <= 1.0 + COMPLETENESS_TOL:
            raise ZeroProbabilityError(f"outcome probability {p} outside (0, 1]")
        if abs(p - self.unnormalized_state.weight) > TRACE_CONSISTENCY_TOL:
            raise InvalidStateError(
                f"probability {p} inconsistent with branch trace "
                f"{self.unnormalized_state.weight}"
            )

    def normalized(self) -> DensityOperator:
        return self.unnormalized_state.normalized()


TRACE_CONSISTENCY_TOL = 1e-9


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Apply a trace-preserving channel and rewrap with its output copy layout."""
    if not channel.trace_preserving:
        raise InvalidChannelError(
            "apply_channel needs a trace-preserving channel; use apply_selective for branches"
        )
    if channel.in_dims != (rho.dim_a, rho.dim_b):
        raise DimensionMismatchError(
            f"channel input {channel.in_dims} does not match state ({rho.dim_a}, {rho.dim_b})"
        )
    out = sum(op @ rho.matrix @ op.conj().T for op in channel.kraus_ops)
    return DensityOperator(channel.out_factors, out)


def apply_selective(
    op: LocalFilter | KrausChannel, rho: DensityOperator
) -> SelectiveOutcome:
    """Apply a filter or a sub-channel branch, keeping the outcome weight.

    Raises ZeroProbabilityError when the branch weight falls below 1e-12, so
    callers never divide by a numerically vanished trace.
    """
    if isinstance(op, LocalFilter):
        if not op.normalized:
            raise InvalidFilterError(
                "selective application needs a normalized filter; "
                "the trace of an unnormalized branch is not a probability"
            )
        if op.in_dims != (rho.dim_a, rho.dim_b):
            raise DimensionMismatchError(
                f"filter input {op.in_dims} does not match state ({rho.dim_a}, {rho.dim_b})"
            )
        m = np.kron(op.a_op, op.b_op)
        out = m @ rho.matrix @ m.conj().T
        out_factors = (op.out_dims,)
    elif isinstance(op, KrausChannel):
        if op.in_dims != (rho.dim_a, rho.dim_b):
            raise DimensionMismatchError(
                f"channel input {op.in_dims} does not match state ({rho.dim_a}, {rho.dim_b})"
            )
        out = sum(k @ rho.matrix @ k.conj().T for k in op.kraus_ops)
        out_factors = op.out_factors
    else:
        raise TypeError(f"expected LocalFilter or KrausChannel, got {type(op)!r}")

    probability = float(np.trace(out).real)
    if probability <= ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityError(
            f"selective branch has probability {probability:.3e} <= {ZERO_PROBABILITY_TOL}"
        )
    branch = UnnormalizedOperator(out_factors, out)
    return SelectiveOutcome(branch, probability)


def postselect_compose(
    p: float, rho_prime: DensityOperator, tau: DensityOperator, n: int
) -> DensityOperator:
    """Mix the postselected output with a failure state over n attempts.

    Returns (1 - (1-p)^n) rho_prime + (1-p)^n tau: the channel that keeps the
    first success among n tries and falls back to tau when every try fails.
    """
    p = float(p)
    n = int(n)
    if not 0.0 < p <= 1.0:
        raise ZeroProbabilityError(f"success probability {p} outside (0, 1]")
    if n < 1:
        raise DimensionMismatchError(f"attempt count must be >= 1, got {n}")
    if (rho_prime.dim_a, rho_prime.dim_b) != (tau.dim_a, tau.dim_b):
        raise DimensionMismatchError(
            f"success and failure states live on ({rho_prime.dim_a},{rho_prime.dim_b}) "
            f"vs ({tau.dim_a},{tau.dim_b})"
        )
    fail = (1.0 - p) ** n
    mixed = (1.0 - fail) * rho_prime.matrix + fail * tau.matrix
    return DensityOperator(rho_prime.factors, mixed)


def support_projector(f: LocalFilter) -> tuple[np.ndarray, np.ndarray]:
    """Row-space projectors (Pi_a, Pi_b) of a filter with per-side rank <= 2.

    Satisfies (A tensor B)(Pi_a tensor Pi_b) = A tensor B; rank above two is
    rejected because the downstream compression step expects qubit ranges.
    """
    projectors = []
    for name, op in (("a_op", f.a_op), ("b_op", f.b_op)):
        _, singulars, vh = np.linalg.svd(op)
        rank = int((singulars > _SUPPORT_RANK_TOL).sum())
        if rank > 2:
            raise InvalidFilterError(
                f"{name} has numerical rank {rank} > 2; it does not map onto a qubit space"
            )
        rows = vh[:rank]
        projectors.append(rows.conj().T @ rows)
    return projectors[0], projectors[1]


@dataclass(frozen=True)
class CarveReport:
    """Result of carving qubit pairs out of a d x d maximally entangled state."""

    d: int
    omega: float
    n_pairs: int
    kappa: int
    success_prob: float
    channel: KrausChannel = field(repr=False)


def carve_pairs(d: int, omega: float) -> CarveReport:
    """Selective map cutting floor(omega * log2 d) qubit pairs from dimension d.

    Both sides project onto aligned blocks of size 2^{n_pairs}; outcomes with
    coinciding block index j < kappa form the success branch.  On the d x d
    maximally entangled input the success branch has probability
    kappa * 2^{n_pairs} / d and yields n_pairs perfect qubit pairs.
    """
    d = int(d)
    omega = float(omega)
    if d < 2:
        raise DimensionMismatchError(f"carving needs d >= 2, got {d}")
    if d > max_side_dim():
        raise DimensionMismatchError(
            f"d = {d} exceeds the per-side dimension cap {max_side_dim()}"
        )
    if not 0.0 < omega < 1.0:
        raise DimensionMismatchError(f"omega must lie in (0, 1), got {omega}")
    n_pairs = math.floor(omega * math.log2(d))
    if n_pairs == 0:
        raise NothingToCarveError(
            f"floor(omega * log2 d) = 0 for d={d}, omega={omega}: nothing to carve"
        )
    block = 2**n_pairs
    kappa = d // block
    success_prob = kappa * block / d
    ops = []
    for j in range(kappa):
        pi = np.zeros((block, d), dtype=complex)
        for level in range(block):
            pi[level, j * block + level] = 1.0
        ops.append(np.kron(pi, pi))
    channel = KrausChannel(
        kraus_ops=tuple(ops),
        in_dims=(d, d),
        out_factors=((2, 2),) * n_pairs,
        product_form=True,
        trace_preserving=False,
        provenance="aligned local block projections, coinciding outcomes kept",
    )
    return CarveReport(
        d=d,
        omega=omega,
        n_pairs=n_pairs,
        kappa=kappa,
        success_prob=success_prob,
        channel=channel,
    )


# --- JSON channel format ---------------------------------------------------


def _matrix_to_json(m: np.ndarray) -> str:
    rows = []
    for row in m:
        cells = ",".join(f"[{format_real(v.real)},{format_real(v.imag)}]" for v in row)
        rows.append(f"[{cells}]")
    return "[" + ",".join(rows) + "]"


def channel_to_json(channel: KrausChannel) -> str:
    ops = ",".join(_matrix_to_json(k) for k in channel.kraus_ops)
    factors = ",".join(f"[{a},{b}]" for a, b in channel.out_factors)
    flags = (
        f'"product_form":{str(channel.product_form).lower()},'
        f'"trace_preserving":{str(channel.trace_preserving).lower()}'
    )
    import json

    prov = json.dumps(channel.provenance)
    return (
        f'{{"in_dims":[{channel.in_dims[0]},{channel.in_dims[1]}],'
        f'"out_factors":[{factors}],{flags},"provenance":{prov},"kraus_ops":[{ops}]}}'
    )


def channel_from_json(text: str) -> KrausChannel:
    import json

    doc = json.loads(text)
    ops = []
    for raw in doc["kraus_ops"]:
        m = np.array(
            [[complex(cell[0], cell[1]) for cell in row] for row in raw], dtype=complex
        )
        ops.append(m)
    return KrausChannel(
        kraus_ops=tuple(ops),
        in_dims=tuple(doc["in_dims"]),
        out_factors=tuple(tuple(p) for p in doc["out_factors"]),
        product_form=bool(doc.get("product_form", False)),
        trace_preserving=bool(doc.get("trace_preserving", False)),
        provenance=str(doc.get("provenance", "")),
    )
