"""Node-level route to nonbacktracking walk counts and Katz centrality.

Works directly with the n x n adjacency matrix: a growing recurrence for the
walk-count matrices, assembly of the sparse system matrix whose inverse is
the walk generating function, and the centrality obtained from one linear
solve against the all-ones vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceWarning, NumericalError, ValidationError
from .linalg import (
    DENSE_SOLVE_MAX,
    as_csr,
    diag_matrix,
    elementwise_map,
    hadamard,
    identity,
    solve_linear,
)

__all__ = ["NodeSystem", "nbt_walk_counts", "build_node_system", "generating_matrix", "nbt_katz"]


def _validate_adjacency(matrix) -> sp.csr_array:
    a = as_csr(matrix)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"adjacency must be square, got {a.shape}")
    if a.nnz and np.any(a.data < 0):
        raise ValidationError("adjacency entries must be nonnegative")
    if a.diagonal().any():
        raise ValidationError("adjacency must have a zero diagonal (loop-free graph)")
    return a


def nbt_walk_counts(adjacency, kmax: int) -> list[sp.csr_array]:
    """Weighted nonbacktracking walk-count matrices for lengths 0..kmax.

    Entry (i, j) of the k-th matrix is the sum over all nonbacktracking walks
    of length k from i to j of the product of their edge weights.  Length 0
    is the identity, length 1 the adjacency; longer lengths follow a growing
    recurrence whose step-back coefficients are built incrementally, one
    Hadamard product per new depth.
    """
    a = _validate_adjacency(adjacency)
    if kmax < 0:
        raise ValidationError(f"kmax must be nonnegative, got {kmax}")
    n = a.shape[0]
    counts = [identity(n)]
    if kmax == 0:
        return counts
    counts.append(a)

    mutual = hadamard(a, a.T)  # products w_ij * w_ji on reciprocated pairs
    odd_coeffs = [a]           # step back over 2h+1 edges: A o mutual^oh
    even_diags: list[np.ndarray] = []  # step back over 2h edges: row sums of mutual^oh
    mutual_pow = None

    for k in range(2, kmax + 1):
        if k % 2 == 0:
            mutual_pow = mutual if mutual_pow is None else hadamard(mutual_pow, mutual)
            even_diags.append(np.asarray(mutual_pow.sum(axis=1)).ravel())
        else:
            odd_coeffs.append(hadamard(a, mutual_pow))

        acc = sp.csr_array((n, n), dtype=np.float64)
        for h, coeff in enumerate(odd_coeffs):
            step = 2 * h + 1
            if step > k:
                break
            acc = acc + coeff @ counts[k - step]
        for h, dvec in enumerate(even_diags, start=1):
            step = 2 * h
            if step > k:
                break
            acc = acc - diag_matrix(dvec) @ counts[k - step]
        acc = sp.csr_array(acc)
        acc.eliminate_zeros()
        acc.sort_indices()
        counts.append(acc)
    return counts


@dataclass
class NodeSystem:
    """Assembled node-level system whose inverse generates the walk counts.

    ``mutual`` is the symmetric matrix of reciprocated weight products
    (w_ij * w_ji), ``mutual_sqrt`` its entrywise square root, and ``matrix``
    the sparse system matrix: identity plus a diagonal correction from
    back-and-forth round trips, minus the attenuated adjacency rescaled by
    the geometric round-trip factor 1 / (1 - t^2 * mutual).
    """

    adjacency: sp.csr_array
    mutual: sp.csr_array
    mutual_sqrt: sp.csr_array
    t: float
    matrix: sp.csr_array


def build_node_system(adjacency, t: float) -> NodeSystem:
    """Assemble the node-level system matrix at attenuation ``t``.

    Requires ``t >= 0`` and ``t^2 * max(mutual) < 1``; beyond that the
    diagonal correction series diverges and the offending edge is reported.
    """
    a = _validate_adjacency(adjacency)
    if not (t >= 0 and np.isfinite(t)):
        raise ValidationError(f"attenuation factor must be a finite nonnegative real, got {t}")
    n = a.shape[0]
    mutual = hadamard(a, a.T)
    mutual_sqrt = elementwise_map(mutual, np.sqrt)

    if mutual.nnz:
        peak = int(np.argmax(mutual.data))
        coo = mutual.tocoo()
        if t * t * coo.data[peak] >= 1.0:
            raise ValidationError(
                f"t = {t} is at or beyond the elementwise pole: "
                f"t^2 * {coo.data[peak]} >= 1 for the reciprocated pair "
                f"({coo.row[peak]}, {coo.col[peak]})"
            )

    scaled = mutual_sqrt * t
    f_minus = elementwise_map(scaled, lambda x: x / (1.0 - x))
    f_plus = elementwise_map(scaled, lambda x: x / (1.0 + x))
    # mutual_sqrt is symmetric, so the diagonal of (f_minus @ f_plus)
    # collapses to row sums of the Hadamard product.
    round_trip = hadamard(f_minus, f_plus)
    diag_correction = np.asarray(round_trip.sum(axis=1)).ravel()

    # Off-diagonal part: t * A divided entrywise by (1 - t^2 * mutual) on A's
    # pattern.  Split as t*A + t*(A o g(mutual)) with g(x) = t^2 x / (1 - t^2 x),
    # which vanishes at 0 and so never leaves the reciprocated pattern.
    geometric = elementwise_map(mutual, lambda x: (t * t * x) / (1.0 - t * t * x))
    off = sp.csr_array(t * a + t * hadamard(a, geometric))

    matrix = sp.csr_array(identity(n) + diag_matrix(diag_correction) - off)
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return NodeSystem(adjacency=a, mutual=mutual, mutual_sqrt=mutual_sqrt, t=float(t), matrix=matrix)


def _check_radius(t: float, rho_v, what: str) -> None:
    if rho_v is None:
        warnings.warn(
            f"{what}: convergence radius not certified; only the elementwise "
            "pole condition was checked (supply rho_v from the line-graph "
            "route for a guarantee)",
            ConvergenceWarning,
            stacklevel=3,
        )
        return
    if rho_v > 0 and t >= 1.0 / rho_v:
        raise ValidationError(
            f"t = {t} is outside the permitted range [0, {1.0 / rho_v}) "
            "for the nonbacktracking series"
        )


def generating_matrix(adjacency, t: float, *, rho_v: float | None = None) -> np.ndarray:
    """Dense walk generating function: the inverse of the node-level system.

    Equals the attenuated sum over all lengths of the nonbacktracking
    walk-count matrices, for ``t`` inside the convergence radius.
    """
    system = build_node_system(adjacency, t)
    n = system.matrix.shape[0]
    if n > DENSE_SOLVE_MAX:
        raise ValidationError(
            f"dense generating matrix limited to order {DENSE_SOLVE_MAX}, got {n}"
        )
    _check_radius(t, rho_v, "generating_matrix")
    dense = system.matrix.toarray()
    try:
        phi = np.linalg.inv(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"system matrix is singular: {exc}") from exc
    residual = float(np.max(np.abs(dense @ phi - np.eye(n)))) if n else 0.0
    if residual > 1e-6:
        raise NumericalError(
            f"system matrix is too ill-conditioned (inverse residual {residual:.3e})"
        )
    return phi


def nbt_katz(adjacency, t: float, *, tol: float = 1e-10, rho_v: float | None = None) -> np.ndarray:
    """Nonbacktracking Katz centrality: solve the node-level system against
    the all-ones vector.

    When ``rho_v`` (the spectral radius of the edge-level matrix ``V``) is
    supplied, ``t`` is validated against the exact permitted range;
    otherwise only the elementwise pole condition is enforced and a
    :class:`ConvergenceWarning` is attached.
    """
    system = build_node_system(adjacency, t)
    _check_radius(t, rho_v, "nbt_katz")
    return solve_linear(system.matrix, np.ones(system.matrix.shape[0]), tol)
