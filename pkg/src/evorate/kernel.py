"""Transition kernels of birth-death processes on the population lattice.

One step of the process at state a: a birth type j is drawn from the
reproduction probabilities p(a/N), a death type k is drawn uniformly
from the population, and the state moves to a + e_j - e_k.  Off-diagonal
transitions therefore have probability

    T[a, a + e_j - e_k] = p_j(a/N) * a_k / N     (j != k, a_k >= 1),

and the self-loop takes the remaining mass (birth and death of the same
type).  Each row has at most n(n-1) + 1 nonzero entries, so kernels are
stored sparse (CSR) with rows indexed by canonical state rank.

Rows depend only on their own state, so a kernel can also be built on
any reachability-closed subset of the lattice; this is how processes
with mutation rate zero are analyzed, where parts of the lattice are
never visited and the full-lattice incentive may be undefined at the
corners.  The mutation matrix is applied per state, so a state-dependent
mutation model would only need a hook in _reproduction_batch.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .dynamics import GameMatrix, Incentive, MutationModel, incentive_values_batch
from .errors import (
    IllDefinedIncentiveError,
    NumericalConsistencyError,
    ValidationError,
)
from .simplex import _states_cached, num_states, rank_states, validate_state

_ROWSUM_TOL = 1e-12
_CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class TransitionKernel:
    """A row-stochastic transition matrix, optionally tied to lattice states.

    `states` holds the population state of each row; it is None for raw
    kernels injected from outside the lattice construction.
    """

    matrix: sparse.csr_array
    n: int | None = None
    N: int | None = None
    states: np.ndarray | None = None

    @property
    def num_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_lattice(self) -> bool:
        return self.states is not None

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and probabilities of row i."""
        M = self.matrix
        if not 0 <= i < M.shape[0]:
            raise ValidationError(f"row {i} out of range [0, {M.shape[0]})")
        return M.indices[M.indptr[i] : M.indptr[i + 1]], M.data[M.indptr[i] : M.indptr[i + 1]]


def _reproduction_batch(
    S: np.ndarray, N: int, incentive: Incentive, game: GameMatrix | None, Q: np.ndarray
) -> np.ndarray:
    """Birth-type probabilities p(a/N) for each state row of S."""
    X = S / N
    try:
        phi = incentive_values_batch(incentive, game, X)
    except IllDefinedIncentiveError as exc:
        row = getattr(exc, "row", None)
        if row is not None:
            raise IllDefinedIncentiveError(
                f"incentive is ill-defined at state {S[row].tolist()}: {exc}"
            ) from exc
        raise
    return (phi / phi.sum(axis=1, keepdims=True)) @ Q


def _assemble(
    S: np.ndarray,
    N: int,
    P: np.ndarray,
    rank_of: np.ndarray | None,
) -> sparse.csr_array:
    """CSR kernel over the states S given birth probabilities P.

    `rank_of` maps global state ranks to row indices of S (identity when
    S is the full lattice, passed as None).
    """
    M, n = S.shape
    rows, cols, vals = [], [], []
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            src = np.flatnonzero(S[:, k] >= 1)
            prob = P[src, j] * (S[src, k] / N)
            keep = prob > 0.0
            src, prob = src[keep], prob[keep]
            if not src.size:
                continue
            targets = S[src]
            targets[:, j] += 1
            targets[:, k] -= 1
            dst = rank_states(targets, n, N)
            if rank_of is not None:
                dst = rank_of[dst]
                if (dst < 0).any():
                    raise NumericalConsistencyError(
                        "transition leaves the reachable state set; closure is broken"
                    )
            rows.append(src)
            cols.append(dst)
            vals.append(prob)
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0, dtype=np.float64)

    offsum = np.bincount(rows, weights=vals, minlength=M)
    diag = 1.0 - offsum
    bad = np.flatnonzero(diag < -_ROWSUM_TOL)
    if bad.size:
        raise NumericalConsistencyError(
            f"row {bad[0]} has off-diagonal mass {offsum[bad[0]]!r} > 1"
        )
    clamped = np.flatnonzero(diag < 0.0)
    diag = np.maximum(diag, 0.0)

    keep = diag > 0.0
    drows = np.flatnonzero(keep)
    T = sparse.csr_array(
        (
            np.concatenate([vals, diag[keep]]),
            (np.concatenate([rows, drows]), np.concatenate([cols, drows])),
        ),
        shape=(M, M),
    )
    T.sum_duplicates()
    T.sort_indices()
    # Rows whose self-loop was clamped carry a hair more than unit mass.
    for r in clamped:
        sl = slice(T.indptr[r], T.indptr[r + 1])
        T.data[sl] /= T.data[sl].sum()
    return T


def build_kernel(
    n: int,
    N: int,
    incentive: Incentive,
    game: GameMatrix | None,
    mutation: MutationModel,
    reachable_from=None,
) -> TransitionKernel:
    """Build the transition kernel on the lattice (or a reachable subset).

    With `reachable_from` (a state or list of states) the kernel covers
    exactly the states reachable from those seeds, rows still ordered by
    canonical rank.  Requires N > n so interior states exist.
    """
    if N <= n:
        raise ValidationError(f"population must exceed the number of types, got n={n}, N={N}")
    if game is not None and game.n != n:
        raise ValidationError(f"game matrix is {game.n}x{game.n}, process has n={n} types")
    Q = mutation.matrix(n)
    if reachable_from is None:
        S = _states_cached(n, N)
        P = _reproduction_batch(S, N, incentive, game, Q)
        T = _assemble(S, N, P, None)
        return TransitionKernel(matrix=T, n=n, N=N, states=S)

    seeds = np.atleast_2d(np.asarray(reachable_from, dtype=np.int64))
    for seed in seeds:
        validate_state(seed, n=n, N=N)
    S = _reachable_states(seeds, n, N, incentive, game, Q)
    rank_of = np.full(num_states(n, N), -1, dtype=np.int64)
    rank_of[rank_states(S, n, N)] = np.arange(len(S))
    P = _reproduction_batch(S, N, incentive, game, Q)
    T = _assemble(S, N, P, rank_of)
    return TransitionKernel(matrix=T, n=n, N=N, states=S)


def _reachable_states(
    seeds: np.ndarray, n: int, N: int, incentive, game, Q: np.ndarray
) -> np.ndarray:
    """Closure of the seed states under positive-probability transitions."""
    seen = {tuple(int(x) for x in seed) for seed in seeds}
    frontier = np.unique(seeds, axis=0)
    while len(frontier):
        P = _reproduction_batch(frontier, N, incentive, game, Q)
        fresh = []
        for a, p in zip(frontier, P):
            for j in range(n):
                for k in range(n):
                    if j == k or a[k] < 1 or p[j] * (a[k] / N) <= 0.0:
                        continue
                    b = a.copy()
                    b[j] += 1
                    b[k] -= 1
                    key = tuple(int(x) for x in b)
                    if key not in seen:
                        seen.add(key)
                        fresh.append(b)
        frontier = np.array(fresh, dtype=np.int64) if fresh else np.empty((0, n), np.int64)
    S = np.array(sorted(seen), dtype=np.int64)
    # Canonical order is descending lexicographic.
    return S[::-1].copy()


def transition_row(
    counts, incentive: Incentive, game: GameMatrix | None, mutation: MutationModel
) -> list[tuple[np.ndarray, float]]:
    """Nonzero transitions out of one state as (target state, probability).

    Off-diagonal entries come first in (gain, lose) step order, then the
    self-loop if it carries mass.  Computed independently of the batch
    kernel construction, which tests use as a cross-check.
    """
    a = validate_state(counts)
    n = a.size
    N = int(a.sum())
    if game is not None and game.n != n:
        raise ValidationError(f"game matrix is {game.n}x{game.n}, state has n={n} types")
    Q = mutation.matrix(n)
    P = _reproduction_batch(a[None, :], N, incentive, game, Q)[0]
    out: list[tuple[np.ndarray, float]] = []
    total = 0.0
    for j in range(n):
        for k in range(n):
            if j == k or a[k] < 1:
                continue
            prob = P[j] * (a[k] / N)
            if prob > 0.0:
                b = a.copy()
                b[j] += 1
                b[k] -= 1
                out.append((b, float(prob)))
                total += prob
    if total > 1.0 + _ROWSUM_TOL:
        raise NumericalConsistencyError(f"off-diagonal mass {total!r} > 1 at state {a.tolist()}")
    self_loop = max(1.0 - total, 0.0)
    if self_loop > 0.0:
        out.append((a.copy(), self_loop))
    return out


def raw_kernel(matrix) -> TransitionKernel:
    """Wrap an explicit row-stochastic matrix as a kernel.

    Accepts dense or sparse input; rows must sum to 1 within 1e-12.
    """
    T = sparse.csr_array(matrix, dtype=np.float64)
    if T.shape[0] != T.shape[1]:
        raise ValidationError(f"kernel must be square, got shape {T.shape}")
    if T.nnz and ((T.data < 0).any() or (T.data > 1 + _ROWSUM_TOL).any()):
        raise ValidationError("kernel entries must be probabilities in [0, 1]")
    rowsums = np.asarray(T.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(rowsums - 1.0) > _ROWSUM_TOL)
    if bad.size:
        raise ValidationError(f"kernel row {bad[0]} sums to {rowsums[bad[0]]!r}, expected 1")
    T.eliminate_zeros()
    T.sort_indices()
    return TransitionKernel(matrix=T)


def is_irreducible(kernel: TransitionKernel) -> bool:
    """True when every state can reach every other state."""
    ncomp, _ = connected_components(kernel.matrix, directed=True, connection="strong")
    return ncomp == 1


def recurrent_classes(kernel: TransitionKernel) -> list[np.ndarray]:
    """Closed communicating classes, each as a sorted array of row indices.

    These are the sink components of the strongly-connected-component
    condensation; the chain eventually enters one and stays.
    """
    ncomp, labels = connected_components(kernel.matrix, directed=True, connection="strong")
    coo = kernel.matrix.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_comps = np.unique(labels[coo.row[leaving]])
    sinks = np.setdiff1d(np.arange(ncomp), open_comps)
    classes = [np.flatnonzero(labels == c) for c in sinks]
    classes.sort(key=lambda idx: int(idx[0]))
    return classes


def restrict_to_states(kernel: TransitionKernel, rows) -> TransitionKernel:
    """Sub-kernel on a closed subset of rows (e.g. one recurrent class)."""
    idx = np.unique(np.asarray(rows, dtype=np.int64))
    if idx.size == 0:
        raise ValidationError("cannot restrict to an empty state set")
    if idx[0] < 0 or idx[-1] >= kernel.num_states:
        raise ValidationError("row indices out of range")
    sub = kernel.matrix[idx][:, idx].tocsr()
    rowsums = np.asarray(sub.sum(axis=1)).ravel()
    bad = np.flatnonzero(np.abs(rowsums - 1.0) > _CLOSURE_TOL)
    if bad.size:
        raise ValidationError(
            f"state set is not closed: restricted row {bad[0]} keeps only "
            f"{rowsums[bad[0]]!r} of its probability mass"
        )
    # Tidy the float dust from the restriction.
    scale = sparse.dia_array((1.0 / rowsums[None, :], [0]), shape=(idx.size, idx.size))
    sub = (scale @ sub).tocsr()
    sub.sort_indices()
    states = kernel.states[idx] if kernel.states is not None else None
    return TransitionKernel(matrix=sub, n=kernel.n, N=kernel.N, states=states)


def dump_kernel(kernel: TransitionKernel, fh) -> None:
    """Write a kernel as ASCII triplets: header 'n N state_count', then
    one 'row col prob' line per stored entry."""
    if kernel.n is None or kernel.N is None:
        raise ValidationError("dump requires a lattice kernel")
    coo = kernel.matrix.tocoo()
    fh.write(f"{kernel.n} {kernel.N} {kernel.num_states}\n")
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        fh.write(f"{r} {c} {float(v)!r}\n")
