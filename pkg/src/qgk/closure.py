"""Span closure of the cyclic vector under the generator entries.

``V_0 = span{e_0 (x) ... (x) e_0}`` and ``V_{k+1} = V_k + span(xi V_k)``.  Every
entry operator is homogeneous for a lattice grading of the multi-indices (the
weight of the module), so the closure splits into weight blocks and the rank
bookkeeping is done block by block.

Two rank engines are available.  ``exact`` works in the rescaled basis
``f_p = prod_{m<=p} sqrt(1 - q^{2dm}) e_p``, where every coefficient is a
polynomial in ``q``; for rational ``q`` the rank is then computed exactly in
the prime field ``F_P`` with ``P = 2^31 - 1``.  Reduction mod ``P`` can only
lower a rank, and does so with probability of order ``rank / P``.  ``float``
is incremental Gram-Schmidt with an absolute threshold on unit-normalised
candidates; residuals within a factor 10 of the threshold are reported as
ambiguous.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .corep import Action, elementary_table
from .fock import DROP_TOL, OperatorSum, TruncationError, _radix

log = logging.getLogger(__name__)

__all__ = [
    "PRIME",
    "METHODS",
    "vertex_weights",
    "weight_grading",
    "generator_entries",
    "ClosureResult",
    "span_closure",
    "rational_residue",
]

PRIME = 2**31 - 1
METHODS = ("exact", "float")


def vertex_weights(action: Action) -> dict[int, np.ndarray]:
    """Weight of each vertex: ``e_v`` for A; ``e_v`` and ``-e_{2n+1-v}`` for C and D."""
    n, N = action.spec.n, action.N
    if N == n + 1:
        return {v: np.eye(N, dtype=np.int64)[v - 1] for v in range(1, N + 1)}
    eye = np.eye(n, dtype=np.int64)
    return {v: eye[v - 1] if v <= n else -eye[2 * n - v] for v in range(1, N + 1)}


def weight_grading(action: Action) -> np.ndarray | None:
    """Integer matrix ``C`` (nfactors x rank) with every entry operator homogeneous for ``idx @ C``.

    Vertex weights are carried through the diagram column by column; a shift
    leg at a vertex fixes the column's grade vector and every other shift leg of
    that column must agree with it.  Returns ``None`` when no such grading exists.
    """
    L = action.nfactors
    if L == 0:
        return np.zeros((0, 1), np.int64)
    if len(action.word) != L:
        return None
    h = vertex_weights(action)
    C = np.zeros((L, h[1].shape[0]), np.int64)
    for j, i in enumerate(action.word):
        tab = elementary_table(action.spec.family, action.spec.n, i)
        nxt: dict[int, np.ndarray] = {}
        for (a, b), op in tab.items():
            if op.shift == 0:
                if b in nxt and not np.array_equal(nxt[b], h[a]):
                    return None
                nxt[b] = h[a]
        grade = None
        for (a, b), op in tab.items():
            if op.shift:
                if a != b or b not in nxt:
                    return None
                g = op.shift * (h[a] - nxt[b])
                if grade is not None and not np.array_equal(grade, g):
                    return None
                grade = g
        if len(nxt) != action.N:
            return None
        C[j] = grade if grade is not None else 0
        h = nxt
    return C


def generator_entries(action: Action, rows: Sequence[int] | None = None) -> list[tuple[int, int]]:
    """Nonzero entries ``(k, l)``, restricted to the given rows ``k`` if any."""
    keep = set(rows) if rows is not None else None
    return [kl for kl in action.entries()
            if not action.matrix[kl].is_zero and (keep is None or kl[0] in keep)]


def rational_residue(q: float, prime: int = PRIME) -> int:
    """Residue of the shortest decimal representation of ``q`` mod ``prime``."""
    fr = Fraction(repr(float(q)))
    if fr.denominator % prime == 0:
        raise ValueError(f"q={q} is not invertible mod {prime}")
    return fr.numerator * pow(fr.denominator, prime - 2, prime) % prime


@dataclass
class ClosureResult:
    dims: list[int]
    method: str = "exact"
    ambiguous: int = 0
    min_margin: float = float("inf")
    blocks: int = 0
    support: list[int] = field(default_factory=list)


# --- blocks and engines ------------------------------------------------------

class _Block:
    """Column bookkeeping shared by both engines: basis keys in first-seen order."""

    def __init__(self):
        self.colkeys = np.zeros(0, np.int64)
        self._sorted = np.zeros(0, np.int64)
        self._cols = np.zeros(0, np.int64)

    def embed(self, cand: np.ndarray, keys: np.ndarray, coef: np.ndarray, ncand: int, dtype) -> np.ndarray:
        """Dense ``ncand x dim`` matrix of the candidates (term arrays grouped by ``cand``)."""
        uk = np.unique(keys)
        new = uk[~np.isin(uk, self.colkeys, assume_unique=True)]
        if len(new):
            first = np.sort(np.unique(keys, return_index=True)[1][np.isin(uk, new)])
            self.colkeys = np.concatenate([self.colkeys, keys[first]])
            self._cols = np.argsort(self.colkeys, kind="stable")
            self._sorted = self.colkeys[self._cols]
        col = self._cols[np.searchsorted(self._sorted, keys)]
        M = np.zeros((ncand, len(self.colkeys)), dtype)
        M[cand, col] = coef
        return M


class _FloatBlock(_Block):
    def __init__(self):
        super().__init__()
        self.Q = np.zeros((0, 0), complex)

    def extend(self, cand, keys, coef, ncand, tol: float):
        """Accepted candidate indices, ambiguous count and smallest log10 margin."""
        M = self.embed(cand, keys, coef, ncand, complex).T
        dim = M.shape[0]
        if self.Q.shape[0] < dim:
            self.Q = np.vstack([self.Q, np.zeros((dim - self.Q.shape[0], self.Q.shape[1]), complex)])
        M /= np.linalg.norm(M, axis=0)[None, :]
        Q = self.Q
        R = M.copy()
        for _ in range(2):
            if Q.shape[1]:
                R -= Q @ (Q.conj().T @ R)
        live = np.flatnonzero(np.linalg.norm(R, axis=0) > tol / 10)
        accepted: list[int] = []
        amb = 0
        margin = float("inf")
        if len(live):
            _, Rr, piv = scipy.linalg.qr(R[:, live], mode="economic", pivoting=True)
            diag = np.abs(np.diag(Rr))
            for pos, val in enumerate(diag):
                ratio = val / tol
                if 0.1 < ratio < 10:
                    amb += 1
                margin = min(margin, abs(np.log10(max(ratio, 1e-300))))
                if val > tol:
                    accepted.append(int(live[piv[pos]]))
        if accepted:
            accepted.sort()
            Qn = R[:, accepted]
            for _ in range(2):
                if Q.shape[1]:
                    Qn -= Q @ (Q.conj().T @ Qn)
                Qn, _ = np.linalg.qr(Qn)
            self.Q = np.hstack([Q, Qn])
        return accepted, amb, margin


class _FloatEngine:
    name = "float"
    dtype = complex

    def __init__(self, q: float, tol: float):
        self.q, self.tol = q, tol

    def tables(self, op: OperatorSum, cutoff: int, radix: np.ndarray):
        p = np.arange(cutoff + 1)
        out = []
        for path in op.paths:
            factors = [(j, leg.coefficients(self.q, p)) for j, leg in enumerate(path.legs)
                       if leg.kind != "id"]
            out.append((complex(path.scalar), factors, int(path.shifts @ radix)))
        return out

    def mul(self, a, b):
        return a * b

    def reduce(self, coef, starts):
        sums = np.add.reduceat(coef, starts)
        big = np.maximum.reduceat(np.abs(coef), starts)
        return sums, np.abs(sums) > DROP_TOL * big

    def block(self):
        return _FloatBlock()

    def extend(self, blk, cand, keys, coef, ncand):
        return blk.extend(cand, keys, coef, ncand, self.tol)


def _mulmod(A: np.ndarray, B: np.ndarray, P: int = PRIME) -> np.ndarray:
    """``A @ B mod P`` for residues below ``2^31`` without int64 overflow."""
    if A.shape[1] >= 1 << 15:
        raise OverflowError("inner dimension too large for the split product")
    lo = B & 0xFFFF
    hi = B >> 16
    return ((A @ hi) % P * 65536 + (A @ lo)) % P


class _ModBlock(_Block):
    def __init__(self):
        super().__init__()
        self.B = np.zeros((0, 0), np.int64)   # reduced row echelon basis
        self.piv: list[int] = []

    def extend(self, cand, keys, coef, ncand):
        P = PRIME
        M = self.embed(cand, keys, coef, ncand, np.int64)
        dim = M.shape[1]
        B = self.B
        if B.shape[1] < dim:
            B = np.hstack([B, np.zeros((B.shape[0], dim - B.shape[1]), np.int64)])
        if self.piv:
            M = (M - _mulmod(M[:, self.piv], B)) % P
        accepted: list[int] = []
        new_rows: list[np.ndarray] = []
        for i in np.flatnonzero(M.any(axis=1)).tolist():
            row = M[i]
            nz = np.flatnonzero(row)
            if not len(nz):
                continue
            col = int(nz[0])
            row = row * pow(int(row[col]), P - 2, P) % P
            rest = M[i + 1:]
            f = rest[:, col]
            hit = np.flatnonzero(f)
            if len(hit):
                rest[hit] = (rest[hit] - f[hit, None] * row[None, :]) % P
            if len(B):
                f = B[:, col]
                hit = np.flatnonzero(f)
                if len(hit):
                    B[hit] = (B[hit] - f[hit, None] * row[None, :]) % P
            for r in new_rows:
                if r[col]:
                    r[:] = (r - r[col] * row) % P
            new_rows.append(row)
            self.piv.append(col)
            accepted.append(i)
        self.B = np.vstack([B] + [r[None, :] for r in new_rows]) if new_rows else B
        return accepted, 0, float("inf")


class _ModEngine:
    name = "exact"
    dtype = np.int64

    def __init__(self, q: float):
        self.q = rational_residue(q)

    def tables(self, op: OperatorSum, cutoff: int, radix: np.ndarray):
        p = np.arange(cutoff + 1)
        out = []
        if not op.paths:
            return out
        s0 = complex(op.paths[0].scalar)
        for path in op.paths:
            if abs(complex(path.scalar) / s0 - 1) > 1e-12:
                raise ValueError("entry paths carry different scalars; use the float engine")
            factors = [(j, leg.modular_coefficients(self.q, p, PRIME)) for j, leg in enumerate(path.legs)
                       if leg.kind not in ("id", "raise")]
            out.append((1, factors, int(path.shifts @ radix)))
        return out

    def mul(self, a, b):
        return a * b % PRIME

    def reduce(self, coef, starts):
        sums = np.add.reduceat(coef, starts) % PRIME
        return sums, sums != 0

    def block(self):
        return _ModBlock()

    def extend(self, blk, cand, keys, coef, ncand):
        return blk.extend(cand, keys, coef, ncand)


def _check_shift_bases(action: Action) -> None:
    """The rescaled basis needs one shift base per tensor factor."""
    base: dict[int, int] = {}
    for op in action.matrix.values():
        for path in op.paths:
            for j, leg in enumerate(path.legs):
                if leg.shift:
                    if base.setdefault(j, leg.d) != leg.d:
                        raise ValueError(f"factor {j} mixes shift bases; use the float engine")


# --- closure -----------------------------------------------------------------

def span_closure(
    action: Action,
    k_max: int,
    tol: float = 1e-8,
    rows: Sequence[int] | None = None,
    cutoff: int | None = None,
    method: str = "exact",
) -> ClosureResult:
    """Dimensions ``d_0..d_{k_max}`` of the span closure of the cyclic vector.

    ``rows`` restricts the generators to entries ``(k, l)`` with ``k`` in ``rows``.
    ``tol`` only matters for ``method="float"``.  Candidates are processed in a
    fixed order (generator entry, then frontier vector), so results are
    deterministic.
    """
    if method not in METHODS:
        raise ValueError(f"unknown rank method {method!r}")
    L = action.nfactors
    cutoff = action.spec.cutoff if cutoff is None else cutoff
    if cutoff < k_max + 2:
        raise TruncationError(f"cutoff {cutoff} too small for k_max={k_max}")
    if L == 0:
        return ClosureResult([1] * (k_max + 1), method=method, blocks=1, support=[1] * (k_max + 1))
    if method == "exact":
        _check_shift_bases(action)
        eng = _ModEngine(action.spec.q)
    else:
        eng = _FloatEngine(action.spec.q, tol)
    radix = _radix(L, cutoff)
    C = weight_grading(action)
    if C is None:
        C = np.zeros((L, 1), np.int64)
    gens = generator_entries(action, rows)
    tables = [eng.tables(action.matrix[kl], cutoff, radix) for kl in gens]

    blocks: dict[bytes, object] = {}
    zero = np.zeros(1, np.int64)
    one = np.ones(1, eng.dtype)
    blk = blocks.setdefault(np.zeros(C.shape[1], np.int64).tobytes(), eng.block())
    eng.extend(blk, zero, zero, one, 1)
    result = ClosureResult([1], method=eng.name, support=[1])
    seen = zero
    # frontier as term arrays: owner vector id, key, coefficient
    f_own, f_key, f_coef = zero, zero, one
    nfront = 1
    total = 1
    for step in range(1, k_max + 1):
        fidx = (f_key[:, None] // radix[None, :]) % cutoff
        if len(fidx) and fidx.max() >= cutoff - 1:
            raise TruncationError(f"closure reached the cutoff {cutoff}")
        cand, keys, coef = _images(eng, tables, fidx, f_own, f_key, f_coef, nfront)
        nxt_own, nxt_key, nxt_coef = [], [], []
        nfront = 0
        if len(keys):
            starts = np.flatnonzero(np.r_[True, cand[1:] != cand[:-1]])
            counts = np.diff(np.r_[starts, len(cand)])
            grades = ((keys[:, None] // radix[None, :]) % cutoff) @ C
            owner_of_term = np.repeat(np.arange(len(starts)), counts)
            if not (grades == grades[starts][owner_of_term]).all():
                raise RuntimeError("entry operator is not homogeneous for the weight grading")
            gkeys, gblock = np.unique(grades[starts], axis=0, return_inverse=True)
            gblock = gblock.ravel()
            term_block = gblock[owner_of_term]
            order = np.argsort(term_block, kind="stable")
            bounds = np.searchsorted(term_block[order], np.arange(len(gkeys) + 1))
            for b in range(len(gkeys)):
                sel = order[bounds[b]:bounds[b + 1]]
                tc = owner_of_term[sel]
                local_ids, local = np.unique(tc, return_inverse=True)
                blk = blocks.setdefault(gkeys[b].tobytes(), eng.block())
                accepted, amb, margin = eng.extend(blk, local.ravel(), keys[sel], coef[sel], len(local_ids))
                result.ambiguous += amb
                result.min_margin = min(result.min_margin, margin)
                total += len(accepted)
                if accepted:
                    pick = np.isin(local.ravel(), accepted)
                    remap = np.full(len(local_ids), -1, np.int64)
                    remap[accepted] = nfront + np.arange(len(accepted))
                    nfront += len(accepted)
                    nxt_own.append(remap[local.ravel()[pick]])
                    nxt_key.append(keys[sel][pick])
                    nxt_coef.append(coef[sel][pick])
            seen = np.union1d(seen, keys)
        if nxt_own:
            f_own = np.concatenate(nxt_own)
            f_key = np.concatenate(nxt_key)
            f_coef = np.concatenate(nxt_coef)
        else:
            f_own, f_key, f_coef = zero[:0], zero[:0], one[:0]
        result.dims.append(total)
        result.support.append(len(seen))
        log.debug("step %d: dim %d, %d blocks", step, total, len(blocks))
    result.blocks = len(blocks)
    return result


def _images(eng, tables, fidx, f_own, f_key, f_coef, nfront):
    """All images ``xi v`` as merged term arrays sorted by candidate id, then key.

    Candidate ``g * nfront + v`` is generator entry ``g`` applied to frontier vector ``v``.
    """
    all_c, all_k, all_v = [], [], []
    for g, tab in enumerate(tables):
        for scalar, factors, dkey in tab:
            c = f_coef * scalar
            for j, table in factors:
                c = eng.mul(c, table[fidx[:, j]])
            nz = c != 0
            all_c.append(g * nfront + f_own[nz])
            all_k.append(f_key[nz] + dkey)
            all_v.append(c[nz])
    if not all_c:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, eng.dtype)
    cand = np.concatenate(all_c)
    keys = np.concatenate(all_k)
    coef = np.concatenate(all_v)
    if not len(cand):
        return cand, keys, coef
    order = np.lexsort((keys, cand))
    cand, keys, coef = cand[order], keys[order], coef[order]
    starts = np.flatnonzero(np.r_[True, (cand[1:] != cand[:-1]) | (keys[1:] != keys[:-1])])
    sums, keep = eng.reduce(coef, starts)
    return cand[starts][keep], keys[starts][keep], sums[keep]
