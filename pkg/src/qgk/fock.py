"""Sparse vectors on truncated tensor powers of c00(N) and weighted-shift operators.

A basis vector ``e_{a_1} (x) ... (x) e_{a_L}`` is a multi-index ``(a_1, ..., a_L)``
with every coordinate below a common ``cutoff``.  Vectors are kept as a sorted
array of mixed-radix keys plus a complex coefficient array, so that applying a
tensor product of diagonal and shift operators is a handful of numpy calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "DROP_TOL",
    "TruncationError",
    "ShapeError",
    "ElementaryOp",
    "IDENTITY",
    "RAISE",
    "LOWER",
    "RAISE2",
    "LOWER2",
    "DIAG_QN",
    "DIAG_NEG_QN1",
    "DIAG_NEG_QN",
    "DIAG_QN1",
    "DIAG_NEG_Q2N2",
    "DIAG_Q2N",
    "scalar_op",
    "apply_elementary",
    "PathOperator",
    "OperatorSum",
    "SparseVector",
    "apply_path",
    "apply_sum",
    "adjoint_path",
    "adjoint_sum",
    "dense_matrix",
    "sparse_columns",
]

# merged coefficients this small relative to their largest contribution are
# treated as cancellation noise
DROP_TOL = 1e-14


class TruncationError(RuntimeError):
    """An operator pushed a coordinate onto the truncation boundary."""


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ElementaryOp:
    """One arrow of the diagram calculus, acting on a single c00(N) factor.

    ``kind`` is one of ``id``, ``scalar``, ``raise``, ``lower``, ``diag``.
    Shifts carry the base exponent ``d`` (the arrow uses ``q**d``); a diagonal
    arrow multiplies ``e_p`` by ``sign * q**(mult*p + offset)``.
    """

    kind: str
    d: int = 1
    sign: int = 1
    mult: int = 0
    offset: int = 0
    value: complex = 1.0
    label: str = ""

    @property
    def shift(self) -> int:
        return {"raise": 1, "lower": -1}.get(self.kind, 0)

    def coefficients(self, q: float, p: np.ndarray) -> np.ndarray:
        """Coefficient of the image of ``e_p`` for every entry of ``p``."""
        p = np.asarray(p)
        if self.kind == "id":
            return np.ones(p.shape)
        if self.kind == "scalar":
            return np.full(p.shape, complex(self.value))
        qd = q ** self.d
        if self.kind == "raise":
            return np.sqrt(1.0 - qd ** (2 * p + 2))
        if self.kind == "lower":
            return np.sqrt(1.0 - qd ** (2 * p))
        return self.sign * q ** (self.mult * p + self.offset)

    def modular_coefficients(self, q: int, p: np.ndarray, prime: int) -> np.ndarray:
        """Coefficients in the rescaled basis ``f_p = prod_{m<=p} sqrt(1-q^{2dm}) e_p``, mod ``prime``.

        ``q`` is the residue of a rational deformation parameter.  In this basis
        the raising arrow is the bare shift and the lowering arrow picks up
        ``1 - q^{2dp}``, so every coefficient is a polynomial in ``q``.
        """
        p = np.asarray(p, np.int64)
        if self.kind in ("id", "raise"):
            return np.ones(p.shape, np.int64)
        if self.kind == "scalar":
            raise ValueError("scalar arrows have no modular form")
        if self.kind == "lower":
            return np.array([(1 - pow(q, 2 * self.d * int(x), prime)) % prime for x in p.ravel()],
                            np.int64).reshape(p.shape)
        return np.array([self.sign * pow(q, self.mult * int(x) + self.offset, prime) % prime
                         for x in p.ravel()], np.int64).reshape(p.shape)

    def adjoint(self) -> "ElementaryOp":
        if self.kind == "raise":
            return LOWER2 if self.d == 2 else LOWER
        if self.kind == "lower":
            return RAISE2 if self.d == 2 else RAISE
        if self.kind == "scalar":
            return scalar_op(np.conj(self.value))
        return self

    def __str__(self) -> str:
        return self.label or self.kind


IDENTITY = ElementaryOp("id", label="I")
RAISE = ElementaryOp("raise", label="S*sqrt(1-q^{2N+2})")
LOWER = ElementaryOp("lower", label="sqrt(1-q^{2N+2})S")
RAISE2 = ElementaryOp("raise", d=2, label="S*sqrt(1-q^{4N+4})")
LOWER2 = ElementaryOp("lower", d=2, label="sqrt(1-q^{4N+4})S")
DIAG_QN = ElementaryOp("diag", sign=1, mult=1, offset=0, label="q^N")
DIAG_NEG_QN1 = ElementaryOp("diag", sign=-1, mult=1, offset=1, label="-q^{N+1}")
DIAG_NEG_QN = ElementaryOp("diag", sign=-1, mult=1, offset=0, label="-q^N")
DIAG_QN1 = ElementaryOp("diag", sign=1, mult=1, offset=1, label="q^{N+1}")
DIAG_NEG_Q2N2 = ElementaryOp("diag", sign=-1, mult=2, offset=2, label="-q^{2N+2}")
DIAG_Q2N = ElementaryOp("diag", sign=1, mult=2, offset=0, label="q^{2N}")


def scalar_op(t: complex) -> ElementaryOp:
    """Multiplication by a unit-modulus scalar (the torus arrow ``M_t``)."""
    return ElementaryOp("scalar", value=complex(t), label=f"M_{complex(t):.6g}")


def apply_elementary(op: ElementaryOp, q: float, p: int) -> tuple[int, complex] | None:
    """Image of ``e_p`` as ``(index, coefficient)``, or ``None`` when it vanishes."""
    if p < 0:
        raise ValueError("basis index must be nonnegative")
    c = complex(op.coefficients(q, np.array([p]))[0])
    if c == 0:
        return None
    return p + op.shift, c


@dataclass(frozen=True)
class PathOperator:
    """``scalar * (legs[0] (x) legs[1] (x) ...)``."""

    scalar: complex
    legs: tuple[ElementaryOp, ...]

    @property
    def nfactors(self) -> int:
        return len(self.legs)

    @property
    def shifts(self) -> np.ndarray:
        return np.array([op.shift for op in self.legs], dtype=np.int64)

    def __str__(self) -> str:
        legs = " (x) ".join(str(op) for op in self.legs) or "1"
        return f"({self.scalar:.6g}) * {legs}"


@dataclass(frozen=True)
class OperatorSum:
    """A finite sum of paths on ``nfactors`` tensor factors; no paths is the zero map."""

    nfactors: int
    paths: tuple[PathOperator, ...] = ()

    def __post_init__(self):
        for p in self.paths:
            if p.nfactors != self.nfactors:
                raise ShapeError(f"path with {p.nfactors} legs in a {self.nfactors}-factor sum")

    @property
    def is_zero(self) -> bool:
        return not self.paths

    def __str__(self) -> str:
        if not self.paths:
            return "zero (no path)"
        return "\n".join(str(p) for p in self.paths)


# --- sparse vectors ----------------------------------------------------------

def _radix(nfactors: int, cutoff: int) -> np.ndarray:
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    if nfactors and nfactors * np.log2(cutoff) > 62:
        raise ValueError(f"cutoff {cutoff}^{nfactors} does not fit in 64-bit keys")
    return cutoff ** np.arange(nfactors - 1, -1, -1, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Finitely supported vector; ``keys`` are sorted mixed-radix codes of multi-indices."""

    nfactors: int
    cutoff: int
    keys: np.ndarray
    coef: np.ndarray
    truncated: bool = field(default=False, compare=False)

    @classmethod
    def zero(cls, nfactors: int, cutoff: int) -> "SparseVector":
        _radix(nfactors, cutoff)
        return cls(nfactors, cutoff, np.zeros(0, np.int64), np.zeros(0, complex))

    @classmethod
    def basis(cls, index: Sequence[int], cutoff: int, coef: complex = 1.0) -> "SparseVector":
        return cls.from_terms({tuple(index): coef}, len(index), cutoff)

    @classmethod
    def vacuum(cls, nfactors: int, cutoff: int) -> "SparseVector":
        return cls.basis((0,) * nfactors, cutoff)

    @classmethod
    def from_terms(
        cls, terms: Mapping[Sequence[int], complex], nfactors: int, cutoff: int
    ) -> "SparseVector":
        radix = _radix(nfactors, cutoff)
        idx = np.array([tuple(k) for k in terms], dtype=np.int64).reshape(len(terms), nfactors)
        if idx.size and (idx.min() < 0 or idx.max() >= cutoff):
            raise ValueError(f"multi-index outside 0..{cutoff - 1}")
        coef = np.array([complex(c) for c in terms.values()], dtype=complex)
        return cls.from_arrays(idx @ radix if nfactors else np.zeros(len(terms), np.int64),
                               coef, nfactors, cutoff)

    @classmethod
    def from_arrays(cls, keys, coef, nfactors: int, cutoff: int, truncated=False) -> "SparseVector":
        keys, coef = _merge(np.asarray(keys, np.int64), np.asarray(coef, complex))
        return cls(nfactors, cutoff, keys, coef, truncated)

    def indices(self) -> np.ndarray:
        """Multi-indices as an ``(nterms, nfactors)`` array."""
        radix = _radix(self.nfactors, self.cutoff)
        if not self.nfactors:
            return np.zeros((len(self.keys), 0), np.int64)
        return (self.keys[:, None] // radix[None, :]) % self.cutoff

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(x) for x in row): complex(c) for row, c in zip(self.indices(), self.coef)}

    def __len__(self) -> int:
        return len(self.keys)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coef))

    def _check(self, other: "SparseVector"):
        if (self.nfactors, self.cutoff) != (other.nfactors, other.cutoff):
            raise ShapeError("vectors live on different truncated spaces")

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        return SparseVector.from_arrays(
            np.concatenate([self.keys, other.keys]), np.concatenate([self.coef, other.coef]),
            self.nfactors, self.cutoff, self.truncated or other.truncated)

    def __mul__(self, lam: complex) -> "SparseVector":
        return SparseVector.from_arrays(self.keys, self.coef * lam, self.nfactors, self.cutoff,
                                        self.truncated)

    __rmul__ = __mul__

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-1.0) * other

    def inner(self, other: "SparseVector") -> complex:
        """``<self, other>``, conjugate-linear in ``self``."""
        self._check(other)
        common, ia, ib = np.intersect1d(self.keys, other.keys, assume_unique=True,
                                        return_indices=True)
        return complex(np.vdot(self.coef[ia], other.coef[ib]))

    def allclose(self, other: "SparseVector", atol: float = 1e-12) -> bool:
        diff = self - other
        return bool(np.all(np.abs(diff.coef) <= atol))

    def support(self) -> set[tuple[int, ...]]:
        return set(self.terms)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.cutoff ** self.nfactors, complex)
        out[self.keys] = self.coef
        return out


def _merge(keys: np.ndarray, coef: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum duplicate keys (sorted output) and drop zeros and cancellation residue."""
    if not len(keys):
        return keys, coef
    order = np.argsort(keys, kind="stable")
    keys, coef = keys[order], coef[order]
    uniq, start = np.unique(keys, return_index=True)
    summed = np.add.reduceat(coef, start)
    scale = np.maximum.reduceat(np.abs(coef), start)
    keep = (summed != 0) & (np.abs(summed) > DROP_TOL * scale)
    return uniq[keep], summed[keep]


def _path_image(path: PathOperator, q: float, idx: np.ndarray, coef: np.ndarray):
    """Apply a path to the terms ``(idx, coef)``; returns raw (unmerged) terms."""
    out = coef * path.scalar
    for j, op in enumerate(path.legs):
        if op.kind != "id":
            out = out * op.coefficients(q, idx[:, j])
    new_idx = idx + path.shifts[None, :] if path.legs else idx
    keep = out != 0
    return new_idx[keep], out[keep], keep


def _apply_paths(paths: Iterable[PathOperator], q: float, v: SparseVector, strict: bool):
    idx = v.indices()
    radix = _radix(v.nfactors, v.cutoff)
    all_keys, all_coef = [], []
    truncated = v.truncated
    for path in paths:
        if path.nfactors != v.nfactors:
            raise ShapeError(f"{path.nfactors}-leg path applied to a {v.nfactors}-factor vector")
        nidx, ncoef, _ = _path_image(path, q, idx, v.coef)
        over = (nidx >= v.cutoff).any(axis=1) if v.nfactors else np.zeros(len(nidx), bool)
        if over.any():
            if strict:
                raise TruncationError(
                    f"coordinate reached the cutoff {v.cutoff}; raise the cutoff")
            truncated = True
            nidx, ncoef = nidx[~over], ncoef[~over]
        all_keys.append(nidx @ radix if v.nfactors else np.zeros(len(nidx), np.int64))
        all_coef.append(ncoef)
    if not all_keys:
        return SparseVector(v.nfactors, v.cutoff, np.zeros(0, np.int64), np.zeros(0, complex),
                            truncated)
    return SparseVector.from_arrays(np.concatenate(all_keys), np.concatenate(all_coef),
                                    v.nfactors, v.cutoff, truncated)


def apply_path(path: PathOperator, q: float, v: SparseVector, strict: bool = True) -> SparseVector:
    """Apply one path.  Terms pushed past the cutoff raise :class:`TruncationError`
    when ``strict``; otherwise they are dropped and the result is flagged ``truncated``."""
    return _apply_paths([path], q, v, strict)


def apply_sum(op: OperatorSum, q: float, v: SparseVector, strict: bool = True) -> SparseVector:
    if op.nfactors != v.nfactors:
        raise ShapeError(f"{op.nfactors}-factor operator applied to a {v.nfactors}-factor vector")
    return _apply_paths(op.paths, q, v, strict)


def adjoint_path(path: PathOperator) -> PathOperator:
    return PathOperator(complex(np.conj(path.scalar)), tuple(op.adjoint() for op in path.legs))


def adjoint_sum(op: OperatorSum) -> OperatorSum:
    return OperatorSum(op.nfactors, tuple(adjoint_path(p) for p in op.paths))


def dense_matrix(op: OperatorSum, q: float, cutoff: int) -> np.ndarray:
    """Matrix of ``op`` on the truncated basis (row-major multi-index order).

    Images leaving the truncation are dropped, so entries next to the boundary
    are those of the compressed operator.
    """
    dim = cutoff ** op.nfactors
    mat = np.zeros((dim, dim), complex)
    if not op.nfactors:
        mat[0, 0] = sum(p.scalar for p in op.paths)
        return mat
    radix = _radix(op.nfactors, cutoff)
    idx = (np.arange(dim)[:, None] // radix[None, :]) % cutoff
    ones = np.ones(dim, complex)
    for path in op.paths:
        nidx, coef, keep = _path_image(path, q, idx, ones)
        cols = np.flatnonzero(keep)
        inside = (nidx >= 0).all(axis=1) & (nidx < cutoff).all(axis=1)
        np.add.at(mat, (nidx[inside] @ radix, cols[inside]), coef[inside])
    return mat


def sparse_columns(op: OperatorSum, q: float, cutoff: int, idx: np.ndarray):
    """Columns of ``op`` at the basis vectors ``idx`` (rows are multi-indices) as a sparse matrix.

    Rows are flattened multi-indices in ``{0..cutoff-1}^nfactors``; images that
    leave the truncation are dropped, as in :func:`dense_matrix`.
    """
    from scipy.sparse import coo_matrix

    idx = np.asarray(idx, np.int64).reshape(-1, op.nfactors)
    dim = cutoff ** op.nfactors
    rows, cols, vals = [], [], []
    radix = _radix(op.nfactors, cutoff)
    ones = np.ones(len(idx), complex)
    for path in op.paths:
        nidx, coef, keep = _path_image(path, q, idx, ones)
        inside = (nidx >= 0).all(axis=1) & (nidx < cutoff).all(axis=1)
        rows.append(nidx[inside] @ radix)
        cols.append(np.flatnonzero(keep)[inside])
        vals.append(coef[inside])
    if not rows:
        return coo_matrix((dim, len(idx)), dtype=complex).tocsc()
    return coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, len(idx))).tocsc()
