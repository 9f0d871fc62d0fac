"""Generator actions of the quantized function algebras of types A, C and D.

Vertices of a diagram are the rows/columns ``1..N`` of the corepresentation
matrix (``N = n + 1`` for A_n, ``2n`` for C_n and D_n).  An entry ``(k, l)`` of an
action is the operator carried by the paths that start at vertex ``k`` on the
left and end at vertex ``l`` on the right; concatenating diagrams is
convolution of actions.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from . import fock
from .fock import ElementaryOp, OperatorSum, PathOperator
from .weyl import Family, check_rank, is_reduced

__all__ = [
    "AlgebraSpec",
    "Action",
    "corep_dim",
    "elementary_table",
    "elementary_action",
    "torus_action",
    "letter_action",
    "torus_layer",
    "convolve",
    "convolve_actions",
    "word_action",
    "action_matrix_dense",
    "parse_torus",
    "NonReducedWordError",
    "unitarity_defect",
    "unit_phase",
    "bracketing_defect",
]

UNIT_TOL = 1e-10


class NonReducedWordError(ValueError):
    pass


def corep_dim(family: Family | str, n: int) -> int:
    family = check_rank(family, n)
    return n + 1 if family is Family.A else 2 * n


@dataclass(frozen=True)
class AlgebraSpec:
    family: Family
    n: int
    q: float = 0.5
    t: tuple[complex, ...] = ()
    cutoff: int = 16

    def __post_init__(self):
        fam = check_rank(self.family, self.n)
        object.__setattr__(self, "family", fam)
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        t = tuple(complex(x) for x in self.t) or (1.0 + 0j,) * self.n
        if len(t) != self.n:
            raise ValueError(f"torus point needs {self.n} entries, got {len(t)}")
        for x in t:
            if abs(abs(x) - 1) > UNIT_TOL:
                raise ValueError(f"torus entry {x} is not of unit modulus")
        object.__setattr__(self, "t", t)

    @property
    def N(self) -> int:
        return corep_dim(self.family, self.n)

    def with_(self, **kw) -> "AlgebraSpec":
        data = dict(family=self.family, n=self.n, q=self.q, t=self.t, cutoff=self.cutoff)
        data.update(kw)
        return AlgebraSpec(**data)


def parse_torus(text: str, n: int | None = None) -> tuple[complex, ...]:
    """Parse ``"0.6+0.8i,1"``; ``i`` or ``j`` mark the imaginary unit."""
    vals = []
    for col, chunk in _chunks(text, ","):
        s = chunk.strip().replace(" ", "").replace("i", "j")
        try:
            vals.append(complex(s))
        except ValueError:
            raise ValueError(f"line 1, column {col + 1}: bad complex number {chunk.strip()!r}") from None
    for x in vals:
        if abs(abs(x) - 1) > UNIT_TOL:
            raise ValueError(f"torus entry {x} is not of unit modulus")
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} torus entries, got {len(vals)}")
    return tuple(vals)


def _chunks(text: str, sep: str) -> Iterator[tuple[int, str]]:
    col = 0
    for chunk in text.split(sep):
        yield col, chunk
        col += len(chunk) + 1


# --- single-letter tables ----------------------------------------------------

def elementary_table(family: Family | str, n: int, i: int) -> dict[tuple[int, int], ElementaryOp]:
    """All nonzero entries ``(k, l) -> arrow`` of the action of the letter ``s_i``."""
    family = check_rank(family, n)
    if not 1 <= i <= n:
        raise ValueError(f"generator index {i} out of range 1..{n}")
    N = corep_dim(family, n)
    tab: dict[tuple[int, int], ElementaryOp] = {}
    if family is Family.A:
        tab.update({
            (i, i): fock.LOWER,
            (i + 1, i + 1): fock.RAISE,
            (i, i + 1): fock.DIAG_NEG_QN1,
            (i + 1, i): fock.DIAG_QN,
        })
    elif i < n:
        a, b = 2 * n - i, 2 * n - i + 1
        tab.update({
            (i, i): fock.LOWER,
            (a, a): fock.LOWER,
            (i + 1, i + 1): fock.RAISE,
            (b, b): fock.RAISE,
            (i, i + 1): fock.DIAG_NEG_QN1,
            (i + 1, i): fock.DIAG_QN,
            (a, b): fock.DIAG_QN1,
            (b, a): fock.DIAG_NEG_QN,
        })
    elif family is Family.C:
        # long root: the SU(2) action at q^2
        tab.update({
            (n, n): fock.LOWER2,
            (n + 1, n + 1): fock.RAISE2,
            (n, n + 1): fock.DIAG_NEG_Q2N2,
            (n + 1, n): fock.DIAG_Q2N,
        })
    else:
        tab.update({
            (n, n): fock.LOWER,
            (n - 1, n - 1): fock.LOWER,
            (n + 1, n + 1): fock.RAISE,
            (n + 2, n + 2): fock.RAISE,
            (n - 1, n + 1): fock.DIAG_NEG_QN1,
            (n + 1, n - 1): fock.DIAG_QN,
            (n, n + 2): fock.DIAG_QN1,
            (n + 2, n): fock.DIAG_NEG_QN,
        })
    touched = {k for k, _ in tab}
    for k in range(1, N + 1):
        if k not in touched:
            tab[(k, k)] = fock.IDENTITY
    return tab


def _check_vertex(family, n, *vertices):
    N = corep_dim(family, n)
    for v in vertices:
        if not 1 <= v <= N:
            raise ValueError(f"vertex {v} out of range 1..{N}")


def elementary_action(family: Family | str, n: int, i: int, k: int, l: int) -> ElementaryOp | None:
    _check_vertex(family, n, k, l)
    return elementary_table(family, n, i).get((k, l))


def torus_action(family: Family | str, n: int, t: Sequence[complex], k: int, l: int) -> complex | None:
    family = check_rank(family, n)
    _check_vertex(family, n, k, l)
    if len(t) != n:
        raise ValueError(f"torus point needs {n} entries")
    if k != l:
        return None
    if family is Family.A:
        if k == 1:
            return complex(np.prod(np.conj(np.asarray(t, complex))))
        return complex(t[n + 1 - k])
    if k <= n:
        return complex(np.conj(t[k - 1]))
    return complex(t[2 * n - k])


# --- actions and convolution -------------------------------------------------

@dataclass(frozen=True)
class Action:
    """A generator action: ``matrix[(k, l)]`` is an operator on ``nfactors`` shift factors.

    Missing entries are zero.
    """

    spec: AlgebraSpec
    word: tuple[int, ...]
    nfactors: int
    matrix: Mapping[tuple[int, int], OperatorSum] = field(repr=False)

    def entry(self, k: int, l: int) -> OperatorSum:
        _check_vertex(self.spec.family, self.spec.n, k, l)
        return self.matrix.get((k, l), OperatorSum(self.nfactors))

    def entries(self) -> list[tuple[int, int]]:
        return sorted(self.matrix)

    @property
    def N(self) -> int:
        return self.spec.N


Table = Callable[[Family, int, int], Mapping[tuple[int, int], ElementaryOp]]


def letter_action(spec: AlgebraSpec, i: int, table: Table | None = None) -> Action:
    # resolved per call so a replacement table (test fixtures) reaches every builder
    table = elementary_table if table is None else table
    mat = {
        kl: OperatorSum(1, (PathOperator(1.0 + 0j, (op,)),))
        for kl, op in table(spec.family, spec.n, i).items()
    }
    return Action(spec, (i,), 1, mat)


def torus_layer(spec: AlgebraSpec) -> Action:
    mat = {}
    for k in range(1, spec.N + 1):
        mat[(k, k)] = OperatorSum(0, (PathOperator(torus_action(spec.family, spec.n, spec.t, k, k), ()),))
    return Action(spec, (), 0, mat)


def _concat(left: OperatorSum, right: OperatorSum) -> list[PathOperator]:
    out = []
    for p in left.paths:
        for r in right.paths:
            s = p.scalar * r.scalar
            if s != 0:
                out.append(PathOperator(s, p.legs + r.legs))
    return out


def convolve(left: Action, right: Action, k: int, l: int) -> OperatorSum:
    """Entry ``(k, l)`` of ``left * right``: sum over middle vertices ``j`` in increasing order."""
    _compatible(left, right)
    paths: list[PathOperator] = []
    for j in range(1, left.N + 1):
        a = left.matrix.get((k, j))
        b = right.matrix.get((j, l))
        if a is not None and b is not None:
            paths += _concat(a, b)
    return OperatorSum(left.nfactors + right.nfactors, tuple(paths))


def _compatible(left: Action, right: Action):
    a, b = left.spec, right.spec
    if (a.family, a.n) != (b.family, b.n) or a.q != b.q:
        raise ValueError("cannot convolve actions of different algebras")


def convolve_actions(left: Action, right: Action) -> Action:
    _compatible(left, right)
    N = left.N
    rows: dict[int, list[tuple[int, OperatorSum]]] = {}
    for (k, j), op in left.matrix.items():
        rows.setdefault(k, []).append((j, op))
    cols: dict[int, dict[int, OperatorSum]] = {}
    for (j, l), op in right.matrix.items():
        cols.setdefault(j, {})[l] = op
    mat = {}
    nf = left.nfactors + right.nfactors
    for k in range(1, N + 1):
        acc: dict[int, list[PathOperator]] = {}
        for j, a in sorted(rows.get(k, [])):
            for l, b in cols.get(j, {}).items():
                acc.setdefault(l, []).extend(_concat(a, b))
        for l, paths in acc.items():
            if paths:
                mat[(k, l)] = OperatorSum(nf, tuple(paths))
    return Action(left.spec, left.word + right.word, nf, mat)


def word_action(
    spec: AlgebraSpec,
    word: Sequence[int],
    *,
    with_torus: bool = True,
    check_reduced: bool = True,
    right_fold: bool = False,
    table: Table | None = None,
) -> Action:
    """The action ``tau_t * pi_{s_{i_1}} * ... * pi_{s_{i_L}}`` of a reduced word."""
    word = tuple(int(i) for i in word)
    for i in word:
        if not 1 <= i <= spec.n:
            raise ValueError(f"generator index {i} out of range 1..{spec.n}")
    if check_reduced and not is_reduced(spec.family, spec.n, word):
        raise NonReducedWordError(f"word {list(word)} is not reduced in {spec.family.value}_{spec.n}")
    layers = [letter_action(spec, i, table) for i in word]
    if with_torus:
        layers.insert(0, torus_layer(spec))
    if not layers:
        mat = {(k, k): OperatorSum(0, (PathOperator(1.0 + 0j, ()),)) for k in range(1, spec.N + 1)}
        return Action(spec, (), 0, mat)
    if right_fold:
        act = reduce(lambda acc, lay: convolve_actions(lay, acc), reversed(layers[:-1]), layers[-1])
    else:
        act = reduce(convolve_actions, layers[1:], layers[0])
    return Action(spec, word, act.nfactors, act.matrix)


def action_matrix_dense(action: Action, k: int, l: int, cutoff: int | None = None) -> np.ndarray:
    """Dense matrix of entry ``(k, l)`` on the truncation ``{0..cutoff-1}^nfactors``."""
    cutoff = action.spec.cutoff if cutoff is None else cutoff
    return fock.dense_matrix(action.entry(k, l), action.spec.q, cutoff)


def unit_phase(angle: float) -> complex:
    return cmath.exp(1j * angle)


def unitarity_defect(spec: AlgebraSpec, i: int, cutoff: int | None = None, margin: int = 2) -> float:
    """Largest entry of ``sum_j (u^j_k)^dagger u^j_l - delta_kl I`` for one letter, on interior columns.

    Columns within ``margin`` of the truncation boundary are excluded, since
    the truncated raising arrow is not an isometry there.
    """
    cutoff = spec.cutoff if cutoff is None else cutoff
    act = word_action(spec, [i])
    N = spec.N
    dense = {kl: fock.dense_matrix(op, spec.q, cutoff) for kl, op in act.matrix.items()}
    zero = np.zeros((cutoff, cutoff), complex)
    interior = np.arange(cutoff) < cutoff - margin
    worst = 0.0
    for k in range(1, N + 1):
        for l in range(1, N + 1):
            acc = sum((dense.get((j, k), zero).conj().T @ dense.get((j, l), zero) for j in range(1, N + 1)),
                      zero.copy())
            if k == l:
                acc -= np.eye(cutoff)
            worst = max(worst, float(np.abs(acc[:, interior]).max(initial=0.0)))
    return worst


def bracketing_defect(spec: AlgebraSpec, word: Sequence[int], cutoff: int | None = None,
                      samples: int = 256, seed: int = 0) -> float:
    """Largest entrywise difference between the left- and right-folded word actions.

    Every basis vector of the truncation is used when there are at most
    ``samples`` of them, otherwise a seeded random subset.
    """
    cutoff = spec.cutoff if cutoff is None else cutoff
    left = word_action(spec, word, check_reduced=False)
    right = word_action(spec, word, check_reduced=False, right_fold=True)
    L = left.nfactors
    if cutoff ** L <= samples:
        idx = np.array(list(itertools.product(range(cutoff), repeat=L)), np.int64).reshape(-1, L)
    else:
        idx = np.random.default_rng(seed).integers(0, cutoff, (samples, L))
    worst = 0.0
    for kl in sorted(set(left.matrix) | set(right.matrix)):
        diff = fock.sparse_columns(left.entry(*kl), spec.q, cutoff, idx) \
            - fock.sparse_columns(right.entry(*kl), spec.q, cutoff, idx)
        worst = max(worst, float(abs(diff).max()) if diff.nnz else 0.0)
    return worst
