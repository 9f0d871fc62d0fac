"""Gelfand-Kirillov dimension of the simple modules: growth, degree and certificates.

The growth side runs the span closure of the cyclic vector and fits the
polynomial degree of ``k -> d_k``.  The lower-bound side builds explicit
polynomials in the generator entries which, applied with prescribed powers to
``e_0 (x) ... (x) e_0``, land on every basis vector ``e_{r_1} (x) ... (x) e_{r_L}``
(single-point support).  Three families of identities are checked:

* unique paths: for each part, the entry ``(k, r(k))`` fixes the vacuum up to a
  nonzero scalar and ``(j, r(k))`` kills it for the other ``j`` of the block;
* part operators: the entries ``T_j^i`` of the full module act on the first
  ``i`` parts as the rank-``i`` module does;
* hitting: the ordered powers of the polynomials reach the target basis vector.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import fock
from .closure import PRIME, rational_residue, span_closure
from .corep import AlgebraSpec, Action, corep_dim, elementary_table, word_action
from .fock import OperatorSum, SparseVector, TruncationError
from .weyl import (
    Family,
    NormalForm,
    check_rank,
    is_min_coset_rep,
    length,
    normal_form,
    parabolic_subset,
    word_to_element,
)

log = logging.getLogger(__name__)

__all__ = [
    "GrowthSeries",
    "DegreeEstimate",
    "estimate_degree",
    "binomial_lower_bound",
    "power_upper_bound",
    "SHIFT_BOUND",
    "block_range",
    "VertexMap",
    "path_map",
    "r_map",
    "CheckResult",
    "verify_unique_path",
    "part_operators",
    "verify_part_operators",
    "Poly",
    "PartCertificate",
    "Certificate",
    "last_part_polys",
    "hitting_polynomials",
    "lemma_checks",
    "rule_mismatches",
    "check_bounds",
    "quotient_rows",
    "growth_series",
    "GrowthReport",
    "gk_report",
    "QuotientError",
]

# every generator entry moves each coordinate by at most one
SHIFT_BOUND = 1
COEF_FLOOR = 1e-6
ZERO_TOL = 1e-12


class QuotientError(ValueError):
    pass


# --- growth -------------------------------------------------------------------

@dataclass
class GrowthSeries:
    dims: list[int]
    spec: AlgebraSpec
    word: tuple[int, ...]
    quotient_m: int | None = None
    method: str = "exact"
    ambiguous: int = 0

    @property
    def k_max(self) -> int:
        return len(self.dims) - 1


@dataclass(frozen=True)
class DegreeEstimate:
    slope: float          # fitted log-log slope with offset
    raw_slope: float      # plain ln d_k against ln k
    offset: float
    rounded: int
    margin: float         # distance of the slope from the nearest rounding boundary
    window: tuple[int, int]


def estimate_degree(dims: Sequence[int], window: float = 0.5, min_k: int = 4,
                    max_offset: float | None = None) -> DegreeEstimate:
    """Polynomial degree of ``k -> d_k`` from the tail ``k >= max(min_k, (1-window) k_max)``.

    Series too short for that window use their last four points.

    ``ln d_k`` is fitted against ``ln(k + c)`` with the offset ``c`` chosen by
    least squares in ``[0, max_offset]`` (default ``3 k_max``).  A polynomial
    of degree ``l`` with positive coefficients behaves like ``(k + c)^l`` for a
    suitable ``c``, so this removes most of the finite-``k`` bias of the plain
    log-log slope, which for ``C(k+l, l)`` at ``k <= 16`` is off by more than
    one once ``l >= 4``.
    """
    d = np.asarray(dims, float)
    K = len(d) - 1
    k0 = max(min_k, math.ceil(K * (1 - window)))
    if K - k0 + 1 < 4:
        # short series: widen to the last four points, which is less reliable
        k0 = K - 3
    if k0 < 1:
        raise ValueError(f"need k_max >= 4 to estimate a degree, got {K}")
    ks = np.arange(k0, K + 1)
    if (d[k0:] <= 0).any():
        raise ValueError("dimensions must be positive")
    y = np.log(d[k0:])
    if np.ptp(y) == 0:
        return DegreeEstimate(0.0, 0.0, 0.0, 0, 0.5, (int(k0), K))
    raw = float(np.polyfit(np.log(ks), y, 1)[0])

    def sse(c: float) -> float:
        coef, res, *_ = np.polyfit(np.log(ks + c), y, 1, full=True)
        return float(res[0]) if len(res) else 0.0

    hi = 3.0 * K if max_offset is None else max_offset
    c = float(minimize_scalar(sse, bounds=(0.0, hi), method="bounded",
                              options={"xatol": 1e-6}).x)
    slope = float(np.polyfit(np.log(ks + c), y, 1)[0])
    rounded = int(round(slope))
    return DegreeEstimate(slope, raw, c, rounded, 0.5 - abs(slope - rounded), (int(k0), K))


def binomial_lower_bound(ell: int, k: int) -> int:
    """``C(k + ell - 1, k)``, the number of multi-indices of ``ell`` parts summing to ``k``."""
    if ell < 0 or k < 0:
        raise ValueError("ell and k must be nonnegative")
    if ell == 0:
        return 1 if k == 0 else 0
    return math.comb(k + ell - 1, k)


def power_upper_bound(ell: int, k: int, a: int = SHIFT_BOUND) -> int:
    return (a * k + 1) ** ell


def growth_series(spec: AlgebraSpec, word: Sequence[int], k_max: int, *, tol: float = 1e-8,
                  rows: Sequence[int] | None = None, method: str = "exact",
                  quotient_m: int | None = None) -> GrowthSeries:
    act = word_action(spec, word)
    res = span_closure(act, k_max, tol=tol, rows=rows, method=method)
    return GrowthSeries(res.dims, spec, tuple(word), quotient_m, res.method, res.ambiguous)


# --- vertex maps and unique paths ---------------------------------------------

def block_range(family: Family | str, n: int, i: int) -> tuple[int, int]:
    """``(M_n^i, N_n^i)``: the vertices of the rank-``i`` block inside rank ``n``."""
    family = check_rank(family, n)
    if family is Family.A:
        return 1, i + 1
    return n - i + 1, n + i


@dataclass(frozen=True)
class VertexMap:
    family: Family
    n: int
    word: tuple[int, ...]
    images: tuple[int, ...]

    def __call__(self, v: int) -> int:
        return self.images[v - 1]

    def then(self, other: "VertexMap") -> "VertexMap":
        return VertexMap(self.family, self.n, self.word + other.word,
                         tuple(other(v) for v in self.images))

    def restrict(self, lo: int, hi: int) -> dict[int, int]:
        return {v: self(v) for v in range(lo, hi + 1)}


def path_map(family: Family | str, n: int, word: Sequence[int]) -> VertexMap:
    """The vertex reached from each left vertex along legs that keep ``e_0`` fixed.

    On the vacuum each letter moves every vertex along exactly one such leg, so
    the composite is a permutation of the vertices.
    """
    family = check_rank(family, n)
    N = corep_dim(family, n)
    images = list(range(1, N + 1))
    for i in word:
        tab = elementary_table(family, n, i)
        step = {}
        for (a, b), op in tab.items():
            img = fock.apply_elementary(op, 0.5, 0)
            if img is not None and img[0] == 0:
                if a in step:
                    raise ValueError(f"vertex {a} has two vacuum-preserving legs under s_{i}")
                step[a] = b
        images = [step[v] for v in images]
    return VertexMap(family, n, tuple(word), tuple(images))


def r_map(family: Family | str, n: int, part: Sequence[int]) -> VertexMap:
    """The case rules for the vertex map of a single part, on all vertices.

    A: ``j -> j+1`` if ``s_j`` occurs once.  C and D: ``j -> j-1`` below the
    middle if ``s_{j-1}`` occurs once, ``j -> j+1`` above it if ``s_{2n-j}``
    occurs once; for D the middle pair ``n, n+1`` is swapped when ``s_{n-1}``
    and ``s_n`` both occur once.
    """
    family = check_rank(family, n)
    N = corep_dim(family, n)
    once = {i for i in set(part) if list(part).count(i) == 1}
    img = []
    for j in range(1, N + 1):
        if family is Family.A:
            img.append(j + 1 if j in once else j)
        elif family is Family.C:
            if j <= n:
                img.append(j - 1 if j - 1 in once else j)
            else:
                img.append(j + 1 if 2 * n - j in once else j)
        else:
            if j <= n - 1:
                img.append(j - 1 if j - 1 in once else j)
            elif j > n + 1:
                img.append(j + 1 if 2 * n - j in once else j)
            else:
                swap = n - 1 in once and n in once
                img.append((2 * n + 1 - j) if swap else j)
    return VertexMap(family, n, tuple(part), tuple(img))


@dataclass
class CheckResult:
    kind: str
    label: str
    ok: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _plain_action(spec: AlgebraSpec, word: Sequence[int], cutoff: int) -> Action:
    return word_action(spec.with_(cutoff=cutoff), word, with_torus=False, check_reduced=False)


def verify_unique_path(spec: AlgebraSpec, word: Sequence[int], i: int,
                       rmap: VertexMap | None = None, label: str = "") -> list[CheckResult]:
    """Vacuum identities for the module of ``word`` (parts ``i+1..l``) on the block of rank ``i``."""
    family, n = spec.family, spec.n
    lo, hi = block_range(family, n, i)
    if lo > hi:
        return []
    rmap = path_map(family, n, word) if rmap is None else rmap
    act = _plain_action(spec, word, 4)
    vac = SparseVector.vacuum(len(word), 4)
    zero = (0,) * len(word)
    out = []
    for k in range(lo, hi + 1):
        rk = rmap(k)
        img = fock.apply_sum(act.entry(k, rk), spec.q, vac)
        terms = img.terms
        ok = set(terms) == {zero} and abs(terms[zero]) > ZERO_TOL
        out.append(CheckResult("unique_path", f"{label}({k},{rk})", ok,
                               "" if ok else f"image support {sorted(terms)}"))
        for j in range(lo, hi + 1):
            if j == k:
                continue
            img = fock.apply_sum(act.entry(j, rk), spec.q, vac)
            ok = img.norm() < ZERO_TOL
            out.append(CheckResult("unique_path", f"{label}({j},{rk})=0", ok,
                                   "" if ok else f"nonzero image of norm {img.norm():.3g}"))
    return out


# --- part operators -----------------------------------------------------------

def _rank_letter_shift(family: Family, n: int, i: int) -> int:
    return 0 if family is Family.A else n - i


def _sub_rank_valid(family: Family, i: int) -> bool:
    return i >= (2 if family is Family.D else 1)


def part_operators(nf: NormalForm, i: int) -> list[tuple[int, int]]:
    """Entries ``T_1^i..T_{N_i}^i`` of the full module: row ``N_n^i``, column ``r(j + M_n^i - 1)``."""
    family, n = nf.family, nf.n
    if not 1 <= i <= n:
        raise ValueError(f"part index {i} out of range 1..{n}")
    suffix = [x for part in nf.words()[i:] for x in part]
    r = path_map(family, n, suffix)
    lo, hi = block_range(family, n, i)
    return [(hi, r(j + lo - 1)) for j in range(1, hi - lo + 2)]


def verify_part_operators(spec: AlgebraSpec, nf: NormalForm, i: int, *, samples: int = 64,
                          seed: int = 0, cutoff: int = 3) -> list[CheckResult]:
    """Compare ``T_j^i`` on ``v (x) e_0...`` against the rank-``i`` module of parts ``1..i``."""
    family, n = spec.family, spec.n
    if not 1 <= i < n or not _sub_rank_valid(family, i):
        return []
    words = nf.words()
    prefix = [x for part in words[:i] for x in part]
    suffix_len = sum(len(p) for p in words[i:])
    shift = _rank_letter_shift(family, n, i)
    sub_spec = AlgebraSpec(family, i, spec.q, cutoff=cutoff + 2)
    sub = _plain_action(sub_spec, [x - shift for x in prefix], cutoff + 2)
    full = _plain_action(spec, nf.word(), cutoff + 2)
    Ni = corep_dim(family, i)
    L0 = len(prefix)
    rng = np.random.default_rng(seed)
    if cutoff ** L0 <= samples:
        basis = list(itertools.product(range(cutoff), repeat=L0))
    else:
        basis = [tuple(int(x) for x in rng.integers(0, cutoff, L0)) for _ in range(samples)]
        basis[0] = (0,) * L0
    out = []
    for j, (row, col) in enumerate(part_operators(nf, i), start=1):
        T = full.entry(row, col)
        U = sub.entry(Ni, j)
        ratio = None
        ok = True
        detail = ""
        for alpha in basis:
            lhs = fock.apply_sum(T, spec.q, SparseVector.basis(alpha + (0,) * suffix_len, cutoff + 2))
            rhs = fock.apply_sum(U, spec.q, SparseVector.basis(alpha, cutoff + 2))
            rhs_terms = {k + (0,) * suffix_len: c for k, c in rhs.terms.items()}
            lhs_terms = lhs.terms
            if set(lhs_terms) != set(rhs_terms):
                ok, detail = False, f"support mismatch at {alpha}"
                break
            for key, c in rhs_terms.items():
                rt = lhs_terms[key] / c
                if ratio is None:
                    ratio = rt
                elif abs(rt - ratio) > 1e-10 * max(1.0, abs(ratio)):
                    ok, detail = False, f"non-constant ratio at {alpha}"
                    break
            if not ok:
                break
        if ok and ratio is not None and abs(ratio) < ZERO_TOL:
            ok, detail = False, "zero constant"
        out.append(CheckResult("part_operator", f"T_{j}^{i}=u({row},{col})", ok, detail))
    return out


# --- hitting polynomials ------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """A single generator entry, or the commutator ``[a, b]`` of two entries of the full module."""

    entries: tuple[tuple[int, int], ...]

    @property
    def degree(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        names = [f"u[{k},{l}]" for k, l in self.entries]
        return names[0] if len(names) == 1 else f"[{names[0]},{names[1]}]"


@dataclass
class PartCertificate:
    part: int
    slots: tuple[int, ...]      # global tensor slots of the part
    polys: list[Poly]
    sigma: list[int]            # p_j raises slot slots[sigma[j-1]-1]
    source: str                 # "lemma" or "search"
    lemma_failure: str = ""


@dataclass
class Certificate:
    parts: list[PartCertificate]
    M0: int
    checks: list[CheckResult] = field(default_factory=list)
    grid_size: int = 0
    min_coef: float = float("inf")
    below_floor: int = 0

    @property
    def checks_passed(self) -> int:
        return sum(c.ok for c in self.checks)

    @property
    def checks_failed(self) -> int:
        return sum(not c.ok for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.checks_failed == 0

    def order(self) -> list[tuple[Poly, int]]:
        """``(poly, slot)`` in application order: part 1 first, within a part ``p_l`` first."""
        out = []
        for pc in self.parts:
            for j in range(len(pc.polys), 0, -1):
                out.append((pc.polys[j - 1], pc.slots[pc.sigma[j - 1] - 1]))
        return out

    def summary(self) -> dict:
        return {
            "M0": self.M0,
            "checks_passed": self.checks_passed,
            "checks_failed": self.checks_failed,
            "grid_size": self.grid_size,
            "min_coefficient": None if math.isinf(self.min_coef) else self.min_coef,
            "below_floor": self.below_floor,
            "parts": [
                {"part": pc.part, "polys": [str(p) for p in pc.polys], "sigma": pc.sigma,
                 "source": pc.source, **({"lemma_failure": pc.lemma_failure} if pc.lemma_failure else {})}
                for pc in self.parts
            ],
            "failures": [c.as_dict() for c in self.checks if not c.ok][:20],
        }


def last_part_polys(family: Family | str, m: int, word: Sequence[int]) -> tuple[list[tuple], list[int]]:
    """Polynomials for the last part of a rank-``m`` word, as rank-``m`` entries of the last row.

    Each polynomial is a tuple of columns: ``(c,)`` for the entry ``(N_m, c)``,
    ``(a, b)`` for the commutator ``[(N_m, a), (N_m, b)]``.  Returns the
    polynomials and the permutation ``sigma`` (1-based).
    """
    family = check_rank(family, m)
    N = corep_dim(family, m)
    ell = len(word)
    simple = ([(N - j + 1,) for j in range(1, ell + 1)], list(range(1, ell + 1)))
    if family is Family.A:
        return simple
    if family is Family.C:
        if ell <= m:
            return simple
        polys = []
        for j in range(1, ell + 1):
            if j <= N - ell - 1:
                polys.append((N - j + 1,))
            elif j < m:
                polys.append((j + 1,))
            elif j == m:
                polys.append((m + 1, m))
            else:
                polys.append((j,))
        sigma = [N - j if N - ell <= j <= ell else j for j in range(1, ell + 1)]
        return polys, sigma
    if ell < m:
        return simple
    # columns n and n+1 trade places at j = n-1, n, matching the s_{n-1}, s_n diagrams
    swap = {m - 1: m + 1, m: m}
    polys = [(N - j + 1,) if j <= N - ell - 2 else (swap.get(j, j + 1),) for j in range(1, ell + 1)]
    sigma = [N - j - 1 if N - ell - 1 <= j <= ell else j for j in range(1, ell + 1)]
    return polys, sigma


class _Evaluator:
    """Batched application of one entry operator to tagged basis-vector terms.

    With ``prime`` set the coefficients are residues in the rescaled basis, so
    exact cancellation and exact nonvanishing can be told apart from underflow.
    The torus scalar is constant on an entry and is dropped in that mode.
    """

    def __init__(self, op: OperatorSum, q: float, cutoff: int, prime: int | None = None):
        P, L = len(op.paths), op.nfactors
        self.cutoff, self.prime = cutoff, prime
        self.shifts = np.zeros((P, L), np.int64)
        grid = np.arange(cutoff + 1)
        if prime is None:
            self.tables = np.ones((P, L, cutoff + 1), complex)
            self.scalars = np.array([complex(p.scalar) for p in op.paths], complex)
        else:
            self.tables = np.ones((P, L, cutoff + 1), np.int64)
            self.scalars = np.ones(P, np.int64)
            scalars = [complex(p.scalar) for p in op.paths]
            if any(abs(s / scalars[0] - 1) > 1e-12 for s in scalars):
                raise ValueError("entry paths carry different scalars")
            qr = rational_residue(q, prime)
        for a, path in enumerate(op.paths):
            self.shifts[a] = path.shifts
            for j, leg in enumerate(path.legs):
                if leg.kind == "id":
                    continue
                if prime is None:
                    self.tables[a, j] = leg.coefficients(q, grid)
                else:
                    self.tables[a, j] = leg.modular_coefficients(qr, grid, prime)

    def __call__(self, tid, idx, coef):
        P, L = self.shifts.shape
        if not P or not len(coef):
            return tid[:0], idx[:0], coef[:0]
        c = self.scalars[:, None] * coef[None, :]
        for j in range(L):
            c = c * self.tables[:, j, :][:, idx[:, j]]
            if self.prime is not None:
                c %= self.prime
        nidx = idx[None, :, :] + self.shifts[:, None, :]
        keep = c != 0
        nidx, c = nidx[keep], c[keep]
        t = np.broadcast_to(tid[None, :], keep.shape)[keep]
        if len(nidx) and nidx.max() >= self.cutoff:
            raise TruncationError("certificate check reached the cutoff")
        return t, nidx, c


def _merge_tagged(tid, idx, coef, cutoff, prime=None):
    if not len(coef):
        return tid, idx, coef
    radix = cutoff ** np.arange(idx.shape[1] - 1, -1, -1, dtype=np.int64) if idx.shape[1] else np.zeros(0, np.int64)
    keys = idx @ radix if idx.shape[1] else np.zeros(len(coef), np.int64)
    order = np.lexsort((keys, tid))
    tid, idx, keys, coef = tid[order], idx[order], keys[order], coef[order]
    starts = np.flatnonzero(np.r_[True, (tid[1:] != tid[:-1]) | (keys[1:] != keys[:-1])])
    sums = np.add.reduceat(coef, starts)
    if prime is not None:
        sums %= prime
        keep = sums != 0
    else:
        big = np.maximum.reduceat(np.abs(coef), starts)
        keep = (sums != 0) & (np.abs(sums) > fock.DROP_TOL * big)
    return tid[starts][keep], idx[starts][keep], sums[keep]


class _PolyApplier:
    """Applies certificate polynomials in floating point, or exactly mod ``prime``."""

    def __init__(self, action: Action, q: float, cutoff: int, prime: int | None = None):
        self.action, self.q, self.cutoff, self.prime = action, q, cutoff, prime
        self._cache: dict[tuple[int, int], _Evaluator] = {}

    def exact(self) -> "_PolyApplier":
        return _PolyApplier(self.action, self.q, self.cutoff, PRIME)

    def ones(self, T: int) -> np.ndarray:
        return np.ones(T, complex) if self.prime is None else np.ones(T, np.int64)

    def entry(self, kl):
        if kl not in self._cache:
            self._cache[kl] = _Evaluator(self.action.entry(*kl), self.q, self.cutoff, self.prime)
        return self._cache[kl]

    def __call__(self, poly: Poly, tid, idx, coef):
        if poly.degree == 1:
            out = self.entry(poly.entries[0])(tid, idx, coef)
        else:
            A, B = (self.entry(kl) for kl in poly.entries)
            t1 = A(*B(tid, idx, coef))
            t2 = B(*A(tid, idx, coef))
            neg = -t2[2] if self.prime is None else (self.prime - t2[2]) % self.prime
            out = (np.concatenate([t1[0], t2[0]]), np.concatenate([t1[1], t2[1]]),
                   np.concatenate([t1[2], neg]))
        return _merge_tagged(*out, self.cutoff, self.prime)


def _raises_slot(apply: _PolyApplier, poly: Poly, slot: int, vecs: np.ndarray,
                 exact: _PolyApplier | None = None) -> bool:
    """Whether ``poly`` sends each basis vector in ``vecs`` to a nonzero multiple of it raised at ``slot``.

    Nonvanishing is decided by ``exact`` when given, otherwise by a float threshold.
    """
    want = vecs.copy()
    want[:, slot] += 1
    tid = np.arange(len(vecs))
    for ap in (apply, exact) if exact is not None else (apply,):
        t, idx, c = ap(poly, tid, vecs, ap.ones(len(vecs)))
        if len(t) != len(vecs) or not np.array_equal(t, tid) or not np.array_equal(idx, want):
            return False
        if exact is None and not (np.abs(c) > ZERO_TOL).all():
            return False
    return True


def _local_vectors(L: int, free: Sequence[int], rng, samples: int, top: int = 2) -> np.ndarray:
    """Basis vectors with arbitrary small values on ``free`` slots and zeros elsewhere."""
    free = list(free)
    if (top + 1) ** len(free) <= samples:
        vals = np.array(list(itertools.product(range(top + 1), repeat=len(free))), np.int64)
    else:
        vals = rng.integers(0, top + 1, (samples, len(free)))
        vals[0] = 0
        vals[1] = top
    out = np.zeros((len(vals), L), np.int64)
    if free:
        out[:, free] = vals.reshape(len(vals), len(free))
    return out


def _search_part(apply: _PolyApplier, action: Action, rows: Sequence[int], slots: Sequence[int],
                 before: Sequence[int], rng, samples: int,
                 exact: _PolyApplier | None = None) -> tuple[list[Poly], list[int]] | None:
    """Greedy search: one entry (or commutator of two entries of one row) per slot."""
    cands = [kl for kl in action.entries() if kl[0] in rows and not action.matrix[kl].is_zero]
    cands.sort(key=lambda kl: (-kl[0], kl[1]))
    L = action.nfactors
    for order in (list(slots), list(reversed(slots))):
        chosen: dict[int, Poly] = {}
        done: list[int] = []
        for s in order:
            vecs = _local_vectors(L, list(before) + done, rng, samples)
            pick = next((Poly((kl,)) for kl in cands if _raises_slot(apply, Poly((kl,)), s, vecs, exact)), None)
            if pick is None:
                pairs = ((a, b) for a in cands for b in cands if a[0] == b[0] and a < b)
                pick = next((Poly(p) for p in pairs if _raises_slot(apply, Poly(p), s, vecs, exact)), None)
            if pick is None:
                break
            chosen[s] = pick
            done.append(s)
        else:
            # application order is p_l first, so p_j raises the j-th slot from the end of ``order``
            seq = list(reversed(order))
            return [chosen[s] for s in seq], [list(slots).index(s) + 1 for s in seq]
    return None


def hitting_polynomials(spec: AlgebraSpec, nf: NormalForm, *, rows: Sequence[int] | None = None,
                        grid_max: int = 3, max_tuples: int = 500, seed: int = 0,
                        local_samples: int = 48) -> Certificate:
    """Build the hitting polynomials of every part and check them on an exponent grid.

    Part ``i`` uses the last-part polynomials of the rank-``i`` module of parts
    ``1..i`` with every variable ``(N_i, c)`` replaced by ``T_c^i``.  Where that
    recipe is unavailable (type D below rank 3 has no such sub-module) or fails
    its local check, the part falls back to a searched certificate, and the
    recipe failure is recorded on the part.
    """
    family, n = spec.family, spec.n
    words = nf.words()
    L = sum(len(p) for p in words)
    rng = np.random.default_rng(seed)
    cutoff = grid_max + 3
    action = word_action(spec.with_(cutoff=cutoff), nf.word(), check_reduced=False)
    apply = _PolyApplier(action, spec.q, cutoff)
    exact = apply.exact()
    allowed = set(range(1, spec.N + 1)) if rows is None else set(rows)
    parts: list[PartCertificate] = []
    checks: list[CheckResult] = []
    offset = 0
    for i, pw in enumerate(words, start=1):
        slots = tuple(range(offset, offset + len(pw)))
        before = list(range(offset))
        offset += len(pw)
        if not pw:
            continue
        polys = sigma = None
        failure = ""
        if _sub_rank_valid(family, i):
            shift = _rank_letter_shift(family, n, i)
            raw, sigma = last_part_polys(family, i, [x - shift for x in pw])
            T = part_operators(nf, i)
            polys = [Poly(tuple(T[c - 1] for c in cols)) for cols in raw]
            if sorted(sigma) != list(range(1, len(pw) + 1)):
                failure = f"sigma {sigma} is not a permutation"
            elif any(kl[0] not in allowed for p in polys for kl in p.entries):
                failure = "uses rows outside the allowed generators"
            else:
                done: list[int] = []
                for j in range(len(polys), 0, -1):
                    s = slots[sigma[j - 1] - 1]
                    vecs = _local_vectors(L, before + done, rng, local_samples)
                    if not _raises_slot(apply, polys[j - 1], s, vecs, exact):
                        failure = f"p_{j} = {polys[j - 1]} does not raise slot {sigma[j - 1]} alone"
                        break
                    done.append(s)
        else:
            failure = f"no rank-{i} sub-module for family {family.value}"
        source = "lemma"
        if failure:
            log.info("part %d of %s: %s; searching", i, nf, failure)
            found = _search_part(apply, action, sorted(allowed), slots, before, rng, local_samples, exact)
            if found is None:
                checks.append(CheckResult("hitting", f"part {i}", False, f"{failure}; search failed"))
                polys, sigma, source = [], [], "none"
            else:
                polys, sigma = found
                source = "search"
        parts.append(PartCertificate(i, slots, polys, list(sigma), source, failure))
    M0 = max((p.degree for pc in parts for p in pc.polys), default=1)
    cert = Certificate(parts, M0, checks)
    if any(pc.source == "none" for pc in parts):
        return cert
    _check_grid(cert, apply, exact, L, grid_max, max_tuples, rng)
    return cert


def _run_order(order, apply: _PolyApplier, grid: np.ndarray):
    T, L = grid.shape
    tid = np.arange(T)
    idx = np.zeros((T, L), np.int64)
    coef = apply.ones(T)
    for poly, slot in order:
        for m in range(int(grid[:, slot].max(initial=0))):
            sel = grid[tid, slot] > m
            if not sel.any():
                break
            t2, i2, c2 = apply(poly, tid[sel], idx[sel], coef[sel])
            tid = np.concatenate([tid[~sel], t2])
            idx = np.concatenate([idx[~sel], i2])
            coef = np.concatenate([coef[~sel], c2])
    counts = np.bincount(tid, minlength=T)
    firsts = np.full(T, -1)
    firsts[tid[::-1]] = np.arange(len(tid))[::-1]
    return counts, firsts, idx, coef


def _check_grid(cert: Certificate, apply: _PolyApplier, exact: _PolyApplier, L: int,
                grid_max: int, max_tuples: int, rng) -> None:
    """Support-exact check of every exponent tuple, in floats and mod a prime.

    A tuple passes when both computations land on the single expected vector
    and the exact residue is nonzero.  Float moduli below ``COEF_FLOOR`` are
    counted separately: they are genuine q-power factors, not failures.
    """
    if L == 0:
        grid = np.zeros((1, 0), np.int64)
    elif (grid_max + 1) ** L <= max_tuples:
        grid = np.array(list(itertools.product(range(grid_max + 1), repeat=L)), np.int64)
    else:
        grid = rng.integers(0, grid_max + 1, (max_tuples, L))
        grid[0] = 0
        grid[1] = grid_max
    cert.grid_size = len(grid)
    order = cert.order()
    fc, ff, fidx, fcoef = _run_order(order, apply, grid)
    ec, ef, eidx, ecoef = _run_order(order, exact, grid)
    for t in range(len(grid)):
        label = "r=" + "".join(str(int(x)) for x in grid[t])
        if fc[t] != 1 or ec[t] != 1:
            cert.checks.append(CheckResult("hitting", label, False,
                                           f"support of size {fc[t]} (float), {ec[t]} (exact)"))
            continue
        a, b = ff[t], ef[t]
        if not (np.array_equal(fidx[a], grid[t]) and np.array_equal(eidx[b], grid[t])):
            cert.checks.append(CheckResult("hitting", label, False, f"landed on {fidx[a].tolist()}"))
            continue
        mod = float(abs(fcoef[a]))
        cert.min_coef = min(cert.min_coef, mod)
        cert.below_floor += mod <= COEF_FLOOR
        ok = bool(ecoef[b] != 0)
        cert.checks.append(CheckResult("hitting", label, ok, "" if ok else "coefficient vanishes exactly"))


# --- lemma suites -------------------------------------------------------------

def lemma_checks(spec: AlgebraSpec, nf: NormalForm, *, seed: int = 0,
                 samples: int = 64) -> list[CheckResult]:
    """Unique-path identities (each part and each suffix of parts) and part-operator identities."""
    family, n = spec.family, spec.n
    words = nf.words()
    out: list[CheckResult] = []
    for i in range(n):
        part = words[i]
        out += verify_unique_path(spec, part, i, label=f"part {i + 1} ")
        suffix = [x for p in words[i:] for x in p]
        if len(words) - i > 1:
            composed = path_map(family, n, [])
            for p in words[i:]:
                composed = composed.then(path_map(family, n, p))
            out += verify_unique_path(spec, suffix, i, rmap=composed, label=f"parts {i + 1}..{n} ")
    for i in range(1, n):
        out += verify_part_operators(spec, nf, i, samples=samples, seed=seed)
    return out


def rule_mismatches(nf: NormalForm) -> list[str]:
    """Block vertices where the case rules disagree with the traced vertex map."""
    family, n = nf.family, nf.n
    out = []
    for i, part in enumerate(nf.words()):
        lo, hi = block_range(family, n, i)
        rule, traced = r_map(family, n, part), path_map(family, n, part)
        for k in range(lo, hi + 1):
            if rule(k) != traced(k):
                out.append(f"part {i + 1}: {k} -> {traced(k)} (rule gives {rule(k)})")
    return out


# --- reports ------------------------------------------------------------------

@dataclass
class GrowthReport:
    series: GrowthSeries
    estimate: DegreeEstimate
    target: int
    certificate: Certificate | None
    bounds_ok: bool
    bound_failures: list[str]
    normal_form: str
    pass_: bool

    def as_dict(self) -> dict:
        spec = self.series.spec
        cert = self.certificate
        return {
            "family": spec.family.value,
            "rank": spec.n,
            "word": list(self.series.word),
            "normal_form": self.normal_form,
            "length": self.target,
            "q": spec.q,
            "t": [[round(z.real, 15), round(z.imag, 15)] for z in spec.t],
            "cutoff": spec.cutoff,
            "k_max": self.series.k_max,
            "rank_method": self.series.method,
            "ambiguous_residuals": self.series.ambiguous,
            "dims": self.series.dims,
            "slope": round(self.estimate.slope, 6),
            "raw_slope": round(self.estimate.raw_slope, 6),
            "fit_offset": round(self.estimate.offset, 6),
            "rounding_margin": round(self.estimate.margin, 6),
            "estimated_gkdim": self.estimate.rounded,
            "target": self.target,
            "bounds_ok": self.bounds_ok,
            "bound_failures": self.bound_failures,
            "certificate": None if cert is None else cert.summary(),
            "quotient_m": self.series.quotient_m,
            "pass": self.pass_,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        return "k,dim\n" + "".join(f"{k},{d}\n" for k, d in enumerate(self.series.dims))


def check_bounds(dims: Sequence[int], ell: int, M0: int, a: int = SHIFT_BOUND) -> list[str]:
    out = []
    K = len(dims) - 1
    for k, d in enumerate(dims):
        if d > power_upper_bound(ell, k, a):
            out.append(f"d_{k}={d} exceeds ({a}k+1)^{ell}")
        if M0 * k <= K and dims[M0 * k] < binomial_lower_bound(ell, k):
            out.append(f"d_{M0 * k}={dims[M0 * k]} below C({k + ell - 1},{k})")
    if dims and dims[0] != 1:
        out.append("d_0 is not 1")
    if any(b < a_ for a_, b in zip(dims, dims[1:])):
        out.append("dimensions decrease")
    return out


def quotient_rows(spec: AlgebraSpec, m: int) -> list[int]:
    if not 1 <= m <= spec.n:
        raise QuotientError(f"m must lie in 1..{spec.n}")
    return list(range(spec.N - m + 1, spec.N + 1))


def gk_report(spec: AlgebraSpec, word: Sequence[int], k_max: int = 12, *, tol: float = 1e-8,
              quotient_m: int | None = None, method: str = "exact", certificate: bool = True,
              seed: int = 0, max_tuples: int = 500) -> GrowthReport:
    """Growth, degree estimate, bounds and certificate for the module of ``word``."""
    family, n = spec.family, spec.n
    w = word_to_element(family, n, word)
    ell = length(w)
    if ell != len(word):
        raise ValueError(f"word {list(word)} is not reduced")
    rows = None
    if quotient_m is not None:
        if family is Family.D:
            raise QuotientError("quotient mode is defined for families A and C only")
        S = parabolic_subset(family, n, n - quotient_m + 1)
        if not is_min_coset_rep(w, S):
            raise QuotientError(f"{list(word)} is not a minimal coset representative for S={sorted(S)}")
        rows = quotient_rows(spec, quotient_m)
    nf = normal_form(w)
    series = growth_series(spec, word, k_max, tol=tol, rows=rows, method=method, quotient_m=quotient_m)
    est = estimate_degree(series.dims)
    cert = None
    if certificate:
        cert = hitting_polynomials(spec, nf, rows=rows, seed=seed, max_tuples=max_tuples)
    M0 = cert.M0 if cert is not None else 1
    failures = check_bounds(series.dims, ell, M0)
    ok = est.rounded == ell and not failures and (cert is None or cert.ok)
    return GrowthReport(series, est, ell, cert, not failures, failures, str(nf), ok)
