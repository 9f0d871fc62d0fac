"""Weyl groups of types A_n, C_n and D_n realised as signed permutation matrices.

An element is stored row by row: row ``i`` has a single nonzero entry ``sign[i]``
in column ``cols[i]`` (both 0-based internally, 1-based in the public word and
normal-form formats).  Type A_n acts on ``n + 1`` coordinates, types C_n and D_n
on ``n`` coordinates.

Simple roots are the standard ones: ``e_i - e_{i+1}`` for ``i < n`` in every
family, ``e_n - e_{n+1}`` for A, ``2 e_n`` for C and ``e_{n-1} + e_n`` for D.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Family",
    "SignedPermutation",
    "NormalForm",
    "PartTriple",
    "simple_reflection",
    "identity",
    "multiply",
    "length",
    "bfs_lengths",
    "word_to_element",
    "is_reduced",
    "reduced_word",
    "normal_form",
    "reconstruct",
    "part_word",
    "part_choices",
    "all_elements",
    "parabolic_subset",
    "is_min_coset_rep",
    "min_coset_reps",
    "parse_word",
    "format_word",
    "parse_normal_form",
    "format_normal_form",
]


class Family(str, Enum):
    A = "A"
    C = "C"
    D = "D"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown family {value!r}; expected A, C or D") from None


def check_rank(family: Family | str, n: int) -> Family:
    family = Family.parse(family)
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"rank must be a positive integer, got {n!r}")
    if family is Family.D and n < 2:
        raise ValueError("type D needs rank n >= 2")
    return family


def degree(family: Family, n: int) -> int:
    """Number of coordinates the matrix realisation acts on."""
    return n + 1 if family is Family.A else n


@dataclass(frozen=True)
class SignedPermutation:
    family: Family
    n: int
    cols: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        m = degree(self.family, self.n)
        if len(self.cols) != m or len(self.signs) != m:
            raise ValueError(f"expected {m} rows for {self.family.value}_{self.n}")
        if sorted(self.cols) != list(range(m)):
            raise ValueError(f"columns {self.cols} do not form a permutation")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        neg = sum(1 for s in self.signs if s < 0)
        if self.family is Family.A and neg:
            raise ValueError("type A elements carry no signs")
        if self.family is Family.D and neg % 2:
            raise ValueError("type D elements have an even number of -1 entries")

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        return multiply(self, other)

    def matrix(self) -> list[list[int]]:
        m = len(self.cols)
        rows = [[0] * m for _ in range(m)]
        for i, (j, s) in enumerate(zip(self.cols, self.signs)):
            rows[i][j] = s
        return rows

    def inverse(self) -> "SignedPermutation":
        m = len(self.cols)
        cols = [0] * m
        signs = [1] * m
        for i, (j, s) in enumerate(zip(self.cols, self.signs)):
            cols[j] = i
            signs[j] = s
        return SignedPermutation(self.family, self.n, tuple(cols), tuple(signs))

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Matrix times column vector."""
        return tuple(s * vec[j] for j, s in zip(self.cols, self.signs))

    @property
    def is_identity(self) -> bool:
        return self.cols == tuple(range(len(self.cols))) and all(s == 1 for s in self.signs)

    def __str__(self) -> str:
        body = " ".join(f"{'-' if s < 0 else ''}{j + 1}" for j, s in zip(self.cols, self.signs))
        return f"{self.family.value}{self.n}[{body}]"


def identity(family: Family | str, n: int) -> SignedPermutation:
    family = check_rank(family, n)
    m = degree(family, n)
    return SignedPermutation(family, n, tuple(range(m)), (1,) * m)


def simple_reflection(family: Family | str, n: int, i: int) -> SignedPermutation:
    family = check_rank(family, n)
    if not 1 <= i <= n:
        raise ValueError(f"generator index {i} out of range 1..{n}")
    m = degree(family, n)
    cols = list(range(m))
    signs = [1] * m
    if i < n or family is Family.A:
        cols[i - 1], cols[i] = i, i - 1
    elif family is Family.C:
        signs[n - 1] = -1
    else:
        # reflection in e_{n-1} + e_n: e_{n-1} -> -e_n, e_n -> -e_{n-1}
        cols[n - 2], cols[n - 1] = n - 1, n - 2
        signs[n - 2] = signs[n - 1] = -1
    return SignedPermutation(family, n, tuple(cols), tuple(signs))


def multiply(w1: SignedPermutation, w2: SignedPermutation) -> SignedPermutation:
    if (w1.family, w1.n) != (w2.family, w2.n):
        raise ValueError(
            f"cannot multiply {w1.family.value}_{w1.n} by {w2.family.value}_{w2.n}"
        )
    cols = tuple(w2.cols[j] for j in w1.cols)
    signs = tuple(s * w2.signs[j] for j, s in zip(w1.cols, w1.signs))
    return SignedPermutation(w1.family, w1.n, cols, signs)


@lru_cache(maxsize=None)
def positive_roots(family: Family, n: int) -> tuple[tuple[int, ...], ...]:
    m = degree(family, n)
    roots = []
    for i, j in itertools.combinations(range(m), 2):
        v = [0] * m
        v[i], v[j] = 1, -1
        roots.append(tuple(v))
        if family is not Family.A:
            v = [0] * m
            v[i], v[j] = 1, 1
            roots.append(tuple(v))
    if family is Family.C:
        for i in range(m):
            v = [0] * m
            v[i] = 2
            roots.append(tuple(v))
    return tuple(roots)


def _is_negative(vec: Sequence[int]) -> bool:
    for x in vec:
        if x:
            return x < 0
    return False


def length(w: SignedPermutation) -> int:
    """Number of positive roots sent to negative roots.

    For type A this is the inversion count; for C and D it is the usual
    signed-inversion count.
    """
    return sum(1 for root in positive_roots(w.family, w.n) if _is_negative(w.apply(root)))


def bfs_lengths(family: Family | str, n: int) -> dict[SignedPermutation, int]:
    """Word length of every group element by breadth-first search of the Cayley graph."""
    family = check_rank(family, n)
    gens = [simple_reflection(family, n, i) for i in range(1, n + 1)]
    start = identity(family, n)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for s in gens:
            v = multiply(w, s)
            if v not in dist:
                dist[v] = dist[w] + 1
                queue.append(v)
    return dist


def word_to_element(family: Family | str, n: int, word: Iterable[int]) -> SignedPermutation:
    family = check_rank(family, n)
    w = identity(family, n)
    for i in word:
        w = multiply(w, simple_reflection(family, n, int(i)))
    return w


def is_reduced(family: Family | str, n: int, word: Sequence[int]) -> bool:
    return len(word) == length(word_to_element(family, n, word))


def reduced_word(w: SignedPermutation) -> list[int]:
    """A reduced word for ``w`` built by stripping right descents."""
    word: list[int] = []
    cur = w
    ell = length(cur)
    while ell:
        for i in range(1, w.n + 1):
            v = multiply(cur, simple_reflection(w.family, w.n, i))
            if length(v) < ell:
                word.append(i)
                cur, ell = v, ell - 1
                break
    return word[::-1]


# --- normal form -----------------------------------------------------------

PartTriple = tuple[int, int, int]  # (r, k_r, eps_r)


@dataclass(frozen=True)
class NormalForm:
    family: Family
    n: int
    parts: tuple[PartTriple, ...]

    def words(self) -> list[list[int]]:
        return [part_word(self.family, self.n, r, k, eps) for r, k, eps in self.parts]

    def word(self) -> list[int]:
        return [i for part in self.words() for i in part]

    def __str__(self) -> str:
        return format_normal_form(self)


def part_word(family: Family | str, n: int, r: int, k: int, eps: int) -> list[int]:
    """The generator string of the ``r``-th part with bound ``k`` and shape ``eps``."""
    family = check_rank(family, n)
    if eps == 0:
        return []
    if not 1 <= r <= n or not n - r + 1 <= k <= n or eps not in (1, 2):
        raise ValueError(f"invalid part (r={r}, k={k}, eps={eps}) for rank {n}")
    if family is Family.A:
        # s_r s_{r-1} ... s_{n-k+1}
        return list(range(r, n - k, -1))
    a = n - r + 1
    if family is Family.C:
        if eps == 1:
            return list(range(a, k + 1))
        if k == n:
            raise ValueError("C part with eps=2 needs k < n (k = n is the eps=1 string)")
        return list(range(a, n + 1)) + list(range(n - 1, k - 1, -1))
    # type D
    if eps == 1:
        if k < n:
            return list(range(a, k + 1))
        # s_a ... s_{n-2} s_n, the branch that skips s_{n-1}
        return list(range(a, n - 1)) + [n]
    if k == n:
        raise ValueError("D part with eps=2 needs k < n")
    return list(range(a, n + 1)) + list(range(n - 2, k - 1, -1))


@lru_cache(maxsize=None)
def part_choices(family: Family, n: int, r: int) -> tuple[PartTriple, ...]:
    """All admissible (r, k, eps) triples for part ``r``, the empty part first.

    Each nonempty choice is a minimal right coset representative of the
    subgroup generated by the letters of parts ``1..r-1`` inside the subgroup
    generated by the letters of parts ``1..r``.
    """
    family = check_rank(family, n)
    out: list[PartTriple] = [(r, n, 0)]
    lo = n - r + 1
    if family is Family.A:
        out += [(r, k, 1) for k in range(lo, n + 1)]
    elif family is Family.C:
        out += [(r, k, 1) for k in range(lo, n + 1)]
        out += [(r, k, 2) for k in range(lo, n)]
    else:
        if r == 1:
            out.append((r, n, 1))
        elif r == 2:
            out.append((r, n - 1, 1))
        else:
            out += [(r, k, 1) for k in range(lo, n + 1)]
            out += [(r, k, 2) for k in range(lo, n)]
    return tuple(out)


def _in_part_subgroup(u: SignedPermutation, m: int) -> bool:
    """Whether ``u`` lies in the subgroup generated by the letters of parts 1..m."""
    n, fam = u.n, u.family
    if fam is Family.A:
        fixed = range(m + 1, n + 1)
    elif fam is Family.D and m <= 1:
        if m == 0:
            return u.is_identity
        return u.is_identity or u == simple_reflection(fam, n, n)
    else:
        fixed = range(0, n - m)
    return all(u.cols[c] == c and u.signs[c] == 1 for c in fixed)


def normal_form(w: SignedPermutation) -> NormalForm:
    """Factor ``w`` as part_1 part_2 ... part_n by peeling parts off the right."""
    fam, n = w.family, w.n
    parts: list[PartTriple] = []
    cur = w
    for r in range(n, 0, -1):
        for triple in part_choices(fam, n, r):
            piece = word_to_element(fam, n, part_word(fam, n, *triple))
            u = multiply(cur, piece.inverse())
            if _in_part_subgroup(u, r - 1):
                parts.append(triple)
                cur = u
                break
        else:  # pragma: no cover - the choices are a full set of coset representatives
            raise RuntimeError(f"no part {r} found for {w}")
    return NormalForm(fam, n, tuple(reversed(parts)))


def reconstruct(nf: NormalForm) -> SignedPermutation:
    return word_to_element(nf.family, nf.n, nf.word())


def all_elements(family: Family | str, n: int) -> Iterator[NormalForm]:
    """Every normal form, in lexicographic order of part choices."""
    family = check_rank(family, n)
    choices = [part_choices(family, n, r) for r in range(1, n + 1)]
    for combo in itertools.product(*choices):
        yield NormalForm(family, n, tuple(combo))


# --- parabolic quotients ---------------------------------------------------

def parabolic_subset(family: Family | str, n: int, m: int) -> frozenset[int]:
    """The simple-root subset S_m: {1..m-1} for A, {n-m+2..n} for C."""
    family = check_rank(family, n)
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in 1..{n}, got {m}")
    if family is Family.A:
        return frozenset(range(1, m))
    if family is Family.C:
        return frozenset(range(n - m + 2, n + 1))
    raise ValueError("the subsets S_m are only defined for families A and C")


def is_min_coset_rep(w: SignedPermutation, S: Iterable[int]) -> bool:
    ell = length(w)
    for a in S:
        if not 1 <= a <= w.n:
            raise ValueError(f"root index {a} out of range 1..{w.n}")
        if length(multiply(simple_reflection(w.family, w.n, a), w)) <= ell:
            return False
    return True


def min_coset_reps(family: Family | str, n: int, S: Iterable[int]) -> list[SignedPermutation]:
    S = list(S)
    return [w for w in bfs_lengths(family, n) if is_min_coset_rep(w, S)]


# --- text formats ----------------------------------------------------------

def parse_word(text: str) -> list[int]:
    """Parse ``"1 2 3 4 2"``; column positions are reported on failure."""
    word = []
    pos = 0
    for tok in text.split():
        col = text.index(tok, pos)
        pos = col + len(tok)
        try:
            word.append(int(tok))
        except ValueError:
            raise ValueError(f"line 1, column {col + 1}: bad generator index {tok!r}") from None
    return word


def format_word(word: Sequence[int]) -> str:
    return " ".join(str(i) for i in word)


def parse_normal_form(family: Family | str, n: int, text: str) -> NormalForm:
    family = check_rank(family, n)
    triples = []
    col = 0
    for chunk in text.split(";"):
        if chunk.strip():
            try:
                r, k, eps = (int(x) for x in chunk.split(","))
            except ValueError:
                raise ValueError(
                    f"line 1, column {col + 1}: expected 'r,k,eps', got {chunk.strip()!r}"
                ) from None
            if eps == 0:
                k = n
            if (r, k, eps) not in part_choices(family, n, r) if 1 <= r <= n else True:
                raise ValueError(f"line 1, column {col + 1}: ({r},{k},{eps}) is not an admissible part")
            triples.append((r, k, eps))
        col += len(chunk) + 1
    seen = {t[0] for t in triples}
    parts = [next((t for t in triples if t[0] == r), (r, n, 0)) for r in range(1, n + 1)]
    if len(seen) != len(triples) or not seen <= set(range(1, n + 1)):
        raise ValueError("each part index r may appear at most once and must lie in 1..n")
    return NormalForm(family, n, tuple(parts))


def format_normal_form(nf: NormalForm) -> str:
    return ";".join(f"{r},{k},{eps}" for r, k, eps in nf.parts)
