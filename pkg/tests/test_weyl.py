import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgk import weyl
from qgk.weyl import Family

GROUPS = [("A", 1), ("A", 2), ("A", 3), ("C", 2), ("C", 3), ("D", 4)]
ORDERS = {("A", 1): 2, ("A", 2): 6, ("A", 3): 24, ("C", 2): 8, ("C", 3): 48, ("D", 4): 192}


def window(w: weyl.SignedPermutation) -> list[int]:
    """Signed window notation with positions relabelled so that the sign generator acts at position 1."""
    n = len(w.cols)
    out = [0] * n
    for i, (j, s) in enumerate(zip(w.cols, w.signs)):
        # e_j goes to s * e_i
        out[n - 1 - j] = s * (n - i)
    return out


def textbook_length(w: weyl.SignedPermutation) -> int:
    u = window(w)
    inv = sum(1 for a, b in itertools.combinations(range(len(u)), 2) if u[a] > u[b])
    if w.family is Family.A:
        return inv
    if w.family is Family.C:
        return inv - sum(x for x in u if x < 0)
    return inv - sum(x + 1 for x in u if x < 0)


@pytest.mark.parametrize("fam,n", GROUPS)
def test_bfs_matches_closed_forms(fam, n):
    dist = weyl.bfs_lengths(fam, n)
    assert len(dist) == ORDERS[(fam, n)]
    for w, d in dist.items():
        assert weyl.length(w) == d
        assert textbook_length(w) == d


@pytest.mark.parametrize("fam,n", GROUPS)
def test_normal_forms_enumerate_the_group(fam, n):
    elems = [weyl.reconstruct(nf) for nf in weyl.all_elements(fam, n)]
    assert len(elems) == ORDERS[(fam, n)]
    assert len(set(elems)) == len(elems)


@pytest.mark.parametrize("fam,n", GROUPS)
def test_normal_form_words_are_reduced(fam, n):
    for nf in weyl.all_elements(fam, n):
        w = weyl.reconstruct(nf)
        assert weyl.is_reduced(fam, n, nf.word())
        assert weyl.normal_form(w) == nf


def words(fam, n, max_len=10):
    return st.lists(st.integers(1, n), max_size=max_len)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), group=st.sampled_from(GROUPS))
def test_normal_form_round_trip(data, group):
    fam, n = group
    word = data.draw(words(fam, n))
    w = weyl.word_to_element(fam, n, word)
    nf = weyl.normal_form(w)
    assert weyl.reconstruct(nf) == w
    assert len(nf.word()) == weyl.length(w)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), group=st.sampled_from(GROUPS))
def test_length_changes_by_one(data, group):
    fam, n = group
    w = weyl.word_to_element(fam, n, data.draw(words(fam, n)))
    i = data.draw(st.integers(1, n))
    s = weyl.simple_reflection(fam, n, i)
    assert abs(weyl.length(w * s) - weyl.length(w)) == 1
    assert abs(weyl.length(s * w) - weyl.length(w)) == 1


@settings(max_examples=40, deadline=None)
@given(data=st.data(), group=st.sampled_from(GROUPS))
def test_reduced_word_is_reduced(data, group):
    fam, n = group
    w = weyl.word_to_element(fam, n, data.draw(words(fam, n)))
    rw = weyl.reduced_word(w)
    assert weyl.word_to_element(fam, n, rw) == w
    assert len(rw) == weyl.length(w)


@pytest.mark.parametrize("fam,n", GROUPS)
def test_simple_reflections_are_involutions(fam, n):
    e = weyl.identity(fam, n)
    for i in range(1, n + 1):
        s = weyl.simple_reflection(fam, n, i)
        assert s * s == e
        assert weyl.length(s) == 1


def test_braid_relations():
    # type D: s_n commutes with s_{n-1} and braids with s_{n-2}
    D = lambda w: weyl.word_to_element("D", 4, w)
    assert D([3, 4]) == D([4, 3])
    assert D([2, 4, 2]) == D([4, 2, 4])
    C = lambda w: weyl.word_to_element("C", 2, w)
    assert C([1, 2, 1, 2]) == C([2, 1, 2, 1])


def test_d4_diagram_word():
    w = weyl.word_to_element("D", 4, [1, 2, 3, 4, 2])
    assert weyl.length(w) == 5
    nf = weyl.normal_form(w)
    assert nf.parts[3] == (4, 2, 2)
    assert all(eps == 0 for _, _, eps in nf.parts[:3])


def test_identity_and_non_reduced():
    assert weyl.length(weyl.word_to_element("A", 2, [])) == 0
    assert not weyl.is_reduced("A", 2, [1, 1])
    assert weyl.is_reduced("A", 2, [1, 2, 1])


@pytest.mark.parametrize("fam,n", [("A", 2), ("A", 3), ("C", 2), ("C", 3)])
def test_min_coset_reps_brute_force(fam, n):
    dist = weyl.bfs_lengths(fam, n)
    gens = {i: weyl.simple_reflection(fam, n, i) for i in range(1, n + 1)}
    for m in range(1, n + 1):
        S = weyl.parabolic_subset(fam, n, m)
        reps = weyl.min_coset_reps(fam, n, S)
        brute = [w for w in dist if all(dist[gens[a] * w] > dist[w] for a in S)]
        assert set(reps) == set(brute)
        # one representative per coset of the parabolic subgroup of order |W_S|
        sub = {weyl.identity(fam, n)}
        frontier = list(sub)
        while frontier:
            u = frontier.pop()
            for a in S:
                v = gens[a] * u
                if v not in sub:
                    sub.add(v)
                    frontier.append(v)
        assert len(reps) * len(sub) == len(dist)


def test_parabolic_subset_definitions():
    assert weyl.parabolic_subset("A", 3, 2) == frozenset({1})
    assert weyl.parabolic_subset("A", 3, 1) == frozenset()
    assert weyl.parabolic_subset("C", 3, 2) == frozenset({3})
    with pytest.raises(ValueError):
        weyl.parabolic_subset("D", 4, 2)


def test_parse_word_reports_column():
    assert weyl.parse_word(" 1 2  3") == [1, 2, 3]
    assert weyl.parse_word("") == []
    with pytest.raises(ValueError, match="column 5"):
        weyl.parse_word("1 2 x")


def test_parse_normal_form():
    nf = weyl.parse_normal_form("D", 4, "4,2,2")
    assert nf.word() == [1, 2, 3, 4, 2]
    nf = weyl.normal_form(weyl.word_to_element("C", 2, [1, 2, 1]))
    assert weyl.parse_normal_form("C", 2, weyl.format_normal_form(nf)) == nf
    with pytest.raises(ValueError, match="column"):
        weyl.parse_normal_form("A", 2, "1,2")
    with pytest.raises(ValueError, match="not an admissible part"):
        weyl.parse_normal_form("A", 2, "1,5,1")
    with pytest.raises(ValueError):
        weyl.parse_normal_form("A", 2, "2,2,1;2,1,1")


def test_rank_validation():
    with pytest.raises(ValueError):
        weyl.check_rank("D", 1)
    with pytest.raises(ValueError):
        weyl.simple_reflection("A", 2, 3)
    with pytest.raises(ValueError):
        weyl.check_rank("B", 2)
