import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgk import gkdim, weyl
from qgk.corep import AlgebraSpec, unit_phase
from qgk.gkdim import Poly, estimate_degree


@settings(max_examples=60, deadline=None)
@given(ell=st.integers(0, 7), shift=st.integers(0, 4), scale=st.integers(1, 5))
def test_estimator_recovers_binomial_degree(ell, shift, scale):
    dims = [scale * comb(k + ell + shift, ell) for k in range(13)]
    dims[0] = 1
    est = estimate_degree(dims)
    assert est.rounded == ell


def test_estimator_on_known_growth():
    c2 = [(k + 1) * (k + 2) ** 2 * (k + 3) // 12 for k in range(13)]
    assert estimate_degree(c2).rounded == 4
    assert estimate_degree([1] * 13).rounded == 0
    with pytest.raises(ValueError):
        estimate_degree([1, 2, 3, 4])


def test_bounds_helpers():
    assert gkdim.binomial_lower_bound(3, 2) == comb(4, 2)
    assert gkdim.binomial_lower_bound(0, 0) == 1
    assert gkdim.power_upper_bound(2, 3) == 16
    dims = [comb(k + 2, 2) for k in range(9)]
    assert gkdim.check_bounds(dims, 2, 1) == []
    assert gkdim.check_bounds([1, 5, 4], 1, 1)


def test_d4_vertex_map():
    m = gkdim.path_map("D", 4, [1, 2, 3, 4, 2])
    assert {k: m(k) for k in range(2, 8)} == {2: 1, 3: 3, 4: 5, 5: 4, 6: 6, 7: 8}


@pytest.mark.parametrize("fam,n", [("A", 2), ("A", 3), ("C", 2), ("C", 3)])
def test_unique_paths_every_part(fam, n):
    spec = AlgebraSpec(fam, n, 0.5)
    for nf in weyl.all_elements(fam, n):
        for i, part in enumerate(nf.words()):
            checks = gkdim.verify_unique_path(spec, part, i)
            assert all(c.ok for c in checks), [c for c in checks if not c.ok]


def test_part_operators_match_rank_i_module():
    spec = AlgebraSpec("C", 3, 0.5)
    nf = weyl.normal_form(weyl.word_to_element("C", 3, [3, 2, 3, 1, 2, 3]))
    for i in (1, 2):
        checks = gkdim.verify_part_operators(spec, nf, i)
        assert checks and all(c.ok for c in checks)


@pytest.mark.parametrize("fam,n", [("A", 3), ("C", 3), ("D", 4)])
def test_last_part_sigma_is_a_permutation(fam, n):
    for nf in weyl.all_elements(fam, n):
        part = nf.words()[-1]
        if not part:
            continue
        polys, sigma = gkdim.last_part_polys(fam, n, part)
        assert sorted(sigma) == list(range(1, len(part) + 1))
        assert len(polys) == len(part)


@pytest.mark.parametrize("fam,n,word", [
    ("A", 2, [1, 2, 1]),
    ("C", 2, [1, 2, 1, 2]),
    ("C", 3, [3, 2, 3, 1, 2, 3]),
    ("D", 4, [1, 2, 3, 4, 2]),
    ("D", 4, [4, 3, 2, 3, 4, 1, 2]),
])
def test_hitting_certificate(fam, n, word):
    spec = AlgebraSpec(fam, n, 0.5, t=tuple(unit_phase(0.2 * j + 0.1) for j in range(n)))
    nf = weyl.normal_form(weyl.word_to_element(fam, n, word))
    cert = gkdim.hitting_polynomials(spec, nf)
    assert cert.ok, cert.summary()["failures"]
    assert cert.grid_size >= min(500, 4 ** len(word))
    assert sum(len(pc.slots) for pc in cert.parts) == len(word)
    if fam != "D":
        assert all(pc.source == "lemma" for pc in cert.parts)


def test_certificate_detects_a_wrong_polynomial():
    spec = AlgebraSpec("A", 2, 0.5)
    nf = weyl.normal_form(weyl.word_to_element("A", 2, [1, 2, 1]))
    cert = gkdim.hitting_polynomials(spec, nf)
    bad = gkdim.Certificate([gkdim.PartCertificate(pc.part, pc.slots, list(reversed(pc.polys)), pc.sigma, "lemma")
                             for pc in cert.parts], cert.M0)
    action = gkdim.word_action(spec.with_(cutoff=6), nf.word(), check_reduced=False)
    apply = gkdim._PolyApplier(action, spec.q, 6)
    gkdim._check_grid(bad, apply, apply.exact(), 3, 3, 500, np.random.default_rng(0))
    assert not bad.ok


def test_commutator_degree():
    p = Poly(((4, 3), (4, 2)))
    assert p.degree == 2 and str(p) == "[u[4,3],u[4,2]]"


def test_identity_report():
    r = gkdim.gk_report(AlgebraSpec("A", 2, cutoff=10), [], 6)
    assert r.pass_ and r.estimate.rounded == 0 and r.series.dims == [1] * 7


def test_su2_report():
    r = gkdim.gk_report(AlgebraSpec("A", 1, cutoff=16), [1], 12)
    assert r.pass_ and r.series.dims == list(range(1, 14))
    d = r.as_dict()
    for key in ("family", "rank", "word", "length", "q", "cutoff", "dims", "slope", "estimated_gkdim",
                "target", "certificate", "quotient_m", "pass"):
        assert key in d
    assert {"M0", "checks_passed", "checks_failed"} <= set(d["certificate"])


def test_report_json_is_deterministic():
    spec = AlgebraSpec("C", 2, 0.5, t=(unit_phase(0.3), unit_phase(0.8)), cutoff=12)
    a = gkdim.gk_report(spec, [2, 1, 2], 8, seed=3).to_json()
    b = gkdim.gk_report(spec, [2, 1, 2], 8, seed=3).to_json()
    assert a == b
    assert json.loads(a)["estimated_gkdim"] == 3


def test_report_csv():
    r = gkdim.gk_report(AlgebraSpec("A", 1, cutoff=10), [1], 5, certificate=False)
    assert r.to_csv().splitlines()[:3] == ["k,dim", "0,1", "1,2"]


def test_quotient_errors():
    with pytest.raises(gkdim.QuotientError):
        gkdim.gk_report(AlgebraSpec("D", 4), [1], 4, quotient_m=2)
    with pytest.raises(gkdim.QuotientError):
        # s_1 is not a minimal coset representative for S_2 = {1}
        gkdim.gk_report(AlgebraSpec("A", 3), [1], 4, quotient_m=2)


def test_quotient_dims_below_full():
    spec = AlgebraSpec("A", 3, cutoff=12)
    word = [2, 3, 1]
    full = gkdim.growth_series(spec, word, 8).dims
    quot = gkdim.gk_report(spec, word, 8, quotient_m=2)
    assert quot.pass_
    assert all(a <= b for a, b in zip(quot.series.dims, full))


def test_non_reduced_report():
    with pytest.raises(ValueError):
        gkdim.gk_report(AlgebraSpec("A", 2), [1, 1], 4)


def test_rule_mismatches_are_reported_not_hidden():
    # the traced vertex map is the reference; the case rules are compared against it
    out = []
    for nf in weyl.all_elements("A", 3):
        out += gkdim.rule_mismatches(nf)
    assert out == []
