import json
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hgm.arith import prime_type
from hgm.errors import FixtureMismatchError, InvariantError, MissingDataError
from hgm.family import parse_family
from hgm.geometry import elliptic_ap, trinomial_model
from hgm.hodge import HodgeData, hodge_vector
from hgm.monodromy import drop_rank
from hgm.lseries import (
    FIXTURE, PARTIAL, EulerFactor, Fixture, TraceCache, assemble_palindromic, bad_primes,
    coeffs_from_traces, conductor, deligne_check, dirichlet_coefficients, export_motive,
    format_poly, frobenius_poly, gamma_factors, load_fixtures, local_data,
    newton_over_hodge_check, s_value, series_inverse, sigma_profile, tame_local,
    traces_from_coeffs, wild_local,
)
from hgm.util import poly_mul

from oracles import ordp, palindromic_poly

T32 = Fraction(3, 2)
Q0 = parse_family("[1,2,8];[3,12]")
Q1 = parse_family("[1,1,8];[3,12]")
Q5 = parse_family("[1,1,1,1,1,1];[3,3,3]")
LEGENDRE = parse_family("[1,1];[2,2]")
QUINTIC = parse_family("[1,1,1,1,1];[2,2,2,2,2]")


def test_q0_factors():
    assert frobenius_poly(Q0, T32, 5).coeffs == (1, -1, 0, 0, 0, -1, 1)
    assert frobenius_poly(Q0, T32, 7).coeffs == (1, 0, 0, 0, 0, 0, -1)


def test_q1_leading_coefficients():
    assert frobenius_poly(Q1, T32, 5).coeffs[:4] == (1, 1, 6, 16)
    assert frobenius_poly(Q1, T32, 7).coeffs[:4] == (1, -2, 12, -28)


def test_q5_leading_coefficients():
    assert frobenius_poly(Q5, T32, 5).coeffs[:4] == (1, -9, 5 * 156, -5 ** 3 * 2556)
    assert frobenius_poly(Q5, T32, 7).coeffs[:4] == (1, 12, 7 * 888, 7 ** 3 * 1816)


def test_mod_two_congruence():
    for p in (5, 7):
        polys = [frobenius_poly(par, T32, p).coeffs for par in (Q0, Q1, Q5)]
        for a, b in zip(polys, polys[1:]):
            assert [x % 2 for x in a] == [x % 2 for x in b]


def test_newton_over_hodge_bounds():
    f = frobenius_poly(Q5, T32, 5).coeffs
    res = newton_over_hodge_check(f, 5, hodge_vector(Q5))
    assert res["ok"] and res["bounds"] == [0, 0, 1, 3, 6, 10, 15]
    assert newton_over_hodge_check((1, 3, 2), 5, (2,))["ok"]


def test_newton_over_hodge_negative_control():
    f = list(frobenius_poly(Q5, T32, 5).coeffs)
    f[3] += 1
    res = newton_over_hodge_check(f, 5, hodge_vector(Q5))
    assert not res["ok"] and res["failures"] == [3]


def test_deligne_check():
    for p in (5, 7):
        for par in (Q0, Q1, Q5):
            f = frobenius_poly(par, T32, p).coeffs
            assert deligne_check(f, p, [hodge_vector(par).w]) < 1e-9
    with pytest.raises(InvariantError):
        deligne_check((1, 1, 1), 5, [1])
    # repeated roots are fine
    assert deligne_check(poly_mul([1, -5, 25], [1, -5, 25]), 5, [2]) < 1e-9


def test_legendre_factors_match_elliptic():
    for p in sympy.primerange(3, 98):
        assert frobenius_poly(LEGENDRE, 2, p).coeffs == (1, -elliptic_ap(2, p), p)


REFLEXIVE = [
    ("[1,1,1,1,6];[2,2,2,2,3]", {5: (-18, 54), 7: (8, -88)}),
    ("[1,1,6,6];[2,2,3,3]", {5: (-6, -66), 7: (-16, 176)}),
    ("[6,6,6];[3,3,3]", {5: (-16, -16), 7: (-12, 12)}),
]


@pytest.mark.parametrize("text, table", REFLEXIVE)
def test_reflexive_factors_at_one(text, table):
    par = parse_family(text)
    for p, (a, b) in table.items():
        expected = poly_mul([1, -p * a, p ** 5], [1, -b, p ** 5])
        assert list(frobenius_poly(par, 1, p).coeffs) == expected


def _round_trip_case(n, p, w, eps, head):
    poly = palindromic_poly(n, p, w, [1] + head, eps)
    traces = traces_from_coeffs(poly, n)
    assert coeffs_from_traces(traces) == poly
    got, e_found, _ = assemble_palindromic(n, p, w, lambda e: traces[e - 1],
                                           eps=None if w % 2 == 0 else 1)
    assert got == poly
    return e_found


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.sampled_from([2, 3, 5, 7]), st.integers(0, 3),
       st.lists(st.integers(-30, 30), min_size=4, max_size=4), st.booleans())
def test_poly_trace_round_trip(half, p, w, head, negative):
    n = 2 * half
    eps = -1 if (negative and w % 2 == 0) else 1
    head = head[: half]
    if eps == -1:
        head[-1] = 0        # the middle coefficient of an eps = -1 palindrome vanishes
    _round_trip_case(n, p, w, eps, head)


def test_round_trip_odd_degree():
    poly = poly_mul([1, -5], palindromic_poly(4, 5, 2, [1, 3, 7]))
    traces = traces_from_coeffs(poly, 5)
    got, eps, _ = assemble_palindromic(5, 5, 2, lambda e: traces[e - 1])
    assert got == poly and eps == -1


def test_series_inverse():
    assert series_inverse([1, -1], 4) == [1, 1, 1, 1, 1]
    assert series_inverse([1, 2, 3], 3) == [1, -2, 1, 4]


def test_format_poly():
    assert format_poly([1, -1, 0, 0, 0, -1, 1]) == "1 - x - x^5 + x^6"
    assert format_poly([1, 4, 96]) == "1 + 4*x + 96*x^2"


# ---------------------------------------------------------------------------
# tame and wild local data

def test_quintic_at_two_to_ten():
    t = Fraction(2 ** 10)
    c = conductor(QUINTIC, t, fixtures={})
    assert c.value == 1023 and c.exact
    assert {p: ld.c_p for p, ld in c.exponents.items()} == {2: 0, 3: 1, 11: 1, 31: 1}
    f2 = c.exponents[2].factor
    assert f2.coeffs == tuple(poly_mul([1, -4], [1, 5, 10, 80, 256]))
    prof = c.exponents[2].sigma_profile
    assert prof["k_crit"] == 10 and prof["sigma_0"] == 5 and prof["sigma_k"] == 5
    assert all(v == "computed" for v in c.flags.values())


def test_s_value():
    assert s_value(8, 2) == 5
    assert s_value(9, 3) == Fraction(7, 2)
    assert s_value(5, 2) == 1


def test_sigma_profile_consistency():
    for text in ("[1,1];[2,2]", "[18];[2,2,12]", "[1,1,1,1,1,1];[3,3,3]", "[-8,3,5]"):
        par = parse_family(text)
        for p in bad_primes(par, 1):
            if any(g % p == 0 for g in par.gamma):
                prof = sigma_profile(par, p)
                assert prof["sigma_inf"] - prof["sigma_0"] == prof["k_crit"]


def test_legendre_conductor():
    # y^2 = x(1-x)(x-2) has conductor 32
    c = conductor(LEGENDRE, 2)
    assert c.value == 32 and c.exact


def test_tame_rule_at_one_mod_p():
    par = parse_family("[-8,3,5]")   # weight 0, orthogonal
    for p in (7, 11, 13):
        assert tame_local(par, 1 + p, p).c_p == 1
        ld = tame_local(par, 1 + p * p, p)
        assert ld.c_p == 0 and ld.factor.provenance == PARTIAL
    quad = tame_local(QUINTIC, 1 + 7 ** 2, 7)
    assert quad.c_p == 0
    sym = tame_local(LEGENDRE, 1 + 5 ** 2, 5)
    assert sym.c_p == 1 and sym.factor.degree == 1


def test_tame_degree_only_factor():
    # after cancelling Phi_1 the zero side is {1, 3, 5}; only Phi_1 is fixed by h_0^2
    par = parse_family("[-8,3,5]")
    ld = tame_local(par, 7 ** 2 * 2, 7)
    assert ld.c_p == drop_rank(par, "zero", 2) == 6
    assert ld.factor.degree == 1 and not ld.factor.known


def _tame_oracle_grid():
    par = parse_family("[-8,3,5]")
    for p in (7, 11, 13):
        for k in range(-3, 4):
            for u in (Fraction(2), Fraction(3, 2), Fraction(-1), Fraction(1 + p), Fraction(1 + p * p)):
                t = Fraction(p) ** k * u
                if t == 1:
                    continue
                if k == 0 and ordp(t - 1, p) == 0:
                    continue
                yield par, p, k, t


def test_tame_conductor_against_newton_polygon():
    n = 0
    for par, p, k, t in _tame_oracle_grid():
        assert prime_type(par, t, p) == "tame"
        assert tame_local(par, t, p).c_p == trinomial_model(3, 5, t).disc_valuation(p), (p, t)
        n += 1
    assert n > 60


def test_wild_degenerate_needs_data():
    par = parse_family("[18];[2,2,12]")
    ld = wild_local(par, 1, 2, fixtures={})
    assert ld.c_p is None and not ld.factor.known
    with pytest.raises(MissingDataError):
        conductor(par, 1, fixtures={})


def test_fixture_regressions():
    c = conductor(parse_family("[18];[2,2,12]"), 1)
    assert c.value == 2 ** 6 * 3 ** 9
    assert c.exponents[2].factor.coeffs == (1, 2)
    assert c.exponents[3].factor.coeffs == (1,)
    assert c.flags == {2: FIXTURE, 3: FIXTURE}
    c = conductor(parse_family("[1,1,1,1,1,1,1,1];[3,3,3,3]"), 1)
    assert c.exponents[3].c_p == 9 and c.flags[3] == FIXTURE and c.value == 3 ** 9


def test_erased_divisor_without_fixture():
    par = parse_family("[1,1,1,1,8,8];[2,2,2,2,4,4,4,4]")
    ld = wild_local(par, 1, 2, fixtures={})
    assert ld.factor.known_divisor == (1, 4, 96, 512, 16384)


def test_fixture_with_one_coefficient():
    par = parse_family("[1,1,1,1,1,1,1,1,1,1,1];[2,2,2,2,2,2,2,2,2,4]")
    ld = local_data(par, 1, 2)
    assert ld.factor.coeffs == (1, 32) and ld.c_p == 11 and ld.c_source == FIXTURE


def test_fixture_mismatch_raises():
    key = (QUINTIC.key(), "1024", 2)
    wrong = {key: Fixture((1, 1), None, "test")}
    with pytest.raises(FixtureMismatchError):
        conductor(QUINTIC, 1024, fixtures=wrong)
    wrong_c = {key: Fixture(None, 3, "test")}
    with pytest.raises(FixtureMismatchError):
        conductor(QUINTIC, 1024, fixtures=wrong_c)
    par = parse_family("[1,1,1,1,8,8];[2,2,2,2,4,4,4,4]")
    bad_div = {(par.key(), "1", 2): Fixture((1, 3), 18, "test")}
    with pytest.raises(FixtureMismatchError):
        wild_local(par, 1, 2, fixtures=bad_div)


def test_load_fixtures_file(tmp_path):
    path = tmp_path / "fx.json"
    path.write_text(json.dumps({"version": 1, "fixtures": [
        {"param": "[1,1];[2,2]", "t": "2", "p": 2, "poly": [1], "c_p": 5, "source": "unit"}]}))
    table = load_fixtures(str(path))
    assert (LEGENDRE.key(), "2", 2) in table
    assert len(table) == len(load_fixtures()) + 1
    ld = local_data(LEGENDRE, 2, 2, fixtures=table)
    assert ld.c_p == 5 and ld.c_source == "computed"


def test_override_for_wild_prime():
    par = parse_family("[18];[2,2,12]")
    c = conductor(par, 1, overrides={2: Fixture((1, 2), 6, "manual")},
                  fixtures=load_fixtures())
    assert c.exponents[2].c_p == 6


def test_every_emitted_good_factor_passes_checks():
    for par, t in ((Q5, T32), (QUINTIC, Fraction(1024)), (LEGENDRE, Fraction(-1))):
        hd = hodge_vector(par)
        for p in sympy.primerange(3, 40):
            if prime_type(par, t, p) != "good":
                continue
            f = frobenius_poly(par, t, p).coeffs
            deligne_check(f, p, [hd.w])
            assert newton_over_hodge_check(f, p, hd)["ok"]


# ---------------------------------------------------------------------------
# gamma factors, Dirichlet series, export, cache

def test_gamma_factors():
    assert str(gamma_factors(HodgeData((1, 1), 1, 0))) == "Gamma_C(s)"
    gs = gamma_factors(HodgeData((1,) * 6, 5, 0))
    assert gs.factors == (("C", 0, 1), ("C", 1, 1), ("C", 2, 1))
    gs = gamma_factors(HodgeData((5,), 0, 0), sigma=1)
    assert gs.factors == (("R", -1, 2), ("R", 0, 3))
    assert gamma_factors(HodgeData((1, 2, 1), 2, 0)).dimension == 4
    with pytest.raises(Exception):
        gamma_factors(HodgeData((1, 3, 1), 2, 0))


def test_dirichlet_legendre():
    a = dirichlet_coefficients(LEGENDRE, 2, 100)
    assert a[0] == 1
    for p in sympy.primerange(3, 98):
        assert a[p - 1] == elliptic_ap(2, p)
    for m in range(2, 11):
        for n in range(2, 11):
            if sympy.gcd(m, n) == 1 and m * n <= 100:
                assert a[m * n - 1] == a[m - 1] * a[n - 1]


def test_dirichlet_parallel_matches(tmp_path):
    a = dirichlet_coefficients(QUINTIC, 1024, 60)
    b = dirichlet_coefficients(QUINTIC, 1024, 60, workers=2, cache=TraceCache(str(tmp_path)))
    assert a == b


def test_dirichlet_missing_factor():
    with pytest.raises(MissingDataError):
        dirichlet_coefficients(parse_family("[-8,3,5]"), 49 * 2, 10)


def test_export_schema():
    out = export_motive(QUINTIC, 1024, N_max=20)
    assert out["schema"] == "hgm/1"
    assert out["conductor"] == {"value": 1023, "exact": True, "factored": "3^1 * 11^1 * 31^1"}
    assert out["hodge"] == [1, 1, 1, 1, 1] and len(out["dirichlet"]) == 20
    json.dumps(out)


def test_trace_cache(tmp_path):
    cache = TraceCache(str(tmp_path))
    f = frobenius_poly(Q5, T32, 5, cache)
    lines = (tmp_path / "traces.txt").read_text().splitlines()
    assert lines and all(len(x.split("|")) == 5 for x in lines)
    again = TraceCache(str(tmp_path))
    assert again.get_trace(Q5, T32, 5, 1) == int(lines[0].split("|")[-1])
    assert frobenius_poly(Q5, T32, 5, again) == f
    with pytest.raises(InvariantError):
        again.put_trace(Q5, T32, 5, 1, again.get_trace(Q5, T32, 5, 1) + 1)
    again.put_trace(Q5, T32, 5, 1, again.get_trace(Q5, T32, 5, 1))
    with open(again.trace_path, "a") as fh:
        fh.write(lines[0] + "\n")
    again.put_factor(Q5, T32, 5, f.coeffs, 0, "computed")
    stats = TraceCache(str(tmp_path)).compact()
    assert stats["traces"] == len(set(lines))
    assert len((tmp_path / "traces.txt").read_text().splitlines()) == len(set(lines))


def test_euler_factor_validation():
    with pytest.raises(InvariantError):
        EulerFactor(5, (2, 1))
    assert EulerFactor(5, (1, 0, 0)).degree == 0
