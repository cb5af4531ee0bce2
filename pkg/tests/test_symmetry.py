"""Determining systems, exact ansatz solutions, and profile constraints.

The reference tables shipped under curlsym/fixtures are the comparison
targets throughout: the fourteen-equation determining system, the expanded
residual displays, and the generator bases of sizes 10 and 7.
"""

import random
from fractions import Fraction

import pytest

from curlsym import fixtures as fx
from curlsym import ratlin
from curlsym import symmetry as sy
from curlsym.expr import (
    ExprError,
    JET_SYMBOLS,
    S,
    as_ratform,
    monomial_expr,
    normalize,
    parse,
    substitute,
    _poly_key,
)
from curlsym.jet import GeneratorField


def _curl_formal():
    return sy.curl_system(None)


# --- determining system -------------------------------------------------------


def test_formal_determining_system_size_and_rank():
    eqs = sy.determining_polys(_curl_formal())
    assert len(eqs) == 15
    # one linear dependency: the system spans a 14-dimensional space
    index = sy._mono_sort_index(eqs)
    assert ratlin.rank(sy._vectorize(eqs, index)) == 14


def test_determining_system_matches_reference_modulo_identities():
    computed = sy.determining_system(_curl_formal())
    rep = sy.determining_systems_equivalent(
        computed, fx.load_determining_fixture()
    )
    assert rep.identity_spans_match
    assert rep.reduced_spans_match
    assert rep.ok


def test_equivalence_rejects_a_tampered_reference():
    ref = list(fx.load_determining_fixture())
    ref[0] = ref[0] + S.u * S.f  # no longer a consequence of the system
    rep = sy.determining_systems_equivalent(
        sy.determining_system(_curl_formal()), ref
    )
    assert not rep.ok


def test_gradient_identities_are_among_the_equations():
    keys = {_poly_key(p) for p in sy.determining_polys(_curl_formal())}
    for ident in sy.GRADIENT_IDENTITIES:
        assert _poly_key(as_ratform(ident).num.monic()) in keys


def test_restricted_residuals_match_reference_displays():
    computed = [
        as_ratform(r).num
        for r in sy.invariance_residuals(_curl_formal(), sy.generic_generator())
    ]
    refs = fx.load_restricted_residuals()
    corr = fx.load_residual_corrections()
    assert set(corr) == {1}  # exactly one documented omission
    for k in range(3):
        ref_poly = as_ratform(refs[k]).num
        if (k + 1) in corr:
            ref_poly = ref_poly + as_ratform(corr[k + 1]).num
        assert _poly_key(computed[k]) == _poly_key(ref_poly)


def test_both_systems_annihilate_every_reference_generator():
    computed = sy.determining_system(_curl_formal())
    ref = fx.load_determining_fixture()
    for gen in fx.load_basis(10):
        assert sy.annihilates(computed, gen, S.R)
        assert sy.annihilates(ref, gen, S.R)


def test_annihilation_fails_for_a_non_symmetry():
    bad = GeneratorField(parse("1"), parse("0"), parse("0"),
                         parse("0"), parse("0"), parse("u"))
    assert not sy.annihilates(fx.load_determining_fixture(), bad, S.R)


def _random_combination(rng, basis):
    combo = None
    for gen in basis:
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        if c == 0:
            continue
        term = gen.scale(parse(str(c)))
        combo = term if combo is None else combo + term
    return combo


def test_random_rational_combinations_annihilate_both_systems():
    rng = random.Random(7)
    formal = sy.determining_system(_curl_formal())
    solenoidal = sy.determining_system(sy.blair_system(S.R))
    b10, b7 = fx.load_basis(10), fx.load_basis(7)
    for _ in range(25):
        combo = _random_combination(rng, b10)
        assert combo is not None
        assert sy.annihilates(formal, combo, S.R)
    for _ in range(25):
        combo = _random_combination(rng, b7)
        assert combo is not None
        assert sy.annihilates(solenoidal, combo)


def test_random_fields_outside_the_span_fail_annihilation():
    rng = random.Random(11)
    formal = sy.determining_system(_curl_formal())
    b10 = fx.load_basis(10)
    monos = sy.monomials_up_to(2, (S.x, S.y, S.z, S.u, S.v, S.w))
    rejected = 0
    while rejected < 50:
        coeffs = [parse("0")] * 6
        for _ in range(3):
            c = rng.randint(-3, 3)
            if c == 0:
                continue
            slot = rng.randrange(6)
            mono = monos[rng.randrange(len(monos))]
            coeffs[slot] = coeffs[slot] + parse(str(c)) * monomial_expr(mono)
        gen = GeneratorField(*coeffs)
        if sy.coordinates_in_basis(b10, gen) is not None:
            continue  # rare span hit (includes the all-zero draw)
        assert not sy.annihilates(formal, gen, S.R)
        rejected += 1


# --- exact polynomial ansatz --------------------------------------------------


def test_ansatz_dimension_ten_and_span():
    res = sy.solve_polynomial_ansatz(sy.curl_system(S.R), 2)
    assert len(res.generators) == 10
    assert sy.generator_spans_equal(res.generators, fx.load_basis(10))


def test_ansatz_from_reference_equations_agrees():
    res = sy.solve_ansatz_from_equations(
        fx.load_determining_fixture(), 2, f_value=S.R
    )
    assert len(res.generators) == 10
    assert sy.generator_spans_equal(res.generators, fx.load_basis(10))


def test_divergence_constrained_ansatz_dimension_seven():
    res = sy.solve_polynomial_ansatz(sy.blair_system(S.R), 2)
    assert len(res.generators) == 7
    assert sy.generator_spans_equal(res.generators, fx.load_basis(7))


def test_degree_zero_ansatz_is_translations():
    res = sy.solve_polynomial_ansatz(sy.blair_system(S.R), 0)
    assert len(res.generators) == 3
    want = [fx.load_basis(7)[k] for k in (3, 4, 5)]
    assert sy.generator_spans_equal(res.generators, want)


def test_coordinates_in_basis_roundtrip():
    b10 = fx.load_basis(10)
    combo = b10[0].scale(parse("3")) + b10[7].scale(parse("-1/2"))
    coords = sy.coordinates_in_basis(b10, combo)
    assert coords is not None
    want = [Fraction(0)] * 10
    want[0], want[7] = Fraction(3), Fraction(-1, 2)
    assert list(coords) == want
    # something outside the span has no coordinates
    outside = GeneratorField(parse("x^2*y"), parse("0"), parse("0"),
                             parse("0"), parse("0"), parse("0"))
    assert sy.coordinates_in_basis(b10, outside) is None


@pytest.mark.parametrize("make_system", [sy.curl_system, sy.blair_system])
def test_every_ansatz_generator_passes_verification(make_system):
    system = make_system(S.R)
    res = sy.solve_polynomial_ansatz(system, 2)
    for gen in res.generators:
        report = sy.verify_generator(system, gen)
        assert report.ok and report.failures() == []


def test_nullspace_dimension_matches_an_independent_elimination():
    # Rebuild the constraint matrix a second way: substitute one unit field
    # per (coefficient, monomial) slot into the determining equations and
    # stack the resulting coefficient vectors, then row-reduce exactly.
    for make_system, degree, want in (
        (sy.curl_system, 1, 7),
        (sy.blair_system, 0, 3),
    ):
        system = make_system(S.R)
        res = sy.solve_polynomial_ansatz(system, degree)
        assert len(res.generators) == want
        equations = sy.determining_system(system)
        monos = sy.monomials_up_to(degree, (S.x, S.y, S.z, S.u, S.v, S.w))
        slots = [(ci, m) for ci in range(6) for m in monos]
        assert res.slots == slots
        per_slot = []
        index: dict = {}
        for ci, mono in slots:
            coeffs = [parse("0")] * 6
            coeffs[ci] = monomial_expr(mono)
            sub = sy.formal_substitution(GeneratorField(*coeffs))
            cells = {}
            for ei, eq in enumerate(equations):
                p = normalize(substitute(eq, sub))
                for rm, rc in p.terms.items():
                    cells[(ei, rm)] = rc
            for key in cells:
                index.setdefault(key, len(index))
            per_slot.append(cells)
        matrix = [[Fraction(0)] * len(index) for _ in slots]
        for row, cells in zip(matrix, per_slot):
            for key, c in cells.items():
                row[index[key]] = c
        assert len(res.generators) == len(slots) - ratlin.rank(matrix)


# --- generator verification ---------------------------------------------------


def test_verify_generator_accepts_the_quadratic_symmetry():
    b10 = fx.load_basis(10)
    report = sy.verify_generator(sy.curl_system(S.R), b10[7])
    assert report.ok and report.failures() == []


def test_verify_generator_rejects_quadratics_on_divergence_system():
    blair = sy.blair_system(S.R)
    for k in (7, 8, 9):
        report = sy.verify_generator(blair, fx.load_basis(10)[k])
        assert not report.ok
        # the divergence residual (index 3) is among the failures
        assert 3 in report.failures()


def test_verify_generator_rejects_non_symmetry():
    bad = GeneratorField(parse("0"), parse("0"), parse("0"),
                         parse("0"), parse("0"), parse("1"))
    assert not sy.verify_generator(sy.curl_system(S.R), bad).ok


def test_maximal_rank():
    assert sy.maximal_rank_check(sy.curl_system(S.R), 10) == 3
    assert sy.maximal_rank_check(sy.blair_system(S.R), 10) == 4
    assert sy.maximal_rank_check(_curl_formal(), 10) == 3


def test_maximal_rank_single_equation():
    # one residual u_x = 0: rank 1 everywhere
    system = sy.PdeSystem(
        name="single",
        residuals=(S.u_x,),
        eliminate={S.u_x: parse("0")},
        free_jets=tuple(j for j in JET_SYMBOLS if j is not S.u_x),
        f_value=parse("0"),
    )
    assert sy.maximal_rank_check(system, 5) == 1


# --- profile constraints ------------------------------------------------------


def _reference_constraints():
    return [
        parse("u*f_u + v*f_v + w*f_w - f"),
        parse("u*f_v - v*f_u"),
        parse("u*f_w - w*f_u"),
        parse("v*f_w - w*f_v"),
    ]


def test_profile_constraints_from_the_seven_generator_group():
    got = sy.f_constraints_from_group(fx.load_basis(7))
    want = _reference_constraints()
    assert {_poly_key(normalize(c)) for c in got} == {
        _poly_key(normalize(c)) for c in want
    }


def test_profile_verification():
    cons = _reference_constraints()
    assert sy.verify_f(cons, S.R)
    assert sy.verify_f(cons, parse("2*R"))
    assert not sy.verify_f(cons, S.u)
    assert not sy.verify_f(cons, parse("1"))
    assert not sy.verify_f(cons, parse("u^2 + v^2 + w^2"))


@pytest.mark.parametrize("degree", [2, 3])
def test_profile_family_is_one_dimensional(degree):
    family = sy.solve_f_family(_reference_constraints(), degree)
    assert len(family) == 1
    assert _poly_key(normalize(family[0])) == _poly_key(normalize(S.R))


def test_decompose_linear_rejects_quadratic_terms():
    with pytest.raises(ExprError):
        sy.decompose_linear(normalize(S.zeta * S.zeta), list(sy._SLOT_MAP))


def test_determining_polys_are_deterministic():
    a = sy.determining_polys(_curl_formal())
    b = sy.determining_polys(_curl_formal())
    assert [_poly_key(p) for p in a] == [_poly_key(p) for p in b]
