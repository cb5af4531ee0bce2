"""Kernel tests: trees, normal forms, rewrites, parser/printer, numerics."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from curlsym import expr as E
from curlsym.expr import (
    EvalError,
    NotPolynomial,
    ParseError,
    REGISTRY,
    S,
    add,
    as_ratform,
    collect,
    compile_numeric,
    cos,
    decide_zero,
    differentiate,
    eval_numeric,
    exp,
    equal_exprs,
    free_symbols,
    is_zero_expr,
    monomial_key,
    mul,
    neg,
    normalize,
    parse,
    poly_sqrt,
    pow_,
    sin,
    sqrt,
    substitute,
    to_string,
    Num,
)


# --- tree construction -------------------------------------------------------


def test_float_rejected_everywhere():
    with pytest.raises(TypeError):
        S.x + 1.5
    with pytest.raises(TypeError):
        mul(S.x, 0.1)
    with pytest.raises(TypeError):
        substitute(S.x, {S.x: 2.5})


def test_constant_folding():
    assert add(1, 2, S.x) == add(S.x, 3)
    assert mul(2, 3) == Num(Fraction(6))
    assert mul(S.x, 0) == E.ZERO
    assert pow_(S.x, 0) == E.ONE
    assert pow_(pow_(S.x, 2), 3) == pow_(S.x, 6)
    assert (S.x / S.x) != E.ONE  # no tree-level cancellation, by design
    assert is_zero_expr(S.x / S.x - 1)


def test_structural_equality_is_not_semantic():
    e1 = add(S.x, S.y)
    e2 = add(S.y, S.x)
    assert e1 != e2
    assert equal_exprs(e1, e2)


def test_integer_powers_only():
    with pytest.raises(E.ExprError):
        pow_(S.x, Num(Fraction(1, 2)))


# --- normal form and rewrites ------------------------------------------------


def test_radical_square_rewrites():
    assert is_zero_expr(S.R ** 2 - (S.u ** 2 + S.v ** 2 + S.w ** 2))
    p = normalize(S.R ** 3)
    assert p == normalize(S.R * (S.u ** 2 + S.v ** 2 + S.w ** 2))


def test_unit_pair_rewrite():
    assert is_zero_expr(S.a ** 2 + S.b ** 2 - 1)
    assert not is_zero_expr(S.a ** 2 + S.b ** 2)


def test_sin_cos_square_rewrite():
    assert is_zero_expr(sin(S.z) ** 2 + cos(S.z) ** 2 - 1)
    assert is_zero_expr(sin(S.x + S.y) ** 2 + cos(S.x + S.y) ** 2 - 1)
    # different arguments stay independent
    assert not is_zero_expr(sin(S.x) ** 2 + cos(S.y) ** 2 - 1)


def test_sin_parity_canonicalization():
    assert is_zero_expr(sin(neg(S.z)) + sin(S.z))
    assert is_zero_expr(cos(neg(S.z)) - cos(S.z))


def test_exp_product_merges():
    assert is_zero_expr(exp(S.x) * exp(S.y) - exp(S.x + S.y))
    assert is_zero_expr(exp(S.x) * exp(neg(S.x)) - 1)
    assert is_zero_expr(exp(2 * S.x) - exp(S.x) ** 2)


def test_r_denominator_cleared_by_conjugation():
    e = S.u / S.R
    assert is_zero_expr(e * S.R - S.u)
    g = 1 / (1 + S.R)
    assert is_zero_expr(g * (1 + S.R) - 1)


def test_not_polynomial_reports_subtree():
    with pytest.raises(NotPolynomial):
        normalize(1 / S.x)


def test_collect_groups_by_jet_monomials():
    e = S.u_x * S.x + S.u_x * S.y + S.v_z ** 2 * S.z + 5
    got = collect(e, [S.u_x, S.v_z])
    assert set(got) == {
        (),
        monomial_key(S.u_x),
        monomial_key((S.v_z, 2)),
    }
    assert equal_exprs(got[monomial_key(S.u_x)], S.x + S.y)
    assert equal_exprs(got[monomial_key((S.v_z, 2))], S.z)
    assert equal_exprs(got[()], Num(Fraction(5)))


def test_poly_sqrt_polynomial_square():
    s = 1 + S.x ** 2 + S.y ** 2 + S.z ** 2
    r = poly_sqrt(normalize(s * s))
    assert r is not None
    assert r == normalize(s)


def test_poly_sqrt_with_exp_atoms():
    p = normalize(exp(-2 * S.eps) * (1 + S.x) ** 2)
    r = poly_sqrt(p)
    assert r is not None
    assert r == normalize(exp(neg(S.eps)) * (1 + S.x))


def test_sqrt_expression_with_radical_factor():
    assert is_zero_expr(sqrt(S.u ** 2 + S.v ** 2 + S.w ** 2) - S.R)
    assert is_zero_expr(sqrt(4 * (S.u ** 2 + S.v ** 2 + S.w ** 2)) - 2 * S.R)


def test_sqrt_without_exact_form_raises():
    with pytest.raises(NotPolynomial):
        normalize(sqrt(1 + S.x))


# --- derivatives -------------------------------------------------------------


def test_radical_derivative_rule():
    d = differentiate(S.R, S.u)
    assert is_zero_expr(d - S.u / S.R)
    assert is_zero_expr(differentiate(S.R, S.x))


def test_formal_function_rules():
    assert differentiate(S.f, S.u) is S.f_u
    assert is_zero_expr(differentiate(S.f, S.x))
    assert differentiate(S.zeta, S.w) is S.zeta_w


def test_chain_and_product_rules():
    d = differentiate(sin(S.x ** 2), S.x)
    assert is_zero_expr(d - 2 * S.x * cos(S.x ** 2))
    d2 = differentiate(S.x * exp(S.x), S.x)
    assert is_zero_expr(d2 - exp(S.x) * (1 + S.x))


def test_sqrt_derivative():
    e = sqrt(S.u ** 2 + S.v ** 2 + S.w ** 2)
    assert is_zero_expr(differentiate(e, S.u) - S.u / S.R)


# --- substitution ------------------------------------------------------------


def test_substitution_is_simultaneous():
    got = substitute(S.x + S.y, {S.x: S.y, S.y: S.x})
    assert equal_exprs(got, S.x + S.y)
    swapped = substitute(S.x - S.y, {S.x: S.y, S.y: S.x})
    assert equal_exprs(swapped, S.y - S.x)


def test_substitution_into_functions():
    got = substitute(sin(S.z), {S.z: S.z - S.eps})
    assert got == sin(S.z - S.eps)


# --- numeric evaluation ------------------------------------------------------


def test_eval_numeric_basic():
    val = eval_numeric(S.x ** 2 + sin(S.y), {S.x: 2.0, S.y: 0.5})
    assert abs(val - (4.0 + math.sin(0.5))) < 1e-15


def test_eval_radical_computed_from_components():
    val = eval_numeric(S.R, {S.u: 3.0, S.v: 4.0, S.w: 0.0})
    assert abs(val - 5.0) < 1e-15


def test_eval_unbound_symbol_raises():
    with pytest.raises(EvalError):
        eval_numeric(S.x + S.y, {S.x: 1.0})


def test_compile_matches_eval():
    e = S.u * cos(S.x) + S.R / (1 + S.w ** 2)
    fn = compile_numeric(e, [S.x, S.u, S.v, S.w])
    env = {S.x: 0.3, S.u: 1.0, S.v: -2.0, S.w: 0.7}
    assert abs(fn(0.3, 1.0, -2.0, 0.7) - eval_numeric(e, env)) < 1e-14


def test_decide_zero_modes():
    ok, mode = decide_zero(S.R ** 2 - S.u ** 2 - S.v ** 2 - S.w ** 2)
    assert ok and mode == "symbolic"
    ok, mode = decide_zero(S.x + 1)
    assert not ok and mode == "symbolic"
    ok, mode = decide_zero(sqrt(1 + S.x ** 2) - sqrt(1 + S.x ** 2) + S.x - S.x)
    assert ok and mode == "numeric"


# --- parser and printer ------------------------------------------------------


def test_parse_precedence():
    assert parse("x + y*z") == add(S.x, mul(S.y, S.z))
    assert parse("-x^2") == neg(pow_(S.x, 2))
    assert parse("-x*y") == mul(neg(S.x), S.y)
    assert parse("x - y - z") == add(add(S.x, neg(S.y)), neg(S.z))
    assert parse("2*u_x + v_z^2") == add(mul(2, S.u_x), pow_(S.v_z, 2))


def test_parse_power_right_assoc_and_integer_only():
    assert parse("x^2^3") == pow_(S.x, 8)  # x^(2^3)
    with pytest.raises(ParseError):
        parse("x^y")
    with pytest.raises(ParseError):
        parse("x^(1/2)")


def test_parse_rational_literal_via_division():
    assert parse("3/2") == Num(Fraction(3, 2))
    assert parse("1/2*x") == mul(Num(Fraction(1, 2)), S.x)


def test_parse_functions_and_jets():
    assert parse("sin(z)") == sin(S.z)
    assert parse("sqrt(u^2 + v^2 + w^2)") == sqrt(
        add(pow_(S.u, 2), pow_(S.v, 2), pow_(S.w, 2))
    )
    assert parse("w_y - v_z - u*f") == add(S.w_y, neg(S.v_z), neg(mul(S.u, S.f)))


def test_parse_error_offsets():
    with pytest.raises(ParseError) as ei:
        parse("x + qqq")
    assert ei.value.offset == 4
    with pytest.raises(ParseError) as ei:
        parse("x + ")
    assert ei.value.offset == 4
    with pytest.raises(ParseError) as ei:
        parse("foo(x)")
    assert ei.value.offset == 0


def test_unknown_identifier_rejected():
    with pytest.raises(ParseError):
        parse("nosuch")


def test_print_examples():
    assert to_string(parse("x + y*z")) == "x + y*z"
    assert to_string(parse("-x - y")) == "-x - y"
    assert to_string(parse("u/R")) == "u/R"
    assert to_string(parse("1/2*x")) == "x/2"
    assert to_string(parse("(x + y)^2")) == "(x + y)^2"


# round-trip: printing then parsing reproduces the tree exactly
_LEAVES = [S.x, S.y, S.z, S.u, S.v, S.w, S.u_x, S.v_z, S.R, S.eps]


def _expr_strategy():
    leaf = st.one_of(
        st.sampled_from(_LEAVES),
        st.integers(min_value=-9, max_value=9).map(lambda n: Num(Fraction(n))),
    )

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: add(ab[0], ab[1])),
            st.tuples(children, children).map(lambda ab: mul(ab[0], ab[1])),
            st.tuples(children, st.integers(min_value=-3, max_value=3)).map(
                lambda bn: pow_(bn[0], bn[1]) if not (
                    isinstance(bn[0], Num) and bn[0].val == 0 and bn[1] < 0
                ) else bn[0]
            ),
            children.map(lambda c: sin(c)),
            children.map(lambda c: exp(c)),
            children.map(neg),
        )

    return st.recursive(leaf, extend, max_leaves=12)


@settings(max_examples=120, deadline=None)
@given(_expr_strategy())
def test_print_parse_round_trip(e):
    assert parse(to_string(e)) == e


@settings(max_examples=60, deadline=None)
@given(_expr_strategy())
def test_normalize_is_idempotent_where_defined(e):
    try:
        p1 = normalize(e)
    except (NotPolynomial, E.ExprError):
        return
    p2 = normalize(p1.to_expression())
    assert p1 == p2


def test_registry_fresh_symbols():
    before = set(REGISTRY.by_name)
    a2, b2 = REGISTRY.fresh_unit_pair()
    assert is_zero_expr(a2 ** 2 + b2 ** 2 - 1)
    assert a2.name not in before and b2.name not in before
    p = REGISTRY.fresh_parameter()
    assert p.name not in before
