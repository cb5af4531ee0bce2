#!/usr/bin/env python3
"""Recompute every symbolic table from scratch and print it next to the
stored reference, flagging the handful of documented discrepancies.

Run from the repository root after an editable install:

    python3 scripts/reproduce_tables.py
"""

import sys

from curlsym import fixtures, liealg, symmetry
from curlsym.expr import S, to_string


def banner(title):
    print()
    print(title)
    print("-" * len(title))


def main() -> int:
    names10 = tuple(f"X{k}" for k in range(1, 11))
    b10 = fixtures.load_basis(10)
    b7 = fixtures.load_basis(7)

    banner("determining system, formal profile")
    eqs = symmetry.determining_system(symmetry.curl_system(None))
    for k, e in enumerate(eqs, 1):
        print(f"  {k:2d}: {to_string(e)}")
    rep = symmetry.determining_systems_equivalent(
        eqs, fixtures.load_determining_fixture()
    )
    print(f"  equivalent to the stored reference system: {rep.ok}")

    banner("polynomial ansatz, magnitude profile (degree 2)")
    res = symmetry.solve_polynomial_ansatz(symmetry.curl_system(S.R), 2)
    print(f"  dimension {len(res.generators)}")
    same = symmetry.generator_spans_equal(res.generators, b10)
    print(f"  span equals the stored ten-generator basis: {same}")

    banner("polynomial ansatz, divergence-free system (degree 2)")
    res = symmetry.solve_polynomial_ansatz(symmetry.blair_system(S.R), 2)
    print(f"  dimension {len(res.generators)}")
    same = symmetry.generator_spans_equal(res.generators, b7)
    print(f"  span equals the stored seven-generator basis: {same}")

    banner("structure constants, ten generators")
    table10 = liealg.structure_constants(b10, names10)
    print(liealg.table_grid(table10))
    print(f"  Jacobi identity: {liealg.jacobi_check(table10)}")
    mismatches = liealg.table_mismatches(table10, fixtures.load_bracket_table())
    corrections = fixtures.load_bracket_corrections()
    for m in mismatches:
        tag = "documented" if m.pair in corrections else "NEW"
        print(f"  {tag} difference {m.describe(names10)}")

    banner("structure constants, seven generators")
    table7 = liealg.structure_constants(b7, names10[:7])
    print(liealg.table_grid(table7))
    print(f"  Jacobi identity: {liealg.jacobi_check(table7)}")

    banner("adjoint table (closed form)")
    entries = {
        (i, j): liealg.adjoint_closed_form(table7, i, j)
        for i in range(1, 8)
        for j in range(1, 8)
    }
    print(liealg.adjoint_grid(entries, table7.names))
    reference = fixtures.load_adjoint_table()
    bad = [
        (i, j)
        for (i, j), entry in entries.items()
        if not liealg.adjoint_entry_matches(
            entry, reference[(i, j)].coordinate_functions(7)
        )
    ]
    print(f"  entries differing from the stored tables: {bad if bad else 'none'}")

    banner("two-generator subalgebra candidates")
    aligned = fixtures.load_subalgebra_corrections()
    for pair in fixtures.load_subalgebra_pairs():
        okay = liealg.is_subalgebra(table7, pair)
        note = ""
        if not okay and pair in aligned:
            fix = aligned[pair]
            note = f"  (documented; X{fix[0]},X{fix[1]} closes instead)"
        print(f"  X{pair[0]},X{pair[1]}: {'closes' if okay else 'does NOT close'}{note}")

    banner("profile constraints")
    constraints = symmetry.f_constraints_from_group(b7)
    for c in constraints:
        print(f"  {to_string(c)} = 0")
    family = symmetry.solve_f_family(constraints, degree=2)
    print(f"  polynomial-in-(u,v,w,R) solutions up to degree 2: "
          f"{[to_string(e) for e in family]} (scalar multiples)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
