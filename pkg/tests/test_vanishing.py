from fractions import Fraction

import pytest

from cuspidal.intertwine import Mat2
from cuspidal.padic import FieldSpec
from cuspidal.vanishing import conjugated_generator, h0_vanishing_check
from cuspidal.weights import CuspidalModuleSpec, WindowError

Q5 = FieldSpec(p=5, precision_cap=24)


def mk_spec(m0, m1, radius=10):
    return CuspidalModuleSpec(
        Q5, 1, (Q5.coerce(Fraction(m0)), Q5.coerce(Fraction(m1))), radius
    )


def test_conjugated_generator_matches_closed_form():
    spec = mk_spec(Fraction(1, 2), Fraction(1, 3))
    b = Q5.exact(7)
    u = Mat2.lower_unipotent(Q5, b)
    rows = conjugated_generator(u, 0, 1, spec)
    # expected e + b z - b^2 f
    assert rows[0][0] == b
    assert rows[0][1] == Q5.one()
    assert rows[1][0] == -(b * b)
    assert rows[1][1] == -b


def test_cuspidal_spec_passes():
    spec = mk_spec(Fraction(1, 2), Fraction(1, 3))
    conjugators = [
        Mat2.identity(Q5),
        Mat2.upper_unipotent(Q5, Q5.exact(3)),
        Mat2.lower_unipotent(Q5, Q5.exact(5)),
        Mat2.upper_unipotent(Q5, Q5.exact(5)) * Mat2.lower_unipotent(Q5, Q5.exact(10)),
    ]
    report = h0_vanishing_check(spec, conjugators)
    assert report.all_injective
    assert len(report.rows) == len(conjugators) * 2


def test_noncuspidal_spec_fails_on_plain_generator():
    spec = mk_spec(1, Fraction(1, 3))
    report = h0_vanishing_check(spec, [Mat2.identity(Q5)])
    kernels = report.kernels()
    assert kernels
    # the lowering direction dies where the first exponent vanishes
    bad = [r for r in kernels if r.generator == (1, 0)]
    assert bad
    witness = bad[0].witness
    (pt,) = witness.keys()
    assert pt.nu == (-1, 1)


def test_vacuous_conjugator_list():
    spec = mk_spec(Fraction(1, 2), Fraction(1, 3))
    report = h0_vanishing_check(spec, [])
    assert report.all_injective
    assert report.rows == ()


def test_window_too_small():
    spec = mk_spec(Fraction(1, 2), Fraction(1, 3), radius=0)
    with pytest.raises(WindowError):
        h0_vanishing_check(spec, [Mat2.identity(Q5)])


def test_integral_entry_beyond_window_still_injective_on_window():
    # the kernel weight sits outside the scanned window, so the window map
    # itself is injective; the cuspidality verdict (closed form) still fails
    spec = mk_spec(50, Fraction(1, 3), radius=5)
    report = h0_vanishing_check(spec, [Mat2.identity(Q5)])
    assert report.all_injective


def test_rank_two_module_conjugation():
    field = Q5
    spec = CuspidalModuleSpec(
        field,
        2,
        (field.exact(1, 2), field.exact(1, 3), field.exact(2, 3)),
        window_radius=3,
    )
    u = [[1, 2, 0], [0, 1, 3], [0, 0, 1]]
    report = h0_vanishing_check(spec, [u], window_radius=3)
    assert report.all_injective
    assert len(report.rows) == 6
