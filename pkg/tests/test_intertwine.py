import random
from fractions import Fraction

import pytest

from cuspidal.padic import FieldSpec, PPower, binomial_scalar
from cuspidal.series import RadiusParams
from cuspidal.intertwine import (
    ConjugationParams,
    Mat2,
    TableBuildError,
    ad_conjugate,
    build_table,
    certify_divergence,
    solve_equation_weightwise,
    table_matches_solution_space,
    torus_disjointness,
    verify_intertwiner_equation,
)

Q5 = FieldSpec(p=5, precision_cap=30)
Q5E2 = FieldSpec(p=5, e=2, precision_cap=30)


def conj(field, a, b, m0m=2):
    return ConjugationParams(a=field.coerce(a), b=field.coerce(b), m0m=m0m)


# -- conjugation ----------------------------------------------------------


def test_ad_conjugate_identity():
    x = Mat2(Q5, ((2, 3), (4, 5)))
    assert ad_conjugate(Mat2.identity(Q5), x) == x


def test_ad_conjugate_lower_on_e():
    b = Q5.exact(7)
    u = Mat2.lower_unipotent(Q5, b)
    out = ad_conjugate(u, Mat2.gen_e(Q5))
    expected = (
        Mat2.gen_f(Q5).scale(-(b * b))
        + Mat2.gen_z(Q5).scale(b)
        + Mat2.gen_e(Q5)
    )
    assert out == expected


def test_ad_conjugate_upper_on_torus():
    a = Q5.exact(3)
    u = Mat2.upper_unipotent(Q5, a)
    x = Mat2.diag(Q5, Q5.exact(2), Q5.exact(-1))
    out = ad_conjugate(u, x)
    alpha = Q5.exact(2) - Q5.exact(-1)
    assert out == x + Mat2.gen_e(Q5).scale(alpha * a)


def test_ad_conjugate_upper_fixes_e():
    u = Mat2.upper_unipotent(Q5, Q5.exact(9))
    assert ad_conjugate(u, Mat2.gen_e(Q5)) == Mat2.gen_e(Q5)


def test_ad_conjugate_rejects_singular():
    with pytest.raises(ZeroDivisionError):
        ad_conjugate(Mat2(Q5, ((1, 1), (1, 1))), Mat2.gen_e(Q5))


# -- table construction ---------------------------------------------------


def test_bzero_first_steps():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    params = conj(Q5, a=Fraction(2), b=0)
    table = build_table(mu, params, (1,), 8)
    assert table.case_tag == "BZero"
    a, mu1 = Q5.exact(2), mu[1]
    assert table.coefficient(1) == a * mu1
    assert table.coefficient(2) == a * a * mu1 * (mu1 - 1) / Q5.exact(2)
    assert all(table.coefficient(-k).is_exactly_zero() for k in range(1, 9))


def test_bzero_binomial_identification():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    a = Fraction(3, 2)
    table = build_table(mu, conj(Q5, a=a, b=0), (1,), 10)
    for i in range(11):
        expect = Q5.exact(a) ** i * binomial_scalar(mu[1], i)
        assert (table.coefficient(i) - expect).is_exactly_zero()


def test_azero_first_steps():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    b = Q5.exact(5)
    table = build_table(mu, conj(Q5, a=0, b=5), (1,), 8)
    assert table.case_tag == "AZero"
    assert table.coefficient(-1) == -(b * mu[0])
    assert table.coefficient(-2) == b * b * mu[0] * (mu[0] - 1) / Q5.exact(2)
    assert all(table.coefficient(k).is_exactly_zero() for k in range(1, 9))


def test_zero_seeds_give_zero_table():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    for params in (conj(Q5, 2, 0), conj(Q5, 0, 5), conj(Q5, 2, 5)):
        seeds = (0, 0) if params.case_tag == "Both" else (0,)
        table = build_table(mu, params, seeds, 6)
        assert table.is_zero()


def test_both_case_seed_step():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    a, b = Q5.exact(2), Q5.exact(5)
    params = conj(Q5, 2, 5)
    table = build_table(mu, params, (1, 1), 8)
    mubar = mu[0] - mu[1]
    b2ab = b * b * a - b
    c1_expected = (a * b * mubar + a * (mu[1] + 1)) / (b2ab * (mu[0] + 1))
    assert (table.coefficient(1) - c1_expected).is_exactly_zero()


def test_build_table_precondition_error_names_index():
    mu = (Q5.exact(1, 3), Q5.exact(-3))  # mu_1 integral: mu_1 + 3 = 0
    with pytest.raises(TableBuildError, match="mu_1"):
        build_table(mu, conj(Q5, 2, 0), (1,), 8)


# -- the oracle ------------------------------------------------------------


def admissible_points(rng, field, count, case):
    pts = []
    while len(pts) < count:
        mu0 = Fraction(rng.randint(-40, 40), rng.choice([3, 7, 9, 11, 13]))
        mu1 = Fraction(rng.randint(-40, 40), rng.choice([2, 3, 7, 9, 11]))
        if mu0.denominator == 1 or mu1.denominator == 1:
            continue
        a = Fraction(rng.randint(1, 20))
        b = Fraction(rng.randint(1, 20) * 5)
        if case == "BZero":
            b = Fraction(0)
        elif case == "AZero":
            a = Fraction(0)
        else:
            if b * b * a == b:
                continue
        pts.append(((field.exact(mu0), field.exact(mu1)), a, b))
    return pts


@pytest.mark.parametrize("case", ["BZero", "AZero", "Both"])
def test_oracle_zero_residuals(case):
    rng = random.Random(hash(case) % 2**32)
    for mu, a, b in admissible_points(rng, Q5, 6, case):
        seeds = (1, 1) if case == "Both" else (1,)
        table = build_table(mu, conj(Q5, a, b), seeds, 10)
        report = verify_intertwiner_equation(table, 9)
        assert report.all_zero, (mu, a, b, report.nonzero_weights)


def test_oracle_zero_table():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    table = build_table(mu, conj(Q5, 2, 5), (0, 0), 6)
    assert verify_intertwiner_equation(table, 5).all_zero


def test_oracle_detects_perturbation():
    mu = (Q5.exact(1, 3), Q5.exact(1, 2))
    table = build_table(mu, conj(Q5, 2, 0), (1,), 8)
    broken = dict(table.c)
    broken[1] = broken[1] + 1
    from cuspidal.intertwine import IntertwinerTable

    bad = IntertwinerTable(
        mu=table.mu, params=table.params, case_tag=table.case_tag,
        c=broken, extent=table.extent, seeds=table.seeds,
    )
    report = verify_intertwiner_equation(bad, 7)
    assert not report.all_zero
    hit_weights = {i for (_, i) in report.nonzero_weights}
    # linear defect at the perturbed ladder position and its neighbours
    assert hit_weights <= {0, 1, 2}
    assert hit_weights


@pytest.mark.parametrize("case", ["BZero", "AZero", "Both"])
def test_weightwise_solve_reproduces_tables(case):
    rng = random.Random(1 + (hash(case) % 1000))
    for mu, a, b in admissible_points(rng, Q5, 4, case):
        seeds = (1, 1) if case == "Both" else (1,)
        table = build_table(mu, conj(Q5, a, b), seeds, 8)
        basis, free_cols = solve_equation_weightwise(mu, conj(Q5, a, b), 8)
        assert len(free_cols) == 2  # seed freedom
        assert table_matches_solution_space(table)


# -- divergence certification ----------------------------------------------


def radius(field=Q5E2, lam=Fraction(1, 2), m0=1, m=1):
    return RadiusParams(field=field, kappa=1, m0=m0, m=m, lambda_s=lam)


def test_certify_bzero_diverges_outside():
    pi = Q5E2.uniformizer()
    mu = (pi**-1, pi)  # vals -1/2, 1/2
    params = ConjugationParams(a=Q5E2.exact(5), b=Q5E2.zero(), m0m=2)  # val a = 1
    res = certify_divergence(mu, params, radius(), 120)
    assert res.case_tag == "BZero"
    assert not res.inside_threshold
    assert res.oracle.all_zero
    assert res.certificate.verdict == "Diverges"
    assert res.certificate.asymptotic_slope == Fraction(-3, 4)


def test_certify_bzero_converges_inside():
    pi = Q5E2.uniformizer()
    mu = (pi**-1, pi)
    params = ConjugationParams(a=Q5E2.exact(25), b=Q5E2.zero(), m0m=2)  # val a = 2
    res = certify_divergence(mu, params, radius(), 120)
    assert res.inside_threshold
    assert res.certificate.verdict == "Converges"
    assert res.certificate.asymptotic_slope == Fraction(1, 4)


def test_certify_azero_mirrors():
    pi = Q5E2.uniformizer()
    mu = (pi, pi**3)  # vals 1/2, 3/2
    params = ConjugationParams(a=Q5E2.zero(), b=Q5E2.exact(5), m0m=2)
    res = certify_divergence(mu, params, radius(), 120)
    assert res.case_tag == "AZero"
    assert res.certificate.verdict == "Diverges"


def test_certify_both_case_A():
    # |ab mu_0| > 1: val(a)+val(b)+val(mu_0) < 0 with |mu_0| > 1
    pi = Q5E2.uniformizer()
    mu = (pi**-3, pi)  # val mu_0 = -3/2, val mu_1 = 1/2
    params = ConjugationParams(a=Q5E2.one(), b=Q5E2.exact(5), m0m=2)
    res = certify_divergence(mu, params, radius(), 150)
    assert res.case_tag == "Both"
    assert res.oracle.all_zero
    assert res.certificate.verdict == "Diverges"


def test_certify_both_case_B():
    # |mu_0| < 1 branch
    pi = Q5E2.uniformizer()
    mu = (pi**3, pi)  # val mu_0 = 3/2 > val mu_1 = 1/2 both inside O
    params = ConjugationParams(a=Q5E2.one(), b=Q5E2.exact(5), m0m=2)
    res = certify_divergence(mu, params, radius(), 150)
    assert res.certificate.verdict == "Diverges"


def test_torus_disjointness():
    res = torus_disjointness(Q5.exact(5), PPower(5, Fraction(0)), 100)
    assert res.disjoint
    assert res.shift == 1
    unit = torus_disjointness(Q5.exact(2), PPower(5, Fraction(0)), 100)
    assert not unit.disjoint
    deeper = torus_disjointness(Q5.exact(25), PPower(5, Fraction(0)), 100)
    assert deeper.disjoint
    assert deeper.shift == 2
    assert deeper.witness_slope == 2 * res.witness_slope
