from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from superrec.scalars import NotInvertible, Ring
from superrec.series import BiForm, FormalSeries, TruncationError, WeightError


RING = Ring([("s", 2)])


def make(coeffs, trunc, dz=0, theta=0):
    return FormalSeries(
        RING, {k: RING.rational(v) for k, v in coeffs.items()},
        trunc, dz, theta)


def test_mul_weights_add():
    a = make({-1: 1}, 5, dz=1)
    b = make({1: 1}, 5, dz=1)
    c = a * b
    assert c.dz_weight == 2 and c.theta == 0
    assert c.coeff(0) == RING.one()


def test_theta_square_is_z_dz():
    t = make({0: 1}, 5, dz=0, theta=1)
    sq = t * t
    assert sq.theta == 0 and sq.dz_weight == 1
    assert sq.coeff(1) == RING.one()
    assert sq.coeff(0).is_zero()


def test_theta_over_z_squared_residue():
    # (1/z T)(1/z T) = z^-2 * z dz = z^-1 dz, residue 1
    a = make({-1: 1}, 5, theta=1)
    assert (a * a).residue() == RING.one()


def test_residue_basic():
    a = make({-1: 3, 0: 2, 1: 1}, 5, dz=1)
    assert a.residue() == RING.rational(3)
    assert make({-2: 1}, 5, dz=1).residue().is_zero()


def test_residue_errors():
    with pytest.raises(WeightError):
        make({-1: 1}, 5, dz=2).residue()
    with pytest.raises(WeightError):
        make({-1: 1}, 5, dz=1, theta=1).residue()
    bad = FormalSeries(RING, {}, -3, 1, 0, min_exp=-5)
    with pytest.raises(TruncationError):
        bad.residue()


def test_invert_monomial():
    a = make({2: 2}, 8, dz=1)
    inv = a.invert()
    assert inv.dz_weight == -1
    assert inv.coeff(-2) == RING.rational(Fraction(1, 2))
    assert (a * inv).coeff(0) == RING.one()


def test_invert_geometric():
    a = make({0: 1, 1: 1}, 6)
    inv = a.invert()
    for k in range(7):
        assert inv.coeff(k) == RING.rational((-1) ** k)


def test_invert_airy_denominator():
    # leading-form difference for the cubic dilaton shift: 2 z^2 dz
    a = make({2: 2}, 9, dz=1)
    inv = a.invert()
    assert inv.trunc == 9 - 4
    assert inv.coeff(-2) == RING.rational(Fraction(1, 2))


def test_invert_errors():
    with pytest.raises(NotInvertible):
        make({}, 5).invert()
    with pytest.raises(NotInvertible):
        make({0: 1}, 5, theta=1).invert()


def test_sigma_examples():
    assert make({2: 1}, 5, dz=1).sigma() == make({2: -1}, 5, dz=1)
    assert make({-1: 1}, 5, theta=1).sigma() == make({-1: -1}, 5, theta=1)
    assert make({-2: 1}, 5, dz=1).sigma() == make({-2: -1}, 5, dz=1)


def test_derive():
    assert make({2: 1}, 5, theta=1).derive() == \
        make({1: 2}, 4, dz=1, theta=1)
    assert make({-1: 1}, 5, theta=1).derive() == \
        make({-2: -1}, 4, dz=1, theta=1)


def test_integrate_roundtrip():
    a = make({-3: 2, 1: 5}, 6, dz=1)
    assert a.integrate().derive() == a


def test_truncation_error_on_unknown_coeff():
    a = make({0: 1}, 3)
    with pytest.raises(TruncationError):
        a.coeff(4)
    assert a.coeff(3).is_zero()


def test_mul_truncation_rule():
    a = make({1: 1}, 4)
    b = make({2: 1}, 7)
    c = a * b
    assert c.trunc == min(4 + 2, 7 + 1)


coeff_strategy = st.dictionaries(
    st.integers(-4, 4),
    st.fractions(min_value=-5, max_value=5).filter(lambda f: f != 0),
    max_size=4)


@given(coeff_strategy, st.integers(0, 2).map(lambda w: w),
       st.booleans())
def test_sigma_involution(coeffs, dz, theta):
    a = make(coeffs, 6, dz=dz, theta=int(theta))
    assert a.sigma().sigma() == a


@given(coeff_strategy, coeff_strategy, coeff_strategy)
@settings(max_examples=50)
def test_mul_associative_distributive(c1, c2, c3):
    a, b, c = make(c1, 8), make(c2, 8), make(c3, 8)
    lhs = (a * b) * c
    rhs = a * (b * c)
    assert lhs == rhs
    assert a * (b + c) == a * b + a * c


@given(coeff_strategy, coeff_strategy)
@settings(max_examples=50)
def test_sigma_homomorphism(c1, c2):
    a, b = make(c1, 8, dz=1), make(c2, 8, dz=1)
    assert (a * b).sigma() == a.sigma() * b.sigma()


@given(coeff_strategy)
@settings(max_examples=50)
def test_sigma_per_term_sign_vs_substitution(coeffs):
    a = make(coeffs, 8, dz=1)
    sig = a.sigma()
    for k, c in a.coeffs.items():
        assert sig.coeffs.get(k, RING.zero()) == c * ((-1) ** ((k + 1) % 2))


@given(coeff_strategy)
@settings(max_examples=30)
def test_invert_mul_is_one(coeffs):
    a = make(coeffs, 8)
    try:
        inv = a.invert()
    except NotInvertible:
        return
    prod = a * inv
    assert prod.coeff(0) == RING.one()
    for k in range(1, prod.trunc + 1):
        assert prod.coeff(k).is_zero()


# --- diagonal closed forms, rederived with an independent symbolic oracle ---


def test_bosonic_diag_singular_oracle():
    # dz1 dz2/(z1-z2)^2 at z2=-z1 with dz2 -> -dz1: -1/(2z)^2 dz^2
    z1, z2 = sympy.symbols("z1 z2")
    value = (1 / (z1 - z2) ** 2).subs(z2, -z1) * (-1)
    assert sympy.simplify(value - (-1) / (4 * z1 ** 2)) == 0
    biform = BiForm(RING, "bosonic_02", {}, 10)
    diag = biform.eval_diag("plain")
    assert diag.coeff(-2) == RING.rational(Fraction(-1, 4))
    assert all(diag.coeff(k).is_zero() for k in range(-1, 11))


def test_fermionic_diag_singular_oracle():
    # h = -(z1+z2)/(2 z1 z2 (z1-z2)); z*d1(h) at z2=-z1 must be 1/(4 z^2),
    # and -z*d1(h) at (z1,z2)=(-z,z) the same.
    z1, z2, z = sympy.symbols("z1 z2 z")
    h = -(z1 + z2) / (2 * z1 * z2 * (z1 - z2))
    d1 = sympy.diff(h, z1)
    first = sympy.simplify(z * d1.subs([(z1, z), (z2, -z)]))
    second = sympy.simplify(-z * d1.subs([(z1, -z), (z2, z)]))
    assert sympy.simplify(first - 1 / (4 * z ** 2)) == 0
    assert sympy.simplify(second - 1 / (4 * z ** 2)) == 0
    biform = BiForm(RING, "fermionic_002", {}, 10)
    for mode in ("derived_first", "derived_second"):
        diag = biform.eval_diag(mode)
        assert diag.coeff(-2) == RING.rational(Fraction(1, 4))
        assert all(diag.coeff(k).is_zero() for k in range(-1, 11))


def test_bosonic_diag_with_constant_regular_part():
    phi = RING.rational(Fraction(5, 1))
    biform = BiForm(RING, "bosonic_02", {(1, 1): phi}, 10)
    diag = biform.eval_diag("plain")
    assert diag.coeff(-2) == RING.rational(Fraction(-1, 4))
    assert diag.coeff(0) == -phi  # dxi_1(z) dxi_1(-z) = -dz^2


def test_fermionic_diag_regular_oracle():
    # generic small regular part checked against symbolic differentiation
    z1, z2, z = sympy.symbols("z1 z2 z")
    r13 = Fraction(3, 7)
    reg = {(1, 3): RING.rational(r13), (3, 1): RING.rational(-r13)}
    biform = BiForm(RING, "fermionic_002", reg, 10)
    h_reg = sympy.Rational(3, 7) * (z1 ** -1 * z2 ** 1 - z1 ** 1 * z2 ** -1)
    d1 = sympy.diff(h_reg, z1)
    first = sympy.expand(z * d1.subs([(z1, z), (z2, -z)]))
    second = sympy.expand(-z * d1.subs([(z1, -z), (z2, z)]))
    for mode, expr in (("derived_first", first), ("derived_second", second)):
        diag = biform.eval_diag(mode)
        poly = sympy.Poly(sympy.expand(expr * z ** 4), z)
        for k in range(-4, 5):
            want = Fraction(str(
                poly.coeff_monomial(z ** (k + 4)) if k + 4 >= 0 else 0))
            if k == -2:
                want += Fraction(1, 4)  # singular-part contribution
            assert diag.coeff(k) == RING.rational(want), (mode, k)
