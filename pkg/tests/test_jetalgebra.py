from fractions import Fraction

import pytest

from multigerm.jetalgebra import INFINITY, Jet, JetSyntaxError, format_terms, parse_terms


def J(s, n=8):
    return Jet.parse(s, n)


def test_parse_and_format_round_trip():
    a = J("t^2 + 3*t^3 - 1/2 t^5", 6)
    assert str(a) == "t^2 + 3t^3 - 1/2t^5"
    assert Jet.parse(str(a), 6) == a
    assert a.order() == 2 and a.leading() == 1 and a.degree() == 5


def test_terms_beyond_truncation_are_dropped():
    assert J("t^2 + t^9", 8) == J("t^2", 8)
    assert J("t", 4) ** 5 == Jet.zero(4)


def test_zero_has_infinite_order():
    assert Jet.zero(5).order() == INFINITY
    assert Jet.zero(5).is_zero()


def test_multiplication_truncates():
    assert J("t + t^2", 4) * J("t + t^2", 4) == J("t^2 + 2t^3 + t^4", 4)


def test_composition():
    assert J("t + t^2", 4).compose(J("t + t^2", 4)) == J("t + 2t^3 + 2t^2 + t^4", 4)
    # (t^2)(t + t^3) = t^2 + 2t^4 + t^6
    assert J("t^2", 6)(J("t + t^3", 6)) == J("t^2 + 2t^4 + t^6", 6)


def test_derivative_and_shift():
    assert J("t^2 + t^5", 5).derivative() == J("2t + 5t^4", 5)
    assert J("t^2", 5).shift(2) == J("t^4", 5)


def test_truncation_is_part_of_equality():
    assert J("t^2", 3) != J("t^2", 5)
    assert J("t^2", 3).same_terms(J("t^2", 5))
    assert (J("t^2", 3) + J("t^2", 5)).truncation == 3


def test_truncate_and_pad():
    a = J("t + t^4", 6)
    assert a.truncate(3) == J("t", 3)
    assert a.pad(9).truncation == 9
    with pytest.raises(ValueError):
        a.truncate(7)


def test_syntax_error_reports_column():
    with pytest.raises(JetSyntaxError) as err:
        Jet.parse("t^2 + @", 4)
    assert err.value.column == 5


def test_constant_term_rejected():
    with pytest.raises(JetSyntaxError):
        Jet.parse("1 + t", 4)
    assert Jet.parse("1 + t", 4, allow_constant=True).coeff(0) == 1


def test_rational_coefficients_exact():
    a = J("1/3 t", 4) * J("3 t^2", 4)
    assert a.coeff(3) == 1
    assert isinstance(J("1/3 t", 4).coeff(1), Fraction)


def test_terms_helpers():
    assert format_terms({2: 1, 3: Fraction(-1, 2)}) == "t^2 - 1/2t^3"
    assert parse_terms("t^2 - 1/2t^3") == {2: 1, 3: Fraction(-1, 2)}
