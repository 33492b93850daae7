import numpy as np
import pytest

from bryant_lab.errors import NotUnimodular
from bryant_lab.linalg.sl2c import (IDENTITY, INFINITY, H3Point, check_unimodular, det, diag_scaling, form_signature,
                                    from_ball, herm_point, is_simultaneously_diagonalizable, mat, sl2_inverse, star,
                                    su2_defect, to_ball, unitarizability)


def _su2(alpha, beta):
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    alpha, beta = alpha / norm, beta / norm
    return mat(alpha, -np.conj(beta), beta, np.conj(alpha))


def test_inverse_and_det():
    a = mat(2, 1 + 1j, 1, (2 + 1j) / 2)
    assert det(a) == pytest.approx(1.0)
    assert np.allclose(sl2_inverse(a) @ a, IDENTITY)
    b = mat(2, 1j, 1, 1)
    assert det(b) == pytest.approx(2 - 1j)
    assert np.allclose(sl2_inverse(b) @ b, IDENTITY)


def test_check_unimodular():
    check_unimodular(mat(1, 5, 0, 1))
    with pytest.raises(NotUnimodular):
        check_unimodular(mat(2, 0, 0, 1))


def test_star_action():
    a = mat(1, 2, 3, 7)
    assert star(a, 1.0) == pytest.approx(3 / 10)
    assert star(a, INFINITY) == pytest.approx(1 / 3)
    assert not np.isfinite(abs(star(mat(1, 0, 1, 1), -1.0)))
    assert star(diag_scaling(4.0), 0.5 + 1j) == pytest.approx(4 * (0.5 + 1j))


def test_ball_coordinates_invert():
    F = mat(1.2, 0.3j, -0.5, (1 - 0.3j * 0.5) / 1.2)
    assert det(F) == pytest.approx(1.0)
    p = herm_point(F)
    y = to_ball(p)
    assert np.linalg.norm(y) < 1
    assert np.allclose(from_ball(y).matrix, p.matrix)
    assert np.allclose(H3Point.from_minkowski(p.minkowski).matrix, p.matrix)


def test_su2_defect():
    assert su2_defect(_su2(0.3 + 0.1j, -0.2j)) < 1e-14
    assert su2_defect(mat(2, 0, 0, 0.5)) > 1


def test_conjugated_unitary_generators_are_unitarizable():
    b = mat(1.5, 0.4 - 0.2j, 0.1j, (1 + (0.4 - 0.2j) * 0.1j) / 1.5)
    b_inv = sl2_inverse(b)
    generators = [b_inv @ _su2(0.3 + 0.1j, -0.2j) @ b, b_inv @ _su2(-0.5, 0.7 + 0.1j) @ b]
    result = unitarizability(generators)
    assert result.defect < 1e-10
    assert result.conjugator is not None
    for M in generators:
        conj = result.conjugator @ M @ np.linalg.inv(result.conjugator)
        assert su2_defect(conj) < 1e-8
    assert form_signature(generators) > 0


def test_hyperbolic_and_parabolic_pair_is_not_unitarizable():
    result = unitarizability([mat(2, 0, 0, 0.5), mat(1, 1, 0, 1)])
    assert result.conjugator is None
    assert result.defect > 1e-3


def test_form_signature_of_an_su11_pair_is_negative():
    t = 0.7
    boost = mat(np.cosh(t), np.sinh(t), np.sinh(t), np.cosh(t))
    rotation = mat(np.exp(0.4j), 0, 0, np.exp(-0.4j))
    assert form_signature([boost, rotation]) < 0
    assert unitarizability([boost, rotation]).conjugator is None


def test_diagonal_generators_have_a_family_of_forms():
    result = unitarizability([mat(np.exp(0.3j), 0, 0, np.exp(-0.3j)), mat(np.exp(1.1j), 0, 0, np.exp(-1.1j))])
    assert result.nullity == 2
    assert result.conjugator is not None


@pytest.mark.parametrize("generators, expected", [
    ([IDENTITY, -IDENTITY], 'trivial'),
    ([mat(2, 0, 0, 0.5), mat(3, 0, 0, 1 / 3)], 'diagonal'),
    ([mat(1, 1, 0, 1), mat(2, 5, 0, 0.5)], 'triangular'),
    ([_su2(0.3 + 0.1j, -0.2j), _su2(-0.5, 0.7 + 0.1j)], 'irreducible'),
])
def test_simultaneous_diagonalizability(generators, expected):
    assert is_simultaneously_diagonalizable(generators) == expected
