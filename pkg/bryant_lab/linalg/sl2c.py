import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from bryant_lab.config.settings import DET_TOL, period_config
from bryant_lab.errors import NotUnimodular

logger = logging.getLogger(__name__)

INFINITY = complex(np.inf, 0)
IDENTITY = np.eye(2, dtype=complex)
SIGMA3 = np.array([[0, 1j], [1j, 0]], dtype=complex)


def mat(a11, a12, a21, a22):
    return np.array([[a11, a12], [a21, a22]], dtype=complex)


def det(a):
    a = np.asarray(a)
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def sl2_inverse(a):
    a = np.asarray(a, dtype=complex)
    return mat(a[1, 1], -a[0, 1], -a[1, 0], a[0, 0]) / det(a)


def check_unimodular(a, tol=DET_TOL):
    drift = abs(det(a) - 1)
    if drift > tol:
        raise NotUnimodular(f"|det - 1| = {drift:.3e} exceeds {tol:g}")


def diag_scaling(t):
    """diag(t^(1/2), t^(-1/2)); its star action multiplies by t."""
    s = np.sqrt(complex(t))
    return mat(s, 0, 0, 1 / s)


def star(a, w):
    """Moebius action (a11 w + a12) / (a21 w + a22), with infinity handled projectively."""
    a = np.asarray(a, dtype=complex)
    if np.ndim(w) == 0:
        w = complex(w)
        if not np.isfinite(abs(w)):
            return INFINITY if a[1, 0] == 0 else a[0, 0] / a[1, 0]
        den = a[1, 0] * w + a[1, 1]
        return INFINITY if den == 0 else (a[0, 0] * w + a[0, 1]) / den
    w = np.asarray(w, dtype=complex)
    return np.array([star(a, x) for x in w.ravel()]).reshape(w.shape)


@dataclass(frozen=True, eq=False)
class H3Point:
    """Positive definite Hermitian matrix of determinant one."""
    matrix: np.ndarray

    @property
    def minkowski(self):
        f = self.matrix
        x0 = ((f[0, 0] + f[1, 1]) / 2).real
        x3 = ((f[0, 0] - f[1, 1]) / 2).real
        return np.array([x0, f[0, 1].real, f[0, 1].imag, x3])

    @classmethod
    def from_minkowski(cls, x):
        x0, x1, x2, x3 = x
        return cls(mat(x0 + x3, x1 + 1j * x2, x1 - 1j * x2, x0 - x3))

    def to_ball(self):
        return to_ball(self)


def herm_point(F, tol=DET_TOL):
    F = np.asarray(F, dtype=complex)
    check_unimodular(F, tol)
    return H3Point(F @ F.conj().T)


def to_ball(p):
    x0, x1, x2, x3 = p.minkowski
    return np.array([x1, x2, x3]) / (1 + x0)


def from_ball(y):
    y = np.asarray(y, dtype=float)
    n2 = float(y @ y)
    x = 2 * y / (1 - n2)
    x0 = (1 + n2) / (1 - n2)
    return H3Point.from_minkowski([x0, *x])


def su2_defect(M):
    M = np.asarray(M, dtype=complex)
    unitary = np.linalg.norm(M @ M.conj().T - IDENTITY, 'fro')
    return float(max(unitary, abs(det(M) - 1)))


def projective_distance(a, b):
    """min over signs of ||a - s b||, with the sign that attains it."""
    plus = np.linalg.norm(np.asarray(a) - np.asarray(b))
    minus = np.linalg.norm(np.asarray(a) + np.asarray(b))
    return (float(plus), 1) if plus <= minus else (float(minus), -1)


# --- invariant Hermitian forms -------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def _herm_from_coords(x):
    h12 = (x[2] + 1j * x[3]) / _SQRT2
    return mat(x[0], h12, np.conj(h12), x[1])


def _coords_from_herm(H):
    return np.array([H[0, 0].real, H[1, 1].real, _SQRT2 * H[0, 1].real, _SQRT2 * H[0, 1].imag])


def invariance_system(generators):
    """Real 4n x 4 matrix of H -> rho* H rho - H, each block scaled by 1/||rho||_F^2."""
    blocks = []
    basis = np.eye(4)
    for rho in generators:
        rho = np.asarray(rho, dtype=complex)
        scale = np.linalg.norm(rho, 'fro') ** 2
        columns = [_coords_from_herm(rho.conj().T @ _herm_from_coords(e) @ rho - _herm_from_coords(e)) for e in basis]
        blocks.append(np.array(columns).T / scale)
    return np.vstack(blocks) if blocks else np.zeros((0, 4))


def _min_eig_ratio(x):
    H = _herm_from_coords(x)
    return np.linalg.eigvalsh(H)[0] / max(np.linalg.norm(x), 1e-300)


@dataclass(frozen=True, eq=False)
class Unitarizability:
    defect: float
    conjugator: np.ndarray
    form: np.ndarray
    nullity: int
    clipped: bool


def unitarizability(generators, tol=None, null_tol=1e-10):
    """Search a common invariant positive Hermitian form H; conjugator b has b* b = H."""
    tol = period_config['tol'] if tol is None else tol
    generators = [np.asarray(g, dtype=complex) for g in generators]
    if not generators:
        return Unitarizability(0.0, IDENTITY.copy(), IDENTITY.copy(), 4, False)
    system = invariance_system(generators)
    _, sing, vh = np.linalg.svd(system, full_matrices=True)
    sing = np.concatenate([sing, np.zeros(4 - len(sing))])
    scale = max(1.0, sing[0])
    nullity = int(np.sum(sing <= null_tol * scale))
    if nullity >= 1:
        basis = vh[4 - nullity:].T
        start = basis.T @ np.array([1.0, 1.0, 0.0, 0.0])
        if np.linalg.norm(start) < 1e-8:
            start = np.eye(nullity)[0]
        if nullity == 1:
            x = basis[:, 0] * np.sign(start[0] if start[0] != 0 else 1.0)
        else:
            res = optimize.minimize(lambda c: -_min_eig_ratio(basis @ c), start, method='Nelder-Mead',
                                    options={'xatol': 1e-12, 'fatol': 1e-14, 'maxiter': 2000})
            x = basis @ res.x
    else:
        x = vh[-1]
    if x[0] + x[1] < 0:
        x = -x
    H = _herm_from_coords(x / np.linalg.norm(x))
    w, U = np.linalg.eigh(H)
    floor = 1e-12 * max(abs(w[-1]), 1e-300)
    w_pd = np.maximum(w, floor)
    H_pd = (U * w_pd) @ U.conj().T
    change = np.linalg.norm(H_pd - H) / np.linalg.norm(H)
    clipped = bool(change > tol)
    x_pd = _coords_from_herm(H_pd)
    defect = float(np.linalg.norm(system @ x_pd) / np.linalg.norm(x_pd))
    conjugator = None
    if defect <= tol and not clipped:
        root = (U * np.sqrt(w_pd)) @ U.conj().T
        conjugator = root / np.sqrt(np.sqrt(np.prod(w_pd)))
    logger.debug("unitarizability: nullity %d, defect %.3e, clipped %s", nullity, defect, clipped)
    return Unitarizability(defect, conjugator, H_pd, nullity, clipped)


def form_signature(generators):
    """det of the unit-norm Hermitian form closest to invariant: > 0 definite, < 0 indefinite."""
    generators = [np.asarray(g, dtype=complex) for g in generators]
    if not generators:
        return 0.5
    _, _, vh = np.linalg.svd(invariance_system(generators), full_matrices=True)
    H = _herm_from_coords(vh[-1] / np.linalg.norm(vh[-1]))
    return float(np.linalg.det(H).real)


def is_simultaneously_diagonalizable(generators, tol=1e-8):
    """'trivial', 'diagonal', 'triangular' or 'irreducible' for a list of SL(2,C) matrices, up to sign."""
    generators = [np.asarray(g, dtype=complex) for g in generators]
    nontrivial = [g for g in generators if projective_distance(g, IDENTITY)[0] > tol]
    if not nontrivial:
        return 'trivial'
    candidates = []
    for g in nontrivial:
        _, vecs = linalg.eig(g)
        candidates.extend(vecs.T)
    common = []
    for v in candidates:
        v = v / np.linalg.norm(v)
        if all(np.linalg.norm(g @ v - (v.conj() @ g @ v) * v) <= tol * max(1.0, np.linalg.norm(g)) for g in nontrivial):
            if not common or all(abs(abs(v.conj() @ c) - 1) > 1e-6 for c in common):
                common.append(v)
    if len(common) >= 2:
        return 'diagonal'
    if len(common) == 1:
        return 'triangular'
    return 'irreducible'


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_json(rows):
    return np.array([[complex(*x) for x in row] for row in rows], dtype=complex)
