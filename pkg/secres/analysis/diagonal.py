"""
Symplectic diagonalization of the quadratic part of a secular Hamiltonian.

With z = (xi1, xi2, eta1, eta2) and H2 = z^T S z / 2, a symplectic matrix M
with z = M w, w = (x1, x2, y1, y2), brings H2 to

    sum_j nu_j (x_j^2 + y_j^2) / 2.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from series.core import PoissonSeries, restrict_sec, series_mul, series_sum
from series.exceptions import EllipticityError

logger = logging.getLogger(__name__)

J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
SECULAR_NAMES = ('xi1', 'xi2', 'eta1', 'eta2')
ELLIPTIC_RTOL = 1e-8
DIAGONAL_RTOL = 1e-9


def quadratic_matrix(series):
    """Symmetric S with H2 = z^T S z / 2, from the degree-2 terms of ``series``."""
    S = np.zeros((4, 4))
    for exps, _, coef in restrict_sec(series, degree=2):
        indices = [i for i in range(4) for _ in range(int(exps[2 + i]))]
        a, b = indices
        if a == b:
            S[a, a] += 2.0 * coef
        else:
            S[a, b] += coef
            S[b, a] += coef
    return S


def _normal_modes(S):
    values, vectors = linalg.eig(J @ S)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        raise EllipticityError('quadratic part vanishes; the origin is degenerate')
    if np.max(np.abs(values.real)) > ELLIPTIC_RTOL * scale:
        raise EllipticityError(f'origin is not elliptic: eigenvalues {np.round(values, 12)}')
    upper = [i for i in range(4) if values[i].imag > ELLIPTIC_RTOL * scale]
    if len(upper) != 2:
        raise EllipticityError(f'degenerate quadratic part: eigenvalues {np.round(values, 12)}')
    omega = values.imag[upper]
    if abs(omega[0] - omega[1]) <= ELLIPTIC_RTOL * scale:
        raise EllipticityError(f'equal secular frequencies {omega[0]:.6e}; modes cannot be separated')

    modes = []
    for i, w in zip(upper, omega):
        v = vectors[:, i]
        pivot = int(np.argmax(np.abs(v[:2]))) if np.max(np.abs(v[:2])) > 0 else int(np.argmax(np.abs(v)))
        v = v * np.exp(-1j * np.angle(v[pivot]))
        u, y = v.real, v.imag
        s = u @ J @ y
        nu = w
        if s < 0:
            y, nu, s = -y, -w, -s
        u, y = u / np.sqrt(s), y / np.sqrt(s)
        weight = u[0] ** 2 + u[2] ** 2 + y[0] ** 2 + y[2] ** 2
        modes.append((weight, nu, u, y))
    # mode 1 is the one living mostly on planet 1
    modes.sort(key=lambda m: -m[0])
    return modes


@dataclass(frozen=True, eq=False)
class DiagonalizingMap:
    """z = matrix @ w with z = (xi1, xi2, eta1, eta2) and w = (x1, x2, y1, y2)."""
    matrix: np.ndarray
    nu: np.ndarray

    @property
    def inverse(self):
        return -J @ self.matrix.T @ J

    def to_secular(self, x, y):
        z = np.tensordot(self.matrix, np.concatenate([np.asarray(x, float), np.asarray(y, float)]), axes=1)
        return z[:2], z[2:]

    def from_secular(self, xi, eta):
        w = np.tensordot(self.inverse, np.concatenate([np.asarray(xi, float), np.asarray(eta, float)]), axes=1)
        return w[:2], w[2:]

    def transform(self, series, policy=None):
        """The series as a function of (x, y), stored in the (xi, eta) slots."""
        policy = policy or series.policy
        basis = [PoissonSeries.variable(name, policy) for name in SECULAR_NAMES]
        linear = [
            series_sum(
                [PoissonSeries(b.exps, b.parity, b.coef * self.matrix[row, col], policy)
                 for col, b in enumerate(basis) if self.matrix[row, col] != 0.0],
                policy,
            )
            for row in range(4)
        ]
        powers = [[PoissonSeries.constant(1.0, policy)] for _ in range(4)]

        def power(row, e):
            cache = powers[row]
            while len(cache) <= e:
                cache.append(series_mul(cache[-1], linear[row], policy))
            return cache[e]

        pieces = []
        for exps, _, coef in series:
            product = PoissonSeries.constant(coef, policy)
            for row in range(4):
                e = int(exps[2 + row])
                if e:
                    product = series_mul(product, power(row, e), policy)
            pieces.append(product)
        return series_sum(pieces, policy)


def diagonalize_quadratic(h_sec):
    """DiagonalizingMap of a SecularHamiltonian (or of a bare series)."""
    series = getattr(h_sec, 'series', h_sec)
    S = quadratic_matrix(series)
    modes = _normal_modes(S)
    M = np.column_stack([m[2] for m in modes] + [m[3] for m in modes])
    nu = np.array([m[1] for m in modes])

    defect = np.max(np.abs(M.T @ J @ M - J))
    D = M.T @ S @ M
    expected = np.diag(np.concatenate([nu, nu]))
    off = np.max(np.abs(D - expected))
    if defect > DIAGONAL_RTOL * max(1.0, np.max(np.abs(M)) ** 2) or off > DIAGONAL_RTOL * np.max(np.abs(nu)):
        raise EllipticityError(f'diagonalization failed (symplectic defect {defect:.2e}, off-diagonal {off:.2e})')
    logger.info('Secular frequencies nu = (%.6e, %.6e) rad/yr', nu[0], nu[1])
    return DiagonalizingMap(matrix=M, nu=nu)
