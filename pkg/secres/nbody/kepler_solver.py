import logging

import numpy as np

from series.exceptions import DomainError, NonConvergenceError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
MAX_NEWTON = 50
MAX_BISECTION = 200


def kepler_solve(M, e, tolerance=1e-15):
    """
    Eccentric anomaly E with E - e sin E = M.

    Newton-Raphson from the usual cubic starting guess, vectorized over
    numpy inputs; entries that have not converged after MAX_NEWTON steps
    are finished by bisection on [M - e, M + e].

    Args:
        M (float or ndarray): mean anomaly (rad), any branch
        e (float or ndarray): eccentricity in [0, 1)

    Returns:
        E (float or ndarray): eccentric anomaly on the same branch as M
    """
    scalar = np.ndim(M) == 0 and np.ndim(e) == 0
    M = np.atleast_1d(np.asarray(M, dtype=float))
    e = np.broadcast_to(np.asarray(e, dtype=float), M.shape)
    if np.any((e < 0) | (e >= 1)):
        raise DomainError('eccentricity must be in [0, 1)')

    turns = np.floor((M + np.pi) / TWO_PI)
    reduced = M - turns * TWO_PI
    E = _newton(reduced, e, tolerance)
    E = E + turns * TWO_PI
    return float(E[0]) if scalar else E.reshape(np.shape(M))


def _newton(M, e, tolerance):
    E = np.where(e > 0.8, np.sign(M) * np.pi, M + e * np.sin(M))
    converged = np.zeros(M.shape, dtype=bool)
    for _ in range(MAX_NEWTON):
        f = E - e * np.sin(E) - M
        step = f / (1.0 - e * np.cos(E))
        E = np.where(converged, E, E - step)
        converged |= np.abs(step) <= tolerance * np.maximum(1.0, np.abs(E))
        if converged.all():
            break
    residual = np.abs(E - e * np.sin(E) - M)
    stuck = ~converged | (residual > 1e-13)
    if np.any(stuck):
        logger.debug('Kepler solver: %d entries finished by bisection', int(stuck.sum()))
        E[stuck] = _bisect(M[stuck], e[stuck])
    return E


def _bisect(M, e):
    low = M - e
    high = M + e
    for _ in range(MAX_BISECTION):
        mid = 0.5 * (low + high)
        above = mid - e * np.sin(mid) - M > 0
        high = np.where(above, mid, high)
        low = np.where(above, low, mid)
        if np.all(high - low <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            break
    else:
        raise NonConvergenceError('Kepler equation bisection did not converge')
    return 0.5 * (low + high)
