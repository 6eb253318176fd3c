"""Laplace coefficients and the classical first-order secular matrix."""
import numpy as np
from scipy import integrate

from .elements import G, a_from_lambda, elements_to_poincare


def laplace_coefficient(s, j, alpha):
    """b_s^(j)(alpha) = (1/pi) int_0^2pi cos(j psi) / (1 - 2 alpha cos psi + alpha^2)^s dpsi."""
    if not 0 <= alpha < 1:
        raise ValueError('Laplace coefficients need 0 <= alpha < 1')

    def integrand(psi):
        return np.cos(j * psi) / (1.0 - 2.0 * alpha * np.cos(psi) + alpha ** 2) ** s

    value, _ = integrate.quad(integrand, 0.0, 2.0 * np.pi, epsabs=1e-15, epsrel=1e-14, limit=400)
    return value / np.pi


def laplace_lagrange_matrix(entry, Lambda_star=None):
    """
    Matrix S of the quadratic secular Hamiltonian

        H2 = (xi^T S xi + eta^T S eta) / 2

    in the Laplace-Lagrange approximation, and its eigenvalues.
    """
    m0, m1, m2 = entry.masses
    if Lambda_star is None:
        Lambda_star = elements_to_poincare(entry).Lambda
    a1 = a_from_lambda(m0, m1, Lambda_star[0])
    a2 = a_from_lambda(m0, m2, Lambda_star[1])
    alpha = a1 / a2
    strength = G * m1 * m2 / a2
    b1 = laplace_coefficient(1.5, 1, alpha)
    b2 = laplace_coefficient(1.5, 2, alpha)
    L1, L2 = Lambda_star
    S = np.array([
        [-strength * alpha * b1 / (4.0 * L1), strength * alpha * b2 / (4.0 * np.sqrt(L1 * L2))],
        [strength * alpha * b2 / (4.0 * np.sqrt(L1 * L2)), -strength * alpha * b1 / (4.0 * L2)],
    ])
    return S, np.linalg.eigvalsh(S)
