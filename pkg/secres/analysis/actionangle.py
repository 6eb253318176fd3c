"""
Action-angle form of series in the diagonal secular variables.

    x_j = rho_j cos(phi_j),    y_j = -rho_j sin(phi_j),    rho_j = sqrt(2 I_j)

(phi_j, I_j) are canonical with the same bracket as (lambda_j, L_j). A series
in action-angle form is a PoissonSeries whose action exponents are powers of
rho_j (not of I_j) and whose harmonics are harmonics of phi. A term
rho_j^n cos(k_j phi_j ...) always has n >= |k_j| and n = k_j mod 2, so it is a
polynomial in (x_j, y_j); half-integer powers of I need no special storage.
"""
import numpy as np

from series.core import (
    COS, SIN, PoissonSeries, TruncationPolicy, evaluate, partial_derivative, series_mul, series_sum,
)


def action_policy(degree):
    """Truncation at total degree ``degree`` in rho, harmonics up to the same order."""
    return TruncationPolicy(max_L_degree=degree, max_sec_degree=0, max_trig_degree=degree)


def _unit(j, parity, coef, policy):
    l = (1, 0) if j == 1 else (0, 1)
    return PoissonSeries.monomial(coef, policy, l=l, k=l, parity=parity)


def cartesian_functions(policy):
    """x1, x2, y1, y2 as action-angle series."""
    return {
        'x1': _unit(1, COS, 1.0, policy),
        'x2': _unit(2, COS, 1.0, policy),
        'y1': _unit(1, SIN, -1.0, policy),
        'y2': _unit(2, SIN, -1.0, policy),
    }


def to_action_angle(f, policy=None):
    """
    Rewrite an even series in (x, y), stored in the (xi, eta) slots, in
    action-angle form.
    """
    if len(f) and (np.any(f.exps[:, :2]) or np.any(f.exps[:, 6:])):
        raise ValueError('expected a series in the secular variables only')
    if np.any(f.sec_degree % 2):
        raise ValueError('odd-degree monomial in a secular series')
    degree = int(f.sec_degree.max()) if len(f) else 2
    policy = policy or action_policy(max(degree, 2))
    base = cartesian_functions(policy)
    powers = {name: [PoissonSeries.constant(1.0, policy)] for name in base}

    def power(name, e):
        cache = powers[name]
        while len(cache) <= e:
            cache.append(series_mul(cache[-1], base[name], policy))
        return cache[e]

    pieces = []
    for exps, _, coef in f:
        p1, p2, q1, q2 = (int(v) for v in exps[2:6])
        planet1 = series_mul(power('x1', p1), power('y1', q1), policy)
        planet2 = series_mul(power('x2', p2), power('y2', q2), policy)
        product = series_mul(planet1, planet2, policy)
        pieces.append(PoissonSeries(product.exps, product.parity, product.coef * coef, policy))
    return series_sum(pieces, policy)


def _weighted(f, j):
    # coefficient times the power of rho_j, exponent unchanged
    n = f.exps[:, j - 1]
    keep = n > 0
    return PoissonSeries(f.exps[keep], f.parity[keep], f.coef[keep] * n[keep], f.policy)


def _lower(f, j, policy):
    exps = f.exps.copy()
    exps[:, j - 1] -= 2
    if np.any(exps[:, j - 1] < 0):
        raise ArithmeticError(f'negative power of rho{j} in an action derivative')
    return PoissonSeries(exps, f.parity, f.coef, policy)


def action_derivative(f, j):
    """d f / d I_j; d(rho^n)/dI = n rho^(n-2)."""
    if not len(f):
        return f
    return _lower(_weighted(f, j), j, f.policy)


def action_bracket(f, g, policy=None):
    """
    {f, g} = sum_j df/dphi_j dg/dI_j - df/dI_j dg/dphi_j.

    Each product is formed before the rho_j^-2 of the action derivative is
    applied; a nonzero product always carries rho_j^2 or more.
    """
    policy = policy or f.policy.coarser(g.policy)
    if not len(f) or not len(g):
        return PoissonSeries.zero(policy)
    wide = policy.with_bounds(max_L_degree=policy.max_L_degree + 2)
    pieces = []
    for j in (1, 2):
        angle = f'lambda{j}'
        products = []
        df, wg = partial_derivative(f, angle), _weighted(g, j)
        if len(df) and len(wg):
            products.append(series_mul(df, wg, wide))
        wf, dg = _weighted(f, j), partial_derivative(g, angle)
        if len(wf) and len(dg):
            product = series_mul(wf, dg, wide)
            products.append(PoissonSeries(product.exps, product.parity, -product.coef, wide))
        if products:
            pieces.append(_lower(series_sum(products, wide), j, policy))
    return series_sum(pieces, policy)


def action_lie_exp(chi, f, order_cap, policy=None):
    """exp(L_chi) f with the action-angle bracket."""
    policy = policy or chi.policy.coarser(f.policy)
    pieces = [f]
    term = f
    for m in range(1, order_cap + 1):
        term = action_bracket(chi, term, policy)
        if term.is_zero():
            break
        term = PoissonSeries(term.exps, term.parity, term.coef / m, policy)
        pieces.append(term)
    return series_sum(pieces, policy)


def by_degree(f, degree):
    """Terms of total degree ``degree`` in rho."""
    if not len(f):
        return f
    return f.select(f.exps[:, 0] + f.exps[:, 1] == degree)


def action_norm(f, rho):
    """Sum of |coef| rho1^n1 rho2^n2."""
    if not len(f):
        return 0.0
    weights = np.power(float(rho[0]), f.exps[:, 0]) * np.power(float(rho[1]), f.exps[:, 1])
    return float(np.sum(np.abs(f.coef) * weights))


def polar(x, y):
    """(rho, phi) of Cartesian pairs."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.hypot(x, y), np.arctan2(-y, x)


def cartesian(rho, phi):
    rho, phi = np.asarray(rho, dtype=float), np.asarray(phi, dtype=float)
    return rho * np.cos(phi), -rho * np.sin(phi)


def evaluate_action_angle(f, rho, phi):
    return evaluate(f, L=rho, lam=phi)
