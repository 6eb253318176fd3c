"""
Truncated Poisson series in the variables of the planar two-planet problem.

A term of a series is

    coef * L1^l1 L2^l2 xi1^p1 xi2^p2 eta1^q1 eta2^q2 * trig(k1*lambda1 + k2*lambda2)

with ``trig`` either cos (parity 0) or sin (parity 1). Terms are stored column
wise in numpy arrays and identified by a packed int64 key, so that collecting
like terms is a single ``np.unique`` + ``np.bincount`` pass. Harmonics are kept
in canonical form: k = (0, 0) only with cos, otherwise the first nonzero entry
of k is positive (the sign goes into the coefficient of sin terms).

Series are immutable; every operation returns a new series.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import NonConvergenceError, ResonantDivisorError

logger = logging.getLogger(__name__)

COLUMNS = ('l1', 'l2', 'p1', 'p2', 'q1', 'q2', 'k1', 'k2')
COS, SIN = 0, 1
PARITY_NAMES = {COS: 'cos', SIN: 'sin'}

# column of each variable in the exponent table
VARIABLES = {
    'L1': 0, 'L2': 1,
    'xi1': 2, 'xi2': 3,
    'eta1': 4, 'eta2': 5,
    'lambda1': 6, 'lambda2': 7,
}
CONJUGATE = {'xi1': 'eta1', 'xi2': 'eta2', 'eta1': 'xi1', 'eta2': 'xi2'}

MAX_EXPONENT = 60
MAX_HARMONIC = 60
_EXP_BITS = 6
_K_BITS = 7
_K_OFFSET = 64

# number of candidate term pairs handled per batch in products
PAIR_BATCH = 1 << 21


@dataclass(frozen=True)
class TruncationPolicy:
    """Degree bounds applied to every series a computation produces."""
    max_L_degree: int = 2
    max_sec_degree: int = 12
    max_trig_degree: int = 12

    def __post_init__(self):
        for name in ('max_L_degree', 'max_sec_degree', 'max_trig_degree'):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f'{name} must be a non-negative integer, got {value!r}')
        if max(self.max_L_degree, self.max_sec_degree) > MAX_EXPONENT:
            raise ValueError(f'degrees above {MAX_EXPONENT} are not supported')
        if self.max_trig_degree > MAX_HARMONIC:
            raise ValueError(f'trigonometric degree above {MAX_HARMONIC} is not supported')

    def coarser(self, other):
        """The tighter of the two policies, bound by bound."""
        return TruncationPolicy(
            max_L_degree=min(self.max_L_degree, other.max_L_degree),
            max_sec_degree=min(self.max_sec_degree, other.max_sec_degree),
            max_trig_degree=min(self.max_trig_degree, other.max_trig_degree),
        )

    def with_bounds(self, **bounds):
        return replace(self, **bounds)

    def admits(self, exps):
        """Boolean mask of the rows of an exponent table inside the bounds."""
        exps = np.asarray(exps)
        return (
            (exps[:, 0] + exps[:, 1] <= self.max_L_degree)
            & (exps[:, 2:6].sum(axis=1) <= self.max_sec_degree)
            & (np.abs(exps[:, 6]) + np.abs(exps[:, 7]) <= self.max_trig_degree)
        )


def _pack(exps, parity):
    key = np.zeros(len(parity), dtype=np.int64)
    for col in range(6):
        key = (key << _EXP_BITS) | exps[:, col]
    for col in (6, 7):
        key = (key << _K_BITS) | (exps[:, col] + _K_OFFSET)
    return (key << 1) | parity


def _unpack(keys):
    parity = keys & 1
    rest = keys >> 1
    exps = np.empty((len(keys), 8), dtype=np.int64)
    for col in (7, 6):
        exps[:, col] = (rest & ((1 << _K_BITS) - 1)) - _K_OFFSET
        rest = rest >> _K_BITS
    for col in range(5, -1, -1):
        exps[:, col] = rest & ((1 << _EXP_BITS) - 1)
        rest = rest >> _EXP_BITS
    return exps, parity


def _normalize(exps, parity, coef, policy, drop_tol):
    """Canonical harmonics, policy truncation and like-term collection."""
    if len(coef) == 0:
        return np.empty(0, dtype=np.int64), np.empty((0, 8), dtype=np.int64), \
            np.empty(0, dtype=np.int64), np.empty(0)
    if np.any(exps[:, :6] < 0):
        raise ValueError('negative exponent in Poisson series term')

    k1 = exps[:, 6]
    k2 = exps[:, 7]
    flip = (k1 < 0) | ((k1 == 0) & (k2 < 0))
    if np.any(flip):
        exps = exps.copy()
        exps[flip, 6:] *= -1
        coef = np.where(flip & (parity == SIN), -coef, coef)

    keep = ~((parity == SIN) & (exps[:, 6] == 0) & (exps[:, 7] == 0))
    keep &= policy.admits(exps)
    if not np.all(keep):
        exps, parity, coef = exps[keep], parity[keep], coef[keep]

    keys = _pack(exps, parity)
    unique, inverse = np.unique(keys, return_inverse=True)
    summed = np.bincount(inverse.reshape(-1), weights=coef, minlength=len(unique))
    if drop_tol > 0:
        nonzero = np.abs(summed) > drop_tol
    else:
        nonzero = summed != 0
    unique = unique[nonzero]
    exps, parity = _unpack(unique)
    return unique, exps, parity, summed[nonzero]


class PoissonSeries:
    """Immutable sparse Taylor-Fourier series (see the module docstring)."""

    __slots__ = ('keys', 'exps', 'parity', 'coef', 'policy')

    def __init__(self, exps, parity, coef, policy, drop_tol=0.0):
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, 8)
        parity = np.asarray(parity, dtype=np.int64).reshape(-1)
        coef = np.asarray(coef, dtype=float).reshape(-1)
        if not (len(exps) == len(parity) == len(coef)):
            raise ValueError('exps, parity and coef must have the same length')
        keys, exps, parity, coef = _normalize(exps, parity, coef, policy, drop_tol)
        self._assign(keys, exps, parity, coef, policy)

    def _assign(self, keys, exps, parity, coef, policy):
        for array in (keys, exps, parity, coef):
            array.setflags(write=False)
        object.__setattr__(self, 'keys', keys)
        object.__setattr__(self, 'exps', exps)
        object.__setattr__(self, 'parity', parity)
        object.__setattr__(self, 'coef', coef)
        object.__setattr__(self, 'policy', policy)

    def __setattr__(self, name, value):
        raise AttributeError('PoissonSeries is immutable')

    @classmethod
    def _from_normalized(cls, keys, exps, parity, coef, policy):
        series = cls.__new__(cls)
        series._assign(keys, exps, parity, coef, policy)
        return series

    # constructors

    @classmethod
    def zero(cls, policy):
        return cls(np.empty((0, 8)), [], [], policy)

    @classmethod
    def constant(cls, value, policy):
        return cls(np.zeros((1, 8)), [COS], [value], policy)

    @classmethod
    def monomial(cls, coef, policy, l=(0, 0), p=(0, 0), q=(0, 0), k=(0, 0), parity=COS):
        if isinstance(parity, str):
            parity = {'cos': COS, 'sin': SIN}[parity]
        row = [*l, *p, *q, *k]
        return cls([row], [parity], [coef], policy)

    @classmethod
    def variable(cls, name, policy, coef=1.0):
        """The coordinate function L_j, xi_j or eta_j as a series."""
        col = VARIABLES[name]
        if col >= 6:
            raise ValueError(f'{name} is an angle and has no polynomial series')
        row = np.zeros((1, 8), dtype=np.int64)
        row[0, col] = 1
        return cls(row, [COS], [coef], policy)

    @classmethod
    def from_terms(cls, terms, policy):
        """Build from ``(exponents8, parity, coef)`` triples."""
        terms = list(terms)
        if not terms:
            return cls.zero(policy)
        exps = np.array([t[0] for t in terms], dtype=np.int64)
        parity = np.array([t[1] for t in terms], dtype=np.int64)
        coef = np.array([t[2] for t in terms], dtype=float)
        return cls(exps, parity, coef, policy)

    # inspection

    def __len__(self):
        return len(self.coef)

    def __iter__(self):
        for row, par, c in zip(self.exps, self.parity, self.coef):
            yield tuple(int(v) for v in row), int(par), float(c)

    def __repr__(self):
        return f'<PoissonSeries {len(self)} terms, {self.policy}>'

    def is_zero(self):
        return len(self.coef) == 0

    @property
    def l_degree(self):
        return self.exps[:, 0] + self.exps[:, 1]

    @property
    def sec_degree(self):
        return self.exps[:, 2:6].sum(axis=1)

    @property
    def trig_degree(self):
        return np.abs(self.exps[:, 6]) + np.abs(self.exps[:, 7])

    def max_abs(self):
        return float(np.max(np.abs(self.coef))) if len(self) else 0.0

    def coefficient(self, l=(0, 0), p=(0, 0), q=(0, 0), k=(0, 0), parity=COS):
        """Coefficient of one term, with the harmonic given in any sign."""
        if isinstance(parity, str):
            parity = {'cos': COS, 'sin': SIN}[parity]
        k1, k2 = k
        sign = 1.0
        if k1 < 0 or (k1 == 0 and k2 < 0):
            k1, k2 = -k1, -k2
            if parity == SIN:
                sign = -1.0
        if parity == SIN and k1 == 0 and k2 == 0:
            return 0.0
        row = np.array([[*l, *p, *q, k1, k2]], dtype=np.int64)
        if np.any(row[:, :6] < 0) or np.any(row[:, :6] >= 1 << _EXP_BITS):
            return 0.0
        key = _pack(row, np.array([parity], dtype=np.int64))[0]
        pos = np.searchsorted(self.keys, key)
        if pos < len(self.keys) and self.keys[pos] == key:
            return sign * float(self.coef[pos])
        return 0.0

    def select(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return PoissonSeries._from_normalized(
            self.keys[mask], self.exps[mask], self.parity[mask], self.coef[mask], self.policy,
        )

    def harmonics(self):
        """Distinct canonical harmonics present, as an (n, 2) array."""
        if not len(self):
            return np.empty((0, 2), dtype=np.int64)
        return np.unique(self.exps[:, 6:], axis=0)

    # arithmetic sugar

    def __add__(self, other):
        if isinstance(other, PoissonSeries):
            return series_add(self, other)
        return series_add(self, PoissonSeries.constant(other, self.policy))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, PoissonSeries):
            return series_sub(self, other)
        return series_add(self, PoissonSeries.constant(-other, self.policy))

    def __rsub__(self, other):
        return series_add(-self, PoissonSeries.constant(other, self.policy))

    def __mul__(self, other):
        if isinstance(other, PoissonSeries):
            return series_mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)


def _concat(series_list, policy, drop_tol=0.0):
    series_list = [s for s in series_list if len(s)]
    if not series_list:
        return PoissonSeries.zero(policy)
    return PoissonSeries(
        np.concatenate([s.exps for s in series_list]),
        np.concatenate([s.parity for s in series_list]),
        np.concatenate([s.coef for s in series_list]),
        policy,
        drop_tol=drop_tol,
    )


def series_add(a, b):
    """Coefficient-wise sum, truncated to the tighter of the two policies."""
    policy = a.policy.coarser(b.policy)
    return _concat([a, b], policy)


def series_sum(series_list, policy):
    """Sum of many series in one collection pass."""
    return _concat(list(series_list), policy)


def series_sub(a, b):
    return series_add(a, scale(b, -1.0))


def scale(a, factor):
    if factor == 0 or not len(a):
        return PoissonSeries.zero(a.policy)
    return PoissonSeries._from_normalized(a.keys, a.exps, a.parity, a.coef * factor, a.policy)


def truncate(a, policy):
    """Keep the terms admitted by ``policy`` and adopt it."""
    mask = policy.admits(a.exps) if len(a) else np.zeros(0, dtype=bool)
    kept = a.select(mask)
    return PoissonSeries._from_normalized(kept.keys, kept.exps, kept.parity, kept.coef, policy)


def cleanup(a, tol, relative=True):
    """Drop coefficients at or below ``tol`` (times the largest one when relative)."""
    if tol <= 0 or not len(a):
        return a
    limit = tol * a.max_abs() if relative else tol
    return a.select(np.abs(a.coef) > limit)


def _sort_by_harmonic(s):
    hid = (s.exps[:, 6] + _K_OFFSET) * (1 << _K_BITS) + (s.exps[:, 7] + _K_OFFSET)
    order = np.argsort(hid, kind='stable')
    hid = hid[order]
    _, starts, counts = np.unique(hid, return_index=True, return_counts=True)
    harmonics = s.exps[order][starts, 6:]
    return order, harmonics, starts, counts


def _prefilter(x, other, policy):
    keep = (
        (x.l_degree + other.l_degree.min() <= policy.max_L_degree)
        & (x.sec_degree + other.sec_degree.min() <= policy.max_sec_degree)
        & (x.trig_degree - other.trig_degree.max() <= policy.max_trig_degree)
    )
    return x if np.all(keep) else x.select(keep)


def series_mul(a, b, policy=None):
    """
    Product of two series with the product-to-sum identities applied.

    Candidate term pairs are enumerated harmonic by harmonic, skipping
    harmonic pairs whose sum and difference both exceed the trigonometric
    bound, and truncated in degree before any output term is formed.
    """
    if policy is None:
        policy = a.policy.coarser(b.policy)
    if not len(a) or not len(b):
        return PoissonSeries.zero(policy)
    a = _prefilter(a, b, policy)
    if not len(a):
        return PoissonSeries.zero(policy)
    b = _prefilter(b, a, policy)
    if not len(a) or not len(b):
        return PoissonSeries.zero(policy)

    order_a, harm_a, start_a, count_a = _sort_by_harmonic(a)
    order_b, harm_b, start_b, count_b = _sort_by_harmonic(b)
    ea, pa, ca = a.exps[order_a], a.parity[order_a], a.coef[order_a]
    eb, pb, cb = b.exps[order_b], b.parity[order_b], b.coef[order_b]
    la, sa = ea[:, :2].sum(axis=1), ea[:, 2:6].sum(axis=1)
    lb, sb = eb[:, :2].sum(axis=1), eb[:, 2:6].sum(axis=1)

    trig = policy.max_trig_degree
    hsum = harm_a[:, None, :] + harm_b[None, :, :]
    hdiff = harm_a[:, None, :] - harm_b[None, :, :]
    allowed = (np.abs(hsum).sum(axis=2) <= trig) | (np.abs(hdiff).sum(axis=2) <= trig)
    ga, gb = np.nonzero(allowed)
    if not len(ga):
        return PoissonSeries.zero(policy)

    sizes = count_a[ga] * count_b[gb]
    cumulative = np.cumsum(sizes)
    result = PoissonSeries.zero(policy)
    first = 0
    while first < len(ga):
        offset = cumulative[first - 1] if first else 0
        last = int(np.searchsorted(cumulative, offset + PAIR_BATCH, side='right'))
        last = max(last, first + 1)
        batch = _batch_products(
            ga[first:last], gb[first:last], sizes[first:last],
            start_a, count_b, start_b,
            (ea, pa, ca, la, sa), (eb, pb, cb, lb, sb), policy,
        )
        if batch is not None:
            result = _concat([result, batch], policy)
        first = last
    return result


def _batch_products(ga, gb, sizes, start_a, count_b, start_b, side_a, side_b, policy):
    ea, pa, ca, la, sa = side_a
    eb, pb, cb, lb, sb = side_b
    total = int(sizes.sum())
    pair = np.repeat(np.arange(len(sizes)), sizes)
    local = np.arange(total) - (np.cumsum(sizes) - sizes)[pair]
    width = count_b[gb][pair]
    i = start_a[ga][pair] + local // width
    j = start_b[gb][pair] + local % width

    ok = (la[i] + lb[j] <= policy.max_L_degree) & (sa[i] + sb[j] <= policy.max_sec_degree)
    i, j = i[ok], j[ok]
    if not len(i):
        return None

    mono = ea[i, :6] + eb[j, :6]
    ka, kb = ea[i, 6:], eb[j, 6:]
    par_a, par_b = pa[i], pb[j]
    half = 0.5 * ca[i] * cb[j]
    parity = par_a ^ par_b
    trig = policy.max_trig_degree

    k_sum = ka + kb
    in_sum = np.abs(k_sum).sum(axis=1) <= trig
    sign_sum = np.where((par_a == SIN) & (par_b == SIN), -1.0, 1.0)
    k_diff = ka - kb
    in_diff = np.abs(k_diff).sum(axis=1) <= trig
    sign_diff = np.where((par_a == COS) & (par_b == SIN), -1.0, 1.0)

    exps = np.concatenate([
        np.hstack([mono[in_sum], k_sum[in_sum]]),
        np.hstack([mono[in_diff], k_diff[in_diff]]),
    ])
    parities = np.concatenate([parity[in_sum], parity[in_diff]])
    coefs = np.concatenate([(sign_sum * half)[in_sum], (sign_diff * half)[in_diff]])
    return PoissonSeries(exps, parities, coefs, policy)


def partial_derivative(f, variable):
    """Term-wise derivative with respect to 'L1', 'lambda2', 'xi1', 'eta2', ..."""
    col = VARIABLES[variable]
    if not len(f):
        return f
    exps = f.exps.copy()
    if col < 6:
        power = f.exps[:, col]
        mask = power > 0
        exps[:, col] -= 1
        return PoissonSeries(exps[mask], f.parity[mask], (f.coef * power)[mask], f.policy)
    k = exps[:, col]
    mask = k != 0
    coef = np.where(f.parity == COS, -k * f.coef, k * f.coef)
    return PoissonSeries(exps[mask], (1 - f.parity)[mask], coef[mask], f.policy)


_PAIRS = (
    ('lambda1', 'L1'), ('lambda2', 'L2'),
    ('xi1', 'eta1'), ('xi2', 'eta2'),
)


def poisson_bracket(f, g, policy=None):
    """
    {f, g} with coordinates (lambda, xi) and momenta (L, eta):

        sum_j df/dlambda_j dg/dL_j - df/dL_j dg/dlambda_j
            + df/dxi_j dg/deta_j - df/deta_j dg/dxi_j
    """
    if policy is None:
        policy = f.policy.coarser(g.policy)
    if not len(f) or not len(g):
        return PoissonSeries.zero(policy)
    pieces = []
    for q, p in _PAIRS:
        dfq = partial_derivative(f, q)
        dgp = partial_derivative(g, p)
        if len(dfq) and len(dgp):
            pieces.append(series_mul(dfq, dgp, policy))
        dfp = partial_derivative(f, p)
        dgq = partial_derivative(g, q)
        if len(dfp) and len(dgq):
            pieces.append(scale(series_mul(dfp, dgq, policy), -1.0))
    return series_sum(pieces, policy)


def bracket_with_angle(f, j):
    """{f, lambda_j} = -df/dL_j; the angle itself is not a Poisson series."""
    return scale(partial_derivative(f, f'L{j}'), -1.0)


def _check_growth(norms, label):
    if len(norms) >= 4 and all(norms[-i] > norms[-i - 1] for i in range(1, 4)):
        raise NonConvergenceError(
            f'{label}: bracket norms grew for three consecutive orders '
            f'({", ".join(f"{v:.3e}" for v in norms[-4:])})'
        )


def lie_increment(chi, g, order_cap, policy=None, rho=None, tolerance=0.0):
    """
    sum_{m>=1} (1/m!) L_chi^(m-1) g, with L_chi = {chi, .}.

    With g = {chi, f} this is exp(L_chi) f - f; with g = {chi, lambda_j}
    it is the increment of the angle lambda_j under the transformation.

    Term sizes are polydisk norms at ``rho`` (plain coefficient sums when it
    is None); the series stops once a term falls below ``tolerance`` times
    the first one.
    """
    if policy is None:
        policy = chi.policy.coarser(g.policy)
    if order_cap < 1:
        raise ValueError('order_cap must be at least 1')

    def size(s):
        return float(np.abs(s.coef).sum()) if rho is None else norm(s, rho)

    pieces = [g]
    norms = [size(g)]
    term = g
    for m in range(2, order_cap + 1):
        if term.is_zero():
            break
        term = scale(poisson_bracket(chi, term, policy), 1.0 / m)
        if term.is_zero():
            break
        pieces.append(term)
        norms.append(size(term))
        _check_growth(norms, 'lie series')
        if norms[-1] <= tolerance * norms[0]:
            break
    return series_sum(pieces, policy)


def lie_exp(chi, f, order_cap, policy=None, rho=None, tolerance=0.0):
    """exp(L_chi) f = f + {chi, f} + 1/2 {chi, {chi, f}} + ..."""
    if policy is None:
        policy = chi.policy.coarser(f.policy)
    if chi.is_zero():
        return truncate(f, policy)
    first = poisson_bracket(chi, f, policy)
    if first.is_zero():
        return truncate(f, policy)
    return series_add(truncate(f, policy), lie_increment(chi, first, order_cap, policy, rho, tolerance))


def angle_average(f):
    """Keep the k = (0, 0) terms."""
    if not len(f):
        return f
    return f.select((f.exps[:, 6] == 0) & (f.exps[:, 7] == 0))


def fourier_slice(f, K_F):
    """Keep the harmonics with 0 < |k|_1 <= K_F."""
    if not len(f):
        return f
    trig = f.trig_degree
    return f.select((trig > 0) & (trig <= K_F))


def restrict_L(f, degree=0):
    """Terms of total degree ``degree`` in the fast actions."""
    if not len(f):
        return f
    return f.select(f.l_degree == degree)


def restrict_sec(f, max_degree=None, degree=None):
    if not len(f):
        return f
    sec = f.sec_degree
    if degree is not None:
        return f.select(sec == degree)
    return f.select(sec <= max_degree)


def solve_angle_homological(f, freqs, floor):
    """
    Solve sum_j freqs_j d(chi)/d(angle_j) + f = 0 harmonic by harmonic.

    cos(k.a) with coefficient A gives -A/(k.freqs) sin(k.a); sin(k.a) gives
    +A/(k.freqs) cos(k.a). ``f`` must have no k = 0 term.
    """
    if not len(f):
        return f
    k = f.exps[:, 6:]
    if np.any((k[:, 0] == 0) & (k[:, 1] == 0)):
        raise ValueError('homological right-hand side has a nonzero angle average')
    divisor = k[:, 0] * freqs[0] + k[:, 1] * freqs[1]
    small = np.abs(divisor) < floor
    if np.any(small):
        worst = int(np.argmin(np.abs(divisor)))
        raise ResonantDivisorError(k[worst], divisor[worst], floor)
    coef = np.where(f.parity == COS, -f.coef / divisor, f.coef / divisor)
    return PoissonSeries(f.exps, 1 - f.parity, coef, f.policy)


def _harmonic_mask(f, k):
    k1, k2 = k
    if k1 < 0 or (k1 == 0 and k2 < 0):
        k1, k2 = -k1, -k2
    return (f.exps[:, 6] == k1) & (f.exps[:, 7] == k2)


def _weights(f, rho):
    rho1, rho2 = rho
    return (
        np.power(float(rho1), f.exps[:, 2] + f.exps[:, 4])
        * np.power(float(rho2), f.exps[:, 3] + f.exps[:, 5])
    )


def polydisk_norm(f, k, rho):
    """
    Sum of |coef| rho1^(p1+q1) rho2^(p2+q2) over the terms of harmonic +-k,
    both parities. Exponents of L are ignored.
    """
    if not len(f):
        return 0.0
    mask = _harmonic_mask(f, k)
    return float(np.sum(np.abs(f.coef[mask]) * _weights(f, rho)[mask]))


def harmonic_norms(f, rho):
    """Polydisk norm of every harmonic present, as {(k1, k2): norm}."""
    if not len(f):
        return {}
    weighted = np.abs(f.coef) * _weights(f, rho)
    harmonics, inverse = np.unique(f.exps[:, 6:], axis=0, return_inverse=True)
    sums = np.bincount(inverse.reshape(-1), weights=weighted, minlength=len(harmonics))
    return {(int(h[0]), int(h[1])): float(v) for h, v in zip(harmonics, sums)}


def norm(f, rho=(1.0, 1.0)):
    """Polydisk norm summed over all harmonics."""
    if not len(f):
        return 0.0
    return float(np.sum(np.abs(f.coef) * _weights(f, rho)))


EVAL_CHUNK = 1 << 14


def evaluate(f, L=(0.0, 0.0), lam=(0.0, 0.0), xi=(0.0, 0.0), eta=(0.0, 0.0)):
    """
    Numeric value of the series. Each argument is a pair, either of scalars
    or of equal-length arrays (a batch of states).
    """
    L, lam, xi, eta = (np.asarray(v, dtype=float) for v in (L, lam, xi, eta))
    scalar = L.ndim == 1 and lam.ndim == 1 and xi.ndim == 1 and eta.ndim == 1
    values = np.stack(np.broadcast_arrays(
        *(v.reshape(2, -1) for v in (L, xi, eta, lam))
    ))
    # rows: L1 L2 xi1 xi2 eta1 eta2 lambda1 lambda2
    variables = values.reshape(8, -1)
    total = np.zeros(variables.shape[1])
    for first in range(0, len(f), EVAL_CHUNK):
        exps = f.exps[first:first + EVAL_CHUNK]
        term = np.ones((len(exps), variables.shape[1]))
        for col in range(6):
            power = exps[:, col]
            if np.any(power):
                term *= np.power(variables[col][None, :], power[:, None])
        phase = exps[:, 6:7] * variables[6][None, :] + exps[:, 7:8] * variables[7][None, :]
        trig = np.where(f.parity[first:first + EVAL_CHUNK, None] == COS, np.cos(phase), np.sin(phase))
        total += (f.coef[first:first + EVAL_CHUNK, None] * term * trig).sum(axis=0)
    return float(total[0]) if scalar else total


def check_dalembert(f):
    """Mask of terms violating the d'Alembert rule for the characteristic k1 + k2."""
    characteristic = np.abs(f.exps[:, 6] + f.exps[:, 7])
    sec = f.sec_degree
    return (sec < characteristic) | ((sec - characteristic) % 2 != 0)
