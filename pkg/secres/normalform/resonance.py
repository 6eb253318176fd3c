"""Choice of the mean-motion resonance that sets the truncation orders K_F, K_S."""
import logging
from dataclasses import dataclass, replace
from math import exp, gcd

from series.conf import tunable
from series.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResonanceChoice:
    """
    Nearest low-order resonance k* = (k1, -k2) and the truncation it implies:
    K_F = |k*|_1, K_S = |k1 - k2|. Explicit overrides may set K_F, K_S to
    other values; k* and the small divisor are kept for reporting.
    """
    k_star: tuple
    K_F: int
    K_S: int
    small_divisor: float

    def __post_init__(self):
        for name in ('K_F', 'K_S'):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f'{name} must be a non-negative integer, got {value!r}')

    @property
    def label(self):
        """Period ratio as 'k2:k1', e.g. '5:1'."""
        k1, k2 = self.k_star
        return f'{-k2}:{k1}'

    def with_truncation(self, K_F=None, K_S=None):
        changes = {}
        if K_F is not None:
            changes['K_F'] = int(K_F)
        if K_S is not None:
            changes['K_S'] = int(K_S)
        return replace(self, **changes) if changes else self


def select_resonance(n_star, kmax=None, sigma=None):
    """
    Coprime (k1, k2) with 2 <= k1 + k2 <= kmax minimizing
    |k1 n1 - k2 n2| exp(sigma (k1 + k2)); ties go to the lower order, then
    to the smaller k2.
    """
    n1, n2 = (float(v) for v in n_star)
    if not (n1 > 0 and n2 > 0):
        raise DomainError('mean motions must be positive to select a resonance')
    kmax = tunable('RESONANCE_KMAX') if kmax is None else int(kmax)
    sigma = tunable('RESONANCE_SIGMA') if sigma is None else float(sigma)
    if kmax < 2:
        raise ValueError('kmax must be at least 2')

    best = None
    for order in range(2, kmax + 1):
        for k1 in range(1, order):
            k2 = order - k1
            if gcd(k1, k2) != 1:
                continue
            divisor = k1 * n1 - k2 * n2
            rank = (abs(divisor) * exp(sigma * order), order, k2)
            if best is None or rank < best[0]:
                best = (rank, k1, k2, divisor)

    _, k1, k2, divisor = best
    K_F, K_S = k1 + k2, abs(k1 - k2)
    cap = tunable('KF_CAP')
    if K_F > cap:
        logger.warning(
            'Nearest resonance %d:%d has order %d above KF_CAP=%d; using K_F=%d, K_S=%d',
            k2, k1, K_F, cap, tunable('DEFAULT_KF'), tunable('DEFAULT_KS'),
        )
        K_F, K_S = tunable('DEFAULT_KF'), tunable('DEFAULT_KS')
    choice = ResonanceChoice(k_star=(k1, -k2), K_F=K_F, K_S=K_S, small_divisor=divisor)
    logger.info(
        'Nearest resonance %s (small divisor %.3e rad/yr): K_F=%d, K_S=%d',
        choice.label, divisor, K_F, K_S,
    )
    return choice
