"""
Complex two-planet series sampled on a grid of the synodic angle psi = lambda1 - lambda2.

A term carries a key (l1, l2, a1, b1, a2, b2) standing for

    L1^l1 L2^l2 Z1^a1 conj(Z1)^b1 Z2^a2 conj(Z2)^b2,     Z_j = xi_j + i eta_j

and a function g(psi) stored by its values at N equispaced points. Every
series has a charge Q (1 for positions, -1 for their conjugates, 0 for the
Hamiltonian); the dependence on lambda2 is then implied by rotation
invariance as exp(i (Q - c) lambda2) with c = a1 - b1 + a2 - b2. Products
multiply the samples pointwise, so the Fourier content in psi is only
extracted once, by an FFT at the very end.
"""
import logging
from functools import lru_cache

import numpy as np

from series.core import COS, SIN, PoissonSeries

from .orbit import zpower_expansion

logger = logging.getLogger(__name__)

_L_KEYS = ((0, 0), (1, 0), (0, 1))
_RADIX = 16
# complex entries materialized per product chunk
PRODUCT_CHUNK = 1 << 22
# spectral coefficients below this fraction of their row maximum are FFT noise
FFT_NOISE = 1e-15


def _code(keys):
    keys = np.asarray(keys, dtype=np.int64)
    code = keys[..., 0] * 2 + keys[..., 1]
    for col in range(2, 6):
        code = code * _RADIX + keys[..., col]
    return code


class KeySpace:
    """Every key with L-degree at most 1 and secular degree at most ``degree``."""

    def __init__(self, degree):
        if degree >= _RADIX:
            raise ValueError(f'secular degree above {_RADIX - 1} is not supported')
        self.degree = degree
        keys = []
        for sec in range(degree + 1):
            for l_key in _L_KEYS:
                for a1 in range(sec + 1):
                    for b1 in range(sec + 1 - a1):
                        for a2 in range(sec + 1 - a1 - b1):
                            keys.append((*l_key, a1, b1, a2, sec - a1 - b1 - a2))
        self.keys = np.array(keys, dtype=np.int64)
        self.size = len(keys)
        self.sec = self.keys[:, 2:].sum(axis=1)
        self.ldeg = self.keys[:, 0] + self.keys[:, 1]
        self.charge = self.keys[:, 2] - self.keys[:, 3] + self.keys[:, 4] - self.keys[:, 5]
        self._lookup = np.full(4 * _RADIX ** 4, -1, dtype=np.int64)
        self._lookup[_code(self.keys)] = np.arange(self.size)
        swapped = self.keys[:, [0, 1, 3, 2, 5, 4]]
        self.conjugate_index = self._lookup[_code(swapped)]
        self._pairs = None

    def index(self, key):
        return int(self._lookup[_code(np.array(key))])

    @property
    def pairs(self):
        """(i, j, out) for every pair of keys whose product is in the space, sorted by out."""
        if self._pairs is None:
            self._pairs = self._build_pairs()
        return self._pairs

    def _build_pairs(self):
        # keys are ordered by secular degree, so the partners of key i form a prefix
        upto = np.searchsorted(self.sec, np.arange(self.degree + 1), side='right')
        firsts, seconds, outs = [], [], []
        for i in range(self.size):
            stop = upto[self.degree - self.sec[i]]
            partners = self.keys[:stop]
            summed = partners + self.keys[i]
            ok = (summed[:, 0] + summed[:, 1]) <= 1
            j = np.nonzero(ok)[0]
            firsts.append(np.full(len(j), i, dtype=np.int64))
            seconds.append(j)
            outs.append(self._lookup[_code(summed[ok])])
        first = np.concatenate(firsts)
        second = np.concatenate(seconds)
        out = np.concatenate(outs)
        order = np.argsort(out, kind='stable')
        logger.debug('Key space of degree %d: %d keys, %d product pairs', self.degree, self.size, len(out))
        return first[order], second[order], out[order]


@lru_cache(maxsize=4)
def key_space(degree):
    return KeySpace(degree)


def psi_grid(samples):
    return 2.0 * np.pi * np.arange(samples) / samples


class SampledSeries:
    """Sparse rows of a KeySpace, each a sampled function of psi."""

    __slots__ = ('space', 'rows', 'values', 'charge')

    def __init__(self, space, rows, values, charge):
        self.space = space
        self.rows = np.asarray(rows, dtype=np.int64)
        self.values = np.asarray(values, dtype=complex)
        self.charge = charge

    @property
    def samples(self):
        return self.values.shape[1]

    @classmethod
    def from_dense(cls, space, dense, charge):
        rows = np.nonzero(np.any(dense != 0, axis=1))[0]
        return cls(space, rows, dense[rows], charge)

    def dense(self, samples=None):
        out = np.zeros((self.space.size, samples or self.samples), dtype=complex)
        out[self.rows] = self.values
        return out

    def row(self, key):
        index = self.space.index(key)
        hit = np.nonzero(self.rows == index)[0]
        if not len(hit):
            return np.zeros(self.samples, dtype=complex)
        return self.values[hit[0]]

    def scale(self, factor):
        return SampledSeries(self.space, self.rows, self.values * factor, self.charge)

    def times_function(self, samples):
        """Pointwise product with a function of psi only."""
        return SampledSeries(self.space, self.rows, self.values * samples[None, :], self.charge)

    def conjugate(self):
        rows = self.space.conjugate_index[self.rows]
        order = np.argsort(rows)
        return SampledSeries(self.space, rows[order], np.conj(self.values[order]), -self.charge)

    def without_row(self, key):
        index = self.space.index(key)
        keep = self.rows != index
        return SampledSeries(self.space, self.rows[keep], self.values[keep], self.charge)

    def __add__(self, other):
        if other.charge != self.charge:
            raise ValueError('cannot add sampled series of different charge')
        dense = self.dense()
        dense[other.rows] += other.values
        return SampledSeries.from_dense(self.space, dense, self.charge)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __mul__(self, other):
        return multiply(self, other)


def _positions(space, rows):
    pos = np.full(space.size, -1, dtype=np.int64)
    pos[rows] = np.arange(len(rows))
    return pos


def multiply(f, g):
    """Truncated product; pairs leaving the key space are dropped."""
    space = f.space
    samples = f.samples
    first, second, out = space.pairs
    pos_f = _positions(space, f.rows)
    pos_g = _positions(space, g.rows)
    keep = (pos_f[first] >= 0) & (pos_g[second] >= 0)
    ii, jj, oo = pos_f[first[keep]], pos_g[second[keep]], out[keep]
    dense = np.zeros((space.size, samples), dtype=complex)
    chunk = max(1, PRODUCT_CHUNK // samples)
    for start in range(0, len(oo), chunk):
        stop = start + chunk
        products = f.values[ii[start:stop]] * g.values[jj[start:stop]]
        targets, offsets = np.unique(oo[start:stop], return_index=True)
        dense[targets] += np.add.reduceat(products, offsets, axis=0)
    return SampledSeries.from_dense(space, dense, f.charge + g.charge)


def from_orbit(space, terms, planet_index, samples, charge=1):
    """
    Sample one planet's complex orbit terms (see kepler.orbit.complex_orbit).
    Planet-1 harmonics become exp(i k psi); planet-2 ones are implied by the charge.
    """
    psi = psi_grid(samples)
    dense = np.zeros((space.size, samples), dtype=complex)
    for term in terms:
        if planet_index == 1:
            key = (term.l, 0, term.a, term.b, 0, 0)
            values = term.coef * np.exp(1j * term.k * psi)
        else:
            key = (0, term.l, 0, 0, term.a, term.b)
            values = np.full(samples, term.coef)
        index = space.index(key)
        if index >= 0:
            dense[index] += values
    return SampledSeries.from_dense(space, dense, charge)


def choose_samples(alpha, degree, trig_degree, minimum=64):
    """
    Grid size for psi: large enough that the spectrum of the most singular
    kernel 1/Delta0^(2 degree + 3) has decayed below 1e-17 before aliasing.
    """
    fine = 4096
    psi = psi_grid(fine)
    kernel = (1.0 + alpha ** 2 - 2.0 * alpha * np.cos(psi)) ** (-(2 * degree + 3) / 2.0)
    spectrum = np.abs(np.fft.rfft(kernel)) / fine
    significant = np.nonzero(spectrum > 1e-17 * spectrum[0])[0]
    tail = int(significant[-1]) if len(significant) else 0
    needed = 2 * (tail + 2 * degree + 2 + trig_degree)
    samples = max(minimum, 1 << int(np.ceil(np.log2(needed))))
    logger.debug('psi grid: spectral tail %d, %d samples', tail, samples)
    return samples


def to_poisson(h, policy):
    """Real PoissonSeries of a charge-0 sampled series."""
    if h.charge != 0:
        raise ValueError('only charge-0 (real, rotation invariant) series convert to Poisson series')
    samples = h.samples
    trig = policy.max_trig_degree
    harmonic = np.rint(np.fft.fftfreq(samples) * samples).astype(np.int64)
    spectra = np.fft.fft(h.values, axis=1) / samples

    rows, parities, coefs = [], [], []
    for spectrum, index in zip(spectra, h.rows):
        l1, l2, a1, b1, a2, b2 = (int(v) for v in h.space.keys[index])
        c = a1 - b1 + a2 - b2
        k1 = harmonic
        k2 = -c - harmonic
        limit = FFT_NOISE * np.max(np.abs(spectrum))
        ok = (np.abs(k1) + np.abs(k2) <= trig) & (np.abs(spectrum) > limit)
        if not np.any(ok):
            continue
        ghat, k1, k2 = spectrum[ok], k1[ok], k2[ok]
        t1, w1 = zpower_expansion(a1, b1)
        t2, w2 = zpower_expansion(a2, b2)
        weights = np.outer(w1, w2).ravel()
        eta1 = np.repeat(t1, len(t2))
        eta2 = np.tile(t2, len(t1))
        value = ghat[:, None] * weights[None, :]
        count = value.size
        exps = np.empty((count, 8), dtype=np.int64)
        exps[:, 0] = l1
        exps[:, 1] = l2
        exps[:, 2] = np.tile(a1 + b1 - eta1, len(ghat))
        exps[:, 3] = np.tile(a2 + b2 - eta2, len(ghat))
        exps[:, 4] = np.tile(eta1, len(ghat))
        exps[:, 5] = np.tile(eta2, len(ghat))
        exps[:, 6] = np.repeat(k1, len(weights))
        exps[:, 7] = np.repeat(k2, len(weights))
        flat = value.ravel()
        rows += [exps, exps]
        parities += [np.full(count, COS), np.full(count, SIN)]
        coefs += [flat.real, -flat.imag]
    if not rows:
        return PoissonSeries.zero(policy)
    return PoissonSeries(
        np.concatenate(rows), np.concatenate(parities), np.concatenate(coefs), policy,
    )
