"""Line-oriented text format for Poisson series (used by golden files and run outputs)."""
import logging

import numpy as np

from .core import COS, PARITY_NAMES, SIN, PoissonSeries, TruncationPolicy

logger = logging.getLogger(__name__)

HEADER_PREFIX = '# policy'
_PARITY_CODES = {'cos': COS, 'sin': SIN}


def format_header(policy):
    return (
        f'{HEADER_PREFIX} max_L_degree={policy.max_L_degree} '
        f'max_sec_degree={policy.max_sec_degree} '
        f'max_trig_degree={policy.max_trig_degree}'
    )


def format_term(exps, parity, coef):
    exponents = ' '.join(str(int(v)) for v in exps)
    return f'{exponents} {PARITY_NAMES[int(parity)]} {coef:.17g}'


def write_series(series, stream):
    """Write the header line then one term per line, in key order."""
    stream.write(format_header(series.policy) + '\n')
    for exps, parity, coef in series:
        stream.write(format_term(exps, parity, coef) + '\n')


def dump_series(series, path):
    with open(path, 'w', encoding='utf-8') as handle:
        write_series(series, handle)


def _parse_header(line):
    bounds = {}
    for item in line[len(HEADER_PREFIX):].split():
        name, _, value = item.partition('=')
        bounds[name] = int(value)
    return TruncationPolicy(**bounds)


def read_series(stream, policy=None):
    """
    Parse the text format. The header policy is used unless ``policy`` is given.
    Blank lines and other ``#`` comment lines are skipped.
    """
    exps, parities, coefs = [], [], []
    for number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(HEADER_PREFIX):
            if policy is None:
                policy = _parse_header(line)
            continue
        if line.startswith('#'):
            continue
        fields = line.split()
        if len(fields) != 10 or fields[8] not in _PARITY_CODES:
            raise ValueError(f'line {number}: malformed series term {line!r}')
        exps.append([int(v) for v in fields[:8]])
        parities.append(_PARITY_CODES[fields[8]])
        coefs.append(float(fields[9]))
    if policy is None:
        raise ValueError('series file has no policy header')
    logger.debug('Read %d series terms', len(coefs))
    return PoissonSeries(np.array(exps, dtype=np.int64).reshape(-1, 8), parities, coefs, policy)


def load_series(path, policy=None):
    with open(path, encoding='utf-8') as handle:
        return read_series(handle, policy)
