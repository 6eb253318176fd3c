"""
Secular Hamiltonians as coefficient tables.

One row per monomial xi1^p1 xi2^p2 eta1^q1 eta2^q2: the four exponents, then
one coefficient column per order. Rows run by total degree, then by
exponents in decreasing lexicographic order; a monomial missing from one
order is written with a zero coefficient.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kepler.elements import G

logger = logging.getLogger(__name__)

GOLDEN_PATH = Path(__file__).resolve().parent / 'data' / 'ups_and_secular.txt'
MONOMIAL = ('xi1', 'xi2', 'eta1', 'eta2')


@dataclass(frozen=True)
class TableRow:
    exponents: tuple
    values: tuple

    @property
    def degree(self):
        return sum(self.exponents)


@dataclass(frozen=True)
class Mismatch:
    exponents: tuple
    column: int
    value: float
    expected: float

    @property
    def relative(self):
        if self.expected == 0:
            return float('inf') if self.value else 0.0
        return abs(self.value - self.expected) / abs(self.expected)

    def __str__(self):
        exps = ' '.join(str(e) for e in self.exponents)
        return (
            f'[{exps}] column {self.column + 1}: {self.value:.17g} '
            f'expected {self.expected:.17g} (relative {self.relative:.2e})'
        )


def _row_key(exponents):
    return (sum(exponents), tuple(-e for e in exponents))


def _coefficients(h, max_degree):
    """Coefficients by exponents; the constant row is the energy at the reference actions."""
    series = h.series
    coefficients = {}
    if len(series):
        keep = series.sec_degree <= max_degree
        exps = series.exps[keep, 2:6]
        coefficients = {tuple(int(v) for v in e): float(c) for e, c in zip(exps, series.coef[keep])}
    if h.kepler_constant:
        coefficients[(0, 0, 0, 0)] = coefficients.get((0, 0, 0, 0), 0.0) + h.kepler_constant
    return coefficients


def secular_rows(hamiltonians, max_degree=6):
    """Rows of the table for a sequence of SecularHamiltonians (one column each)."""
    columns = [_coefficients(h, max_degree) for h in hamiltonians]
    monomials = set()
    for column in columns:
        monomials.update(column)
    return [
        TableRow(exponents=m, values=tuple(column.get(m, 0.0) for column in columns))
        for m in sorted(monomials, key=_row_key)
    ]


def write_secular_table(rows, stream, comments=()):
    for comment in comments:
        stream.write(f'# {comment}\n')
    for row in rows:
        exps = ' '.join(str(e) for e in row.exponents)
        values = ' '.join(f'{v:.17g}' for v in row.values)
        stream.write(f'{exps} {values}\n')


def table_comments(name, hamiltonians, max_degree):
    """Header lines naming the system, the columns and what each order used."""
    lines = [
        f'Secular Hamiltonian of the {name} system through degree {max_degree} in (xi, eta).',
        'Columns: exponents of ' + ' '.join(MONOMIAL) + ', then '
        + ', '.join(f'order-{h.order} coefficient' for h in hamiltonians) + '.',
    ]
    for h in hamiltonians:
        provenance = h.provenance
        if 'K_F' in provenance:
            lines.append(f'Order {h.order} used K_F = {provenance["K_F"]}, K_S = {provenance["K_S"]}.')
    if hamiltonians:
        lines.append(f'The constant row includes the Keplerian energy {hamiltonians[0].kepler_constant:.17g}.')
    return lines


def dump_secular_table(path, name, hamiltonians, max_degree=6):
    rows = secular_rows(hamiltonians, max_degree)
    with open(path, 'w', encoding='utf-8') as handle:
        write_secular_table(rows, handle, table_comments(name, hamiltonians, max_degree))
    logger.info('Wrote %d secular coefficients to %s', len(rows), path)
    return rows


def read_secular_table(stream):
    rows = []
    width = None
    for number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if width is None:
            width = len(fields)
        if len(fields) < 5 or len(fields) != width:
            raise ValueError(f'line {number}: malformed table row {line!r}')
        try:
            exponents = tuple(int(v) for v in fields[:4])
            values = tuple(float(v) for v in fields[4:])
        except ValueError as exc:
            raise ValueError(f'line {number}: {exc}') from exc
        rows.append(TableRow(exponents=exponents, values=values))
    return rows


def read_golden(path=GOLDEN_PATH):
    """
    The reference table, with the constant row brought to AU, yr and Msun.
    The published energies take G m as the mass unit.
    """
    with open(path, encoding='utf-8') as handle:
        rows = read_secular_table(handle)
    return [
        TableRow(exponents=row.exponents, values=tuple(v / G for v in row.values)) if row.degree == 0 else row
        for row in rows
    ]


def _align(rows, golden, max_degree):
    found = {row.exponents: row.values for row in rows}
    for row in golden:
        if max_degree is not None and row.degree > max_degree:
            continue
        values = found.get(row.exponents, (0.0,) * len(row.values))
        for column, expected in enumerate(row.values):
            if column < len(values):
                yield row.exponents, column, values[column], expected


def diff_rows(rows, golden, rtol, max_degree=None):
    """Entries of ``golden`` that ``rows`` misses by more than ``rtol`` (relative)."""
    mismatches = [
        Mismatch(exps, column, value, expected)
        for exps, column, value, expected in _align(rows, golden, max_degree)
        if not np.isclose(value, expected, rtol=rtol, atol=0.0)
    ]
    logger.info('Golden comparison at rtol=%g: %d mismatches', rtol, len(mismatches))
    return mismatches


def sign_mismatches(rows, golden, max_degree=None):
    return [
        Mismatch(exps, column, value, expected)
        for exps, column, value, expected in _align(rows, golden, max_degree)
        if np.sign(value) != np.sign(expected)
    ]
