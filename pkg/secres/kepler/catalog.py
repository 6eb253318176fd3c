"""
Catalog of two-planet systems.

One record per line, whitespace separated:

    name m0 units m1 a1 e1 M1 varpi1 m2 a2 e2 M2 varpi2   # provenance

``units`` is ``mjup`` or ``msun`` and applies to the planet masses; angles
are in degrees. Blank lines and lines starting with ``#`` are ignored.
"""
import logging
import re
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.conf import settings

from series.exceptions import CatalogError

from .elements import MJUP, PlanetElements, SystemEntry
from .forms import CATALOG_FIELDS, SystemRecordForm, form_errors_text

logger = logging.getLogger(__name__)

_ANGLES = {'M', 'varpi'}
_OVERRIDE = re.compile(r'^(m|a|e|M|varpi)([12])=(.+)$')
_RATIO = re.compile(r'^a1/a2=(.+)$')


def _entry_from_form(data, provenance):
    scale = MJUP if data['units'] == 'mjup' else 1.0
    planets = tuple(
        PlanetElements(
            m=data[f'm{i}'] * scale,
            a=data[f'a{i}'],
            e=data[f'e{i}'],
            M=np.radians(data[f'M{i}']),
            omega=np.radians(data[f'varpi{i}']),
        )
        for i in (1, 2)
    )
    return SystemEntry(name=data['name'], m0=data['m0'], planets=planets, provenance=provenance)


def parse_catalog(lines, path=None):
    """Parse catalog lines into {name: SystemEntry}, keeping file order."""
    entries = {}
    for number, raw in enumerate(lines, start=1):
        body, _, comment = raw.partition('#')
        fields = body.split()
        if not fields:
            continue
        if len(fields) != len(CATALOG_FIELDS):
            raise CatalogError(
                f'expected {len(CATALOG_FIELDS)} fields, found {len(fields)}',
                line_number=number, path=path,
            )
        form = SystemRecordForm(data=dict(zip(CATALOG_FIELDS, fields)))
        if not form.is_valid():
            raise CatalogError(form_errors_text(form), line_number=number, path=path)
        name = form.cleaned_data['name']
        if name in entries:
            raise CatalogError(f'duplicate system {name!r}', line_number=number, path=path)
        entries[name] = _entry_from_form(form.cleaned_data, comment.strip())
    logger.debug('Catalog %s: %d systems', path or '<stream>', len(entries))
    return entries


def catalog_path(path=None):
    return Path(path or settings.SECRES_CATALOG)


def load_catalog(path=None):
    path = catalog_path(path)
    try:
        with open(path, encoding='utf-8') as handle:
            return parse_catalog(handle, path=str(path))
    except OSError as exc:
        raise CatalogError(f'cannot read catalog: {exc}', path=str(path)) from exc


def get_system(name, path=None):
    entries = load_catalog(path)
    if name not in entries:
        raise CatalogError(f'no system named {name!r}', path=str(catalog_path(path)))
    return entries[name]


def apply_overrides(entry, sets=(), ratio=None):
    """
    Derive a variant of ``entry``: ``sets`` items look like ``a2=2.6`` or
    ``M1=160`` (degrees, Jupiter masses for m), ``ratio`` like ``a1/a2=0.335``
    (moves the inner planet, keeps a2).
    """
    labels = []
    for item in sets:
        match = _OVERRIDE.match(item.replace(' ', ''))
        if not match:
            raise CatalogError(f'cannot parse override {item!r}')
        field, index, text = match.groups()
        try:
            value = float(text)
        except ValueError as exc:
            raise CatalogError(f'override {item!r} is not numeric') from exc
        if field in _ANGLES:
            stored = np.radians(value)
        elif field == 'm':
            stored = value * MJUP
        else:
            stored = value
        attribute = 'omega' if field == 'varpi' else field
        entry = entry.replace_planet(int(index), **{attribute: stored})
        labels.append(item.replace(' ', ''))
    if ratio:
        match = _RATIO.match(ratio.replace(' ', ''))
        if not match:
            raise CatalogError(f'cannot parse ratio {ratio!r}; expected a1/a2=<value>')
        value = float(match.group(1))
        entry = entry.replace_planet(1, a=value * entry.planets[1].a)
        labels.append(f'a1/a2={value:g}')
    if not labels:
        return entry
    variant = replace(entry, name=f'{entry.name}[{",".join(labels)}]')
    if variant.planets[0].a >= variant.planets[1].a:
        raise CatalogError(f'{variant.name}: overrides make planet 1 the outer planet')
    return variant.validate()
