"""
Named run presets: the parameter choices of the published experiments in one
reviewable place. Preset values sit between the settings defaults and the
config file / command-line flags.
"""
from dataclasses import dataclass, field

from series.exceptions import RunConfigError


@dataclass(frozen=True)
class Variant:
    """Overrides deriving one system variant from its catalog entry."""
    sets: tuple = ()
    ratio: str = None


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    description: str
    options: dict = field(default_factory=dict)
    variants: tuple = (Variant(),)
    sweep: tuple = ()


PERIOD_SWEEP = ((4, 2), (6, 4), (8, 6))

PRESETS = {
    preset.name: preset
    for preset in (
        Preset(
            name='figure1',
            command='propagate',
            description='ups And: numeric integration against the order-one and order-two secular models',
            options={'system': 'ups_And', 'kf': 6, 'ks': 4, 'birkhoff_order': 10, 'tend_yr': 2e4},
        ),
        Preset(
            name='figure2',
            command='propagate',
            description='ups And moved towards the 5:1 resonance, a1/a2 = 0.335 and 0.338',
            options={'system': 'ups_And', 'kf': 6, 'ks': 4, 'birkhoff_order': 10, 'tend_yr': 2e4},
            variants=(Variant(ratio='a1/a2=0.335'), Variant(ratio='a1/a2=0.338')),
        ),
        Preset(
            name='figure3',
            command='propagate',
            description='HD 169830 with the inner mean anomaly at 0 and 160 degrees',
            options={'system': 'HD169830', 'birkhoff_order': 10, 'tend_yr': 3e4},
            variants=(Variant(sets=('M1=0',)), Variant(sets=('M1=160',))),
        ),
        Preset(
            name='table1',
            command='proximity',
            description='proximity to a mean-motion resonance of every catalog system',
            options={'system': ''},
        ),
        Preset(
            name='period-table',
            command='secular',
            description='secular period of ups And for three truncations of the order-two normalization',
            options={'system': 'ups_And', 'order': 2, 'birkhoff_order': 10},
            sweep=PERIOD_SWEEP,
        ),
    )
}


def get_preset(name, command=None):
    if name not in PRESETS:
        raise RunConfigError(f'unknown preset {name!r}; choose one of {", ".join(PRESETS)}')
    preset = PRESETS[name]
    if command is not None and preset.command != command:
        raise RunConfigError(f'preset {name!r} belongs to the {preset.command} command')
    return preset
