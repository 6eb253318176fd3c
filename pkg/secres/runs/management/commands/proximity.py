from runs.base import RunCommand
from runs.pipeline import map_entries, run_proximity
from runs.reports import file_stem, write_proximity_table


class Command(RunCommand):
    help = 'Measures the proximity of catalog systems to a mean-motion resonance'
    name = 'proximity'

    def run(self, entries, cfg):
        rows = map_entries(run_proximity, entries, cfg)
        name = f'{file_stem(cfg.system)}_proximity.csv' if cfg.system else 'proximity.csv'
        with open(cfg.path(name), 'w', encoding='utf-8', newline='') as handle:
            write_proximity_table(rows, handle)
        for row in rows:
            self.stdout.write(self.style.SUCCESS(
                f'✓ {row.system}: delta = {row.delta:.3e} ({row.label}), nearest resonance {row.resonance}'
            ))
