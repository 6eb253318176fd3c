from runs.base import RunCommand
from runs.pipeline import map_entries, run_expand


class Command(RunCommand):
    help = 'Expands the Hamiltonian of catalog systems and writes the series with a term-count summary'
    name = 'expand'

    def run(self, entries, cfg):
        for result in map_entries(run_expand, entries, cfg):
            self.stdout.write(self.style.SUCCESS(f'✓ {result.system}: {result.terms} perturbation terms'))
