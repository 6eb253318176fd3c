from runs.base import RunCommand
from runs.pipeline import map_entries, run_propagate


class Command(RunCommand):
    help = 'Propagates the secular models and the direct integration, with an agreement summary'
    name = 'propagate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--skip-numeric', action='store_const', const=False, dest='numeric',
            help='do not run the direct integration',
        )
        parser.add_argument('--scheme', help='splitting scheme of the direct integration (SBAB3 or leapfrog)')

    def run(self, entries, cfg):
        for result in map_entries(run_propagate, entries, cfg):
            agreement = result.agreement
            periods = ', '.join(f'{source} {period:.6g} yr' for source, period in agreement.periods.items())
            if agreement.failed:
                self.stdout.write(self.style.WARNING(f'✗ {result.system}: {agreement.failure}'))
            else:
                self.stdout.write(self.style.SUCCESS(f'✓ {result.system}: {periods}'))
            if result.max_energy_error is not None:
                self.stdout.write(f'  relative energy error {result.max_energy_error:.3e}')
