from runs.base import RunCommand
from runs.pipeline import map_entries, run_secular


class Command(RunCommand):
    help = 'Writes the secular Hamiltonian coefficient table at order one and two in the masses'
    name = 'secular'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--sweep', action='store_true', help='also tabulate (K_F, K_S) = (4,2), (6,4), (8,6)')
        parser.add_argument('--golden', action='store_true', help='compare with the shipped ups And table')

    def config_extras(self, options):
        return {'sweep': options.get('sweep', False), 'golden': options.get('golden', False)}

    def run(self, entries, cfg):
        for result in map_entries(run_secular, entries, cfg):
            self.stdout.write(self.style.SUCCESS(f'✓ {result.system}: {result.rows} coefficients'))
            for K_F, K_S, period in result.periods:
                self.stdout.write(f'  K_F={K_F} K_S={K_S}: secular period {period:.6g} yr')
            if cfg.golden:
                if result.mismatches:
                    self.stdout.write(self.style.WARNING(
                        f'  {len(result.mismatches)} coefficients differ from the golden table'
                    ))
                else:
                    self.stdout.write(self.style.SUCCESS('  ✓ matches the golden table'))
