from django.core.management.base import BaseCommand, CommandError

from series.exceptions import SecresError

from .pipeline import OPTION_NAMES, Outputs, resolve_config, select_entries


class RunCommand(BaseCommand):
    """
    Shared flags and error handling of the run commands. Subclasses set
    ``name`` and implement ``run(entries, cfg)``; any failure removes the
    files written so far and ends the command with a CommandError.
    """
    name = None

    def add_arguments(self, parser):
        parser.add_argument('--system', help='catalog system name (default: every system)')
        parser.add_argument('--catalog', help='catalog file (default: SECRES_CATALOG)')
        parser.add_argument('--order', type=int, choices=(1, 2), help='order in the masses')
        parser.add_argument('--kf', type=int, help='trigonometric truncation K_F of the order-two step')
        parser.add_argument('--ks', type=int, help='secular truncation K_S of the order-two step')
        parser.add_argument('--birkhoff-order', type=int, dest='birkhoff_order')
        parser.add_argument('--tend-yr', type=float, dest='tend_yr', help='end of the trajectories (yr)')
        parser.add_argument('--samples', type=int, help='samples per trajectory')
        parser.add_argument('--rho-scale', type=float, dest='rho_scale', help='safety factor on the norm radii')
        parser.add_argument('--sec-degree', type=int, dest='sec_degree', help='secular degree of the expansion')
        parser.add_argument('--trig-degree', type=int, dest='trig_degree', help='harmonic order of the expansion')
        parser.add_argument('--out', help='output directory')
        parser.add_argument('--preset', help='named experiment preset')
        parser.add_argument('--config', help='flat key = value config file')
        parser.add_argument('--jobs', type=int, help='worker processes for catalog-wide runs')
        parser.add_argument(
            '--set', action='append', dest='set', metavar='FIELD=VALUE',
            help='override one element, e.g. a2=2.6 or M1=160 (degrees); repeatable',
        )
        parser.add_argument('--ratio', help='move the inner planet to a1/a2=VALUE')

    def config_extras(self, options):
        return {}

    def handle(self, *args, **options):
        cli = {name: options.get(name) for name in OPTION_NAMES}
        try:
            cfg = resolve_config(
                self.name, cli, preset=options.get('preset'), config_path=options.get('config'),
                **self.config_extras(options),
            )
        except SecresError as exc:
            raise CommandError(str(exc)) from exc

        outputs = Outputs(cfg.out)
        try:
            entries = select_entries(cfg)
            self.stdout.write(f'Running {self.name} on {len(entries)} system(s)...')
            self.run(entries, cfg)
        except (SecresError, ValueError, ArithmeticError) as exc:
            outputs.discard()
            raise CommandError(str(exc)) from exc

        self.stdout.write(self.style.SUCCESS(
            f'\n=== Wrote {len(outputs.created())} files to {cfg.out} ==='
        ))

    def run(self, entries, cfg):
        raise NotImplementedError('subclasses of RunCommand must provide a run() method')
