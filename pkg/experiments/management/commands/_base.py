import logging
from typing import Any, Dict, Optional

from django.core.management.base import BaseCommand, CommandError, CommandParser

from experiments.runners import run_experiment
from experiments.spec import ExperimentKind, ExperimentSpec
from utils.exceptions import OneBitRadarError
from utils.report import CsvReportMixin

logger = logging.getLogger(__name__)


class ExperimentCommand(CsvReportMixin, BaseCommand):
    """
    Shared options and flow of the experiment commands: parse the options into
    an ExperimentSpec, run it and write one CSV per table to the output
    directory. Library errors surface as CommandError with exit status 1.
    """

    kind: Optional[ExperimentKind] = None
    greet_options = False

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--scene", required=True, help="Scene YAML file")
        parser.add_argument("--seed", type=int, default=0, help="Master seed of every random draw")
        parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per estimate")
        parser.add_argument("--out", default=None, help="Output directory for CSV tables and artifacts")
        parser.add_argument("--workers", type=int, default=None, help="Threads for Monte Carlo blocks and grid cells")
        parser.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY.PATH=VALUE",
            help="Override a scene field, e.g. target.angle_deg=0 (repeatable)",
        )
        parser.add_argument("--grid", default=None, help="Parameter grid, e.g. 'power_db=20,30;delta=0,0.1'")
        if self.greet_options:
            parser.add_argument("--rho1", type=float, default=None, help="ADMM penalty of the unit-norm split")
            parser.add_argument("--rho2", type=float, default=None, help="ADMM penalty of the rank-two split")
            parser.add_argument("--admm-iters", dest="admm_iters", type=int, default=None)
            parser.add_argument("--alt-iters", dest="alt_iters", type=int, default=None)
            parser.add_argument("--restarts", type=int, default=None, help="Random GREET starts per design; the best is kept")

    def run(self, options: Dict[str, Any]) -> Dict[str, str]:
        spec = ExperimentSpec.from_options(self.kind, options)
        result = run_experiment(spec)
        out = spec.prepare_output()
        written = {}
        for name, frame in result.tables.items():
            path = self.report(frame, out / f"{name}.csv", spec.seed, result.parameters, title=name)
            written[name] = str(path)
        for path in result.artifacts:
            logger.info(f"Saved {path}")
        return written

    def handle(self, *args, **options) -> None:
        try:
            written = self.run(options)
        except OneBitRadarError as exc:
            logger.error(f"{self.kind.value} failed: {exc}")
            raise CommandError(str(exc)) from exc
        for name, path in written.items():
            self.stdout.write(self.style.SUCCESS(f"{name}: {path}"))
