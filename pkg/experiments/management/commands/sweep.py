from experiments.management.commands._base import ExperimentCommand
from experiments.spec import ExperimentKind


class Command(ExperimentCommand):
    help = "Designed QSINR against angle uncertainty for several array sizes (grid keys: arrays=4x8,8x16, deltas, power_db)"
    kind = ExperimentKind.UNCERTAINTY_SWEEP
    greet_options = True
