from experiments.management.commands._base import ExperimentCommand
from experiments.spec import ExperimentKind


class Command(ExperimentCommand):
    help = "Joint one-bit waveform and filter design over interference power and angle uncertainty (grid keys: power_db, delta)"
    kind = ExperimentKind.CODESIGN
    greet_options = True
