from experiments.management.commands._base import ExperimentCommand
from experiments.spec import ExperimentKind


class Command(ExperimentCommand):
    help = "QSINR loss of one-bit DAC and ADC against N_r L in a noise-only scene (grid key: nrl)"
    kind = ExperimentKind.NOISE_ONLY_LOSS
