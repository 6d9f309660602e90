from experiments.management.commands._base import ExperimentCommand
from experiments.spec import ExperimentKind


class Command(ExperimentCommand):
    help = (
        "P_f, P_d and ROC tables for one design, analytic and simulated "
        "(grid keys: design=matched|mvdr|greet, pf, power_db, roc_power_db)"
    )
    kind = ExperimentKind.DETECTION_CURVES
    greet_options = True
