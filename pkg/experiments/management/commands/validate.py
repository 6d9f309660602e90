from experiments.management.commands._base import ExperimentCommand
from experiments.spec import ExperimentKind


class Command(ExperimentCommand):
    help = (
        "Check the closed-form statistics against simulation "
        "(grid keys: snr_db, asymptote_nrl, asymptote_snr_db)"
    )
    kind = ExperimentKind.MC_VALIDATE
