# `manage.py noise-loss`; Django loads command modules by file name
from experiments.management.commands.noise_loss import Command  # noqa: F401
