"""Statistical-query learning of quantum states and processes: oracles, learners and hardness checks."""

__version__ = "0.1.0"

from . import qmath, ensembles, oracles, problems, mirror, learners, hardness  # noqa: E402,F401
