################################################################################
# !!! IMPORTANT !!!
#  This __init__.py allows to load the relevant classes from the experiments.
#  By importing this file, we leverage "globals" and "getattr" to dynamically
#  execute the command classes selected by the CLI.
################################################################################

# Command Entrypoints
from experiments.commands.ids_approx import IdsApprox  # noqa
from experiments.commands.ids_empirical import IdsEmpirical  # noqa
from experiments.commands.ids_monte_carlo import IdsMonteCarlo  # noqa
from experiments.commands.percolation import Percolation  # noqa
from experiments.commands.self_similar import SelfSimilar  # noqa
from experiments.commands.verify import Verify  # noqa
