import sys

from epitrack.main import run_cli

sys.exit(run_cli())
