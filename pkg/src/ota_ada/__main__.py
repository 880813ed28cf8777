from .experiments.cli import run

run()
