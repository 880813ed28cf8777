"""Figure datasets, experiment configuration and the ``ota-ada`` CLI."""
