"""Instance generators, metrics, experiments and the command-line entry point."""
