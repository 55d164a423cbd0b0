"""Command-line entry point of the thicktri pipeline."""
