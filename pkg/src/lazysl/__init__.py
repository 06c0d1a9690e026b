"""Symbolic execution with separation-logic preconditions and context-sensitive
lazy initialization, producing validated concrete heap test inputs."""

__version__ = "0.1.0"
