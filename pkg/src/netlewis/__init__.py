"""Language emergence in graph-structured populations of REINFORCE agents."""

__version__ = "0.1.0"
