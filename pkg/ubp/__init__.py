"""Universal H-linear portfolio selection.

Evaluates multilinear trading strategies on return sequences, finds the best
strategy in hindsight, runs the performance-weighted universal portfolio and
checks its competitive ratio against the uniform lower bound.
"""
import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
