"""Executable calculus for an epistemic reconstruction of quantum mechanics.

Finite epistemic state spaces with a cardinality volume measure, experimental
contexts as layered amplitude networks with knowability levels, classical and
amplitude probability propagation, Born-map uniqueness verification,
contextual vector spaces with property operators, and state reduction by
observation and by epistemic consistency.
"""

__version__ = "0.1.0"
