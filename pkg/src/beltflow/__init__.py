"""beltflow — exact steady-state computation for splitter (conveyor-belt) networks.

Everything numeric in this package is an exact rational (`fractions.Fraction`);
there is no floating point anywhere in the core.
"""

__version__ = "0.1.0"
