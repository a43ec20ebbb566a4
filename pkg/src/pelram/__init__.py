"""Randomized RAM machinery: unit-cost RAM VM, big-integer maps, TM tableaux
and the randomized tableau-search simulation built on them."""

__version__ = "0.1.0"
