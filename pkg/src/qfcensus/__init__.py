"""qfcensus: enumeration of indefinite binary quadratic form classes ordered
by fundamental unit, narrow class numbers, congruence-subgroup character
weights, and the summary statistics built on top of them."""

__version__ = "0.1.0"
