"""prtt: a proof-assistant kernel whose definable numeric functions are
exactly the primitive recursive ones, plus extraction to a recursion
combinator IR and the tooling to check the two directions against each
other."""

__version__ = "0.1.0"
