"""The quantum projective line as a concrete bigraded calculus over quantum SU(2)."""
