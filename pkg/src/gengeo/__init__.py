"""Generalized complex, Riemannian and Kähler geometry on invariant frames."""
