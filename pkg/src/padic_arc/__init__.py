"""Exact p-adic line integrals on arcs of circles in Q_p."""
