"""Dimer models on the two-torus with finite symmetry.

The package builds bicolored graphs on T^2 that are symmetric under a
finite subgroup of GL(2,Z) and whose perfect matchings realize a
prescribed invariant lattice polygon.  Everything is exact: coordinates
are rationals, group elements are integer matrices, and all checks are
combinatorial.
"""
