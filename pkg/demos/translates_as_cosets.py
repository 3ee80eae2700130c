"""Translates of an approximate group behave like cosets.

In cyclic(12) the subgroup U = {0, 4, 8} has four cosets.  Once translates
are well separated, membership y ∈ xU^m can be decided by comparing the
neighbourhoods yU^m and xU^2m, exactly as for cosets of a subgroup.  The
same holds for an interval tile in the integers after separating centers.
"""

from approxgrowth import (
    ElementSet,
    bounded_representatives,
    disjointify,
    local_coset_check,
    parse_group,
    propagate_inclusion,
)

C12 = parse_group("cyclic(12)")
S = ElementSet(C12, [0, 1, 11])
U = ElementSet(C12, [0, 4, 8])

cert = disjointify([0, 1, 2, 3], U)
print("cosets of {0,4,8}: exponent", cert.exponent, "centers", list(cert.refined_centers))
print("coset-like on the nose:", local_coset_check(cert.refined_centers, U, cert.exponent))

# Name the cosets by far-away representatives and let the extraction pull
# them back into a small ball.
reps = bounded_representatives(S, 5, [4, 9, 6, 7], U)
print("representatives of 4, 9, 6, 7 inside S^3:", list(reps.centers))
print("S^9 ⊆ X U^3:", propagate_inclusion(S, 3, 2, list(reps.centers), U, 3))

Z = parse_group("lattice(1)")
interval = ElementSet(Z, [(i,) for i in (-1, 0, 1)])
cert = disjointify([(0,), (1,), (10,)], interval)
print()
print("integers, centers 0, 1, 10 with tile [-1,1]:")
print("  exponent", cert.exponent, "centers", [Z.render(x) for x in cert.refined_centers])
print("  coset-like:", local_coset_check(cert.refined_centers, interval, cert.exponent))
