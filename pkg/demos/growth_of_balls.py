"""How fast do balls grow?

Prints |S^n| for the standard generating sets of a few groups, then the
doubling ratio |S^2n|/|S^n| as n increases.  Polynomial growth shows up as
a doubling ratio that settles near 2^d; exponential growth as one that
keeps climbing.
"""

from approxgrowth import doubling_ratio, growth_profile, parse_group, standard_generating_set
from approxgrowth.covering import format_rational

FAMILIES = ["lattice(1)", "lattice(2)", "heisenberg", "lamplighter", "free(2)", "dihedral(30)"]

print("growth |S^n| for n = 0..6")
for spec in FAMILIES:
    S = standard_generating_set(parse_group(spec))
    print(f"  {spec:14s}", growth_profile(S, 6).values)

print()
print("doubling |S^2n|/|S^n|")
for spec in ["lattice(1)", "lattice(2)", "heisenberg", "dihedral(30)"]:
    S = standard_generating_set(parse_group(spec))
    ratios = [format_rational(doubling_ratio(S, n)) for n in (1, 2, 4, 8)]
    print(f"  {spec:14s} n=1,2,4,8:", ", ".join(ratios))

# The Heisenberg ratios drift towards 16 = 2^4: its balls grow like n^4,
# one more than its three coordinates would suggest.
