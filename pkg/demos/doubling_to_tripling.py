"""From small doubling to small tripling, one certificate at a time.

Takes the ball S^8 in the integers (S = {-1, 0, 1}) and walks through the
chain that bounds |S^24| from |S^16| <= K|S^8|:

  cover by an approximate group, separate the translates, move the centers
  close to the identity, propagate the cover outward.

Every step prints what it produced and re-checks its certificate.
"""

import json
from fractions import Fraction

from approxgrowth import (
    PowerChain,
    bounded_representatives,
    disjointify,
    doubling_to_approx,
    parse_instance,
    propagate_inclusion,
    verify_approx_group,
    verify_cover,
    verify_disjoint_translates,
    verify_report,
    verify_theorem,
)
from approxgrowth.covering import format_rational
from approxgrowth.sets import ScaledPowers

inst = parse_instance("lattice(1):1", n=8)
S, n = inst.generators, inst.n
chain = PowerChain(S)
A = chain.get(n)
K = Fraction(chain.size(2 * n), len(A))
print(f"|S^{n}| = {len(A)}, |S^{2 * n}| = {chain.size(2 * n)}, K = {format_rational(K)}")

dc = doubling_to_approx(A, K)
render = A.group.render
print(f"V has {len(dc.v)} elements, U = V^2 has {len(dc.u)}")
print("A ⊆ XU with X =", [render(x) for x in dc.centers], "| cover ok:", verify_cover(dc.cover))
print("U is an approximate group with parameter", format_rational(dc.approx.parameter), "| ok:", verify_approx_group(dc.approx))

dt = disjointify(dc.centers, dc.u)
print(f"separated translates: m = {dt.exponent}, X' =", [render(x) for x in dt.refined_centers],
      "| ok:", verify_disjoint_translates(dt))

tile = ScaledPowers(dc.v_powers, 2 * dt.exponent)
reps = bounded_representatives(S, n, dt.refined_centers, tile.get(1), check_separation=False, powers=tile)
print("representatives near the identity: X'' =", [render(x) for x in reps.centers])

k, r = n // 2, n - n // 2
ok = propagate_inclusion(S, k, r, reps.centers, reps.tile, 5)
print(f"S^{5 * r + k} ⊆ X''U^{10 * dt.exponent}: {ok}")

print()
print("The same chain, packaged:")
report = verify_theorem(inst)
print("  realized tripling |S^24|/|S^8| =", format_rational(report.realized_tripling))
print("  realized bound |X''||U^10|/|S^8| =", format_rational(report.realized_bound))
print("  certificates re-verified from JSON:", verify_report(json.loads(report.to_json())))
