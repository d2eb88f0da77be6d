"""
Restricting to a subtorus, and pairing with a compact factor
============================================================

Restricting Q(M) along a projection of weight lattices is only well defined
when no tail is collapsed to a point.  Pairing with the quantization of a
compact toric manifold N counts weights of M that are cancelled by a weight
of N.
"""

import random

from bmquant.errors import NonProperRestrictionError
from bmquant.generators import chain, random_projection, random_spec, s2, s2xs2
from bmquant.lattice import HPolytope
from bmquant.quantize import qr_check, quantize, stages_check
from bmquant.virtmod import restrict

q = quantize(s2xs2(2))
r = restrict(q, [[1, 0]])
print("Q restricted to the first circle:", " ".join(f"{r((k,))}" for k in range(-4, 5)))
print("stages check:", stages_check(s2xs2(2), [[1, 0]]))

try:
    restrict(q, [[0, 1]])
except NonProperRestrictionError as exc:
    print("second circle:", exc)

# Pairing with N whose moment polytope is [0, 2]: the weights -2 and -1 of
# the sphere each meet one weight of N.
print("\n[Q, R] on S^2, N = [0, 2]:", qr_check(s2(2), HPolytope.box([0], [2])))
print("[Q, R] on the m=3 chain, N = [-5, 5]:", qr_check(chain(3, 3), HPolytope.box([-5], [5])))

rng = random.Random(1)
agree = 0
for _ in range(10):
    spec = random_spec(rng, rng.randint(1, 4), 2)
    agree += stages_check(spec, random_projection(rng, spec)).equal
print(f"\nrandom restrictions agreeing with brute-force fibre sums: {agree}/10")
