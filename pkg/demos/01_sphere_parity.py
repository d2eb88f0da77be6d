"""
The b^m sphere: odd m cancels, even m does not
==============================================

The circle rotates S^2 about the poles and Z is the equator.  Near Z the
moment map behaves like the antiderivative of ``x^-m``, so both caps run off
to infinity in the weight lattice.  Whether the two tails cancel depends only
on the parity of m.
"""

from bmquant.generators import s2
from bmquant.laurent import CollarFormData, escape_direction, moment_from_form
from bmquant.model import propagate_signs
from bmquant.quantize import quantize
from bmquant.virtmod import asymptotic_profile, dim

# The moment profile on the collar, and where it escapes on each side.
for m in (1, 2, 3, 4):
    cf = CollarFormData(m, (0,) * (m - 1) + (1,))
    mu = moment_from_form(cf)
    print(f"m={m}: mu = {mu}, escapes to {escape_direction(cf, 1):+d} (north) "
          f"and {escape_direction(cf, -1):+d} (south)")

# Orientation signs of the two caps relative to the north cap.
print()
for m in (1, 2, 3, 4):
    print(f"m={m}: signs {propagate_signs(s2(m))}")

# Put together: odd m gives the zero module, even m two infinite tails.
print()
for m in (1, 2, 3, 4):
    q = quantize(s2(m))
    table = " ".join(f"{q((k,)):+d}" for k in range(-4, 5))
    print(f"m={m}: weights -4..4 -> {table}   dim = {dim(q)}")

p = asymptotic_profile(quantize(s2(2)))
print(f"\nm=2 profile: xi={list(p.xi)}, c+={p.c_plus}, c-={p.c_minus}, lambda0={p.lambda0}")

# Subleading terms move where the tails start but not the cancellation.
q = quantize(s2(3, (-1, 2, -1)))
print(f"m=3 with c=(-1, 2, -1): zero module? {q.is_zero()}")
