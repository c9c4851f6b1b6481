"""Descent along one covering family, compared with the sieve test."""

from fibstack.cech import CechObject, homotopy_sheaf_report
from fibstack.core import poset_category
from fibstack.groth import grothendieck
from fibstack.presheaf import discrete_presheaf, terminal_presheaf
from fibstack.site import CoveringFamily

E = poset_category(["W", "U", "V", "S"], {("W", "U"), ("W", "V"), ("U", "S"), ("V", "S"), ("W", "S")})
fam = CoveringFamily("S", (("U", "S"), ("V", "S")))

C = CechObject(E, fam, 2)
print("Cech levels (objects, arrows):", C.sizes())

F = grothendieck(discrete_presheaf(terminal_presheaf(E)))
r = homotopy_sheaf_report(F, fam)
print("descent holds:", r.holds, " agrees with sieve test:", r.agrees)
