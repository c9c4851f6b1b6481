"""Stack completion of a presheaf that fails the sheaf condition on the push square."""

from fibstack.core import poset_category
from fibstack.groth import grothendieck
from fibstack.presheaf import SetPresheaf, discrete_presheaf, sheafify
from fibstack.site import generate_topology
from fibstack.stacks import certify_stackification, is_stack, stackify

E = poset_category(["W", "U", "V", "S"], {("W", "U"), ("W", "V"), ("U", "S"), ("V", "S"), ("W", "S")})
top = generate_topology(E, {"S": [[("U", "S"), ("V", "S")]]})

vals = {"W": ["*"], "U": ["*"], "V": ["*"], "S": ["a", "b"]}
restr = {f: {x: "*" for x in vals[E.tgt(f)]} for f in E.arrows if not E.is_identity(f)}
P = SetPresheaf(E, vals, restr).check()

F = grothendieck(discrete_presheaf(P))
print("input is a stack:", is_stack(F, top))

AF, zigzag = stackify(F, top)
print("completion is a stack:", is_stack(AF, top))
for leg in certify_stackification(zigzag):
    if leg["forward"]:
        print("  ->  bicovering:", leg["bicovering"])
    else:
        print("  <-  trivial fibration:", leg["trivial_fibration"])

aP, _ = sheafify(P, top)
print("sheafified values:", {S: len(v) for S, v in aP.values.items()})
