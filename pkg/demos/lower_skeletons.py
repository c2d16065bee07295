"""
From algorithmic skeletons to checkable facts
=============================================

"""

from pathlib import Path

from stml.parser import parse_c
from stml.semantics import PropertyStore, lower_polca

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# The input carries high-level skeleton annotations (map, zipWith) that
# name whole loop shapes.  Lowering expands each one into the concrete
# facts the rewrite conditions actually consume.
source = (CORPUS / "annotated" / "axpby_polca.c").read_text()
ast = parse_c(source, "axpby_polca.c")

store = PropertyStore(ast)
lower_polca(ast, store)

loops = [n for n in ast.root.children if n.kind == "For"]
for loop in loops:
    head = next(p for p in ast.properties[loop.nid] if p.ns == "polca")
    print("loop under #pragma %s:" % head.pragma_line().split(None, 1)[1])
    for p in ast.properties[loop.nid]:
        if p.provenance == "lowered":
            print("   ", p.pragma_line())
    print()

# Lowered facts are ordinary facts: re-lowering adds nothing new, and a
# contradicting report from an external tool would lose against them
# only if a user wrote the pragma by hand (user facts outrank the rest).
before = {p.pragma_line() for ps in ast.properties.values() for p in ps}
lower_polca(ast, store)
after = {p.pragma_line() for ps in ast.properties.values() for p in ps}
assert before == after
print("idempotent: second lowering added no facts")
