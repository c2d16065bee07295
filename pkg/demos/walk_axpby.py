"""
Replaying a recorded derivation step by step
============================================

"""

from pathlib import Path

# load_rule_set([]) falls back to the rules bundled with the package
from stml.cli import load_rule_set
from stml.oracles import ScriptedOracle, metric, run_derivation
from stml.parser import parse_c
from stml.printer import print_c

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

source = (CORPUS / "steps" / "axpby_step0.c").read_text()
ast = parse_c(source, "axpby_step0.c")

print("starting program (metric %d):" % metric(ast))
print(print_c(ast))

# A scripted oracle answers the engine's two questions from a fixed
# list: "are we done?" (no, until the script is spent) and "which rule
# next?".  The same five names drive the CLI via --oracle scripted:FILE.
script = [
    "For-LoopFusion",
    "AugAdditionAssign",
    "JoinAssignments",
    "UndoDistribute",
    "LoopInvCodeMotion",
]

final, records = run_derivation(ast, load_rule_set([]), ScriptedOracle(script))

for r in records:
    print("step %d: %s at position %d" % (r.index + 1, r.rule, r.pos))
    print("  %s" % r.old_code.strip().replace("\n", "\n  "))
    print("    becomes")
    print("  %s" % r.new_code.strip().replace("\n", "\n  "))

print("final program (metric %d):" % metric(final))
print(print_c(final))

# Every record carries hashes of the tree before and after the rewrite,
# so a saved derivation can be checked against a fresh replay.
assert records[0].before_hash == ast.digest()
assert records[-1].after_hash == final.digest()
