"""
Why the oracle sometimes has to get worse before it gets better
===============================================================

"""

from pathlib import Path

from stml.cli import load_rule_set
from stml.oracles import GreedyOracle, LookaheadOracle, metric, run_derivation
from stml.parser import parse_c
from stml.printer import print_c

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

source = (CORPUS / "eval" / "local_minimum.c").read_text()
rules = load_rule_set([])


def fresh():
    return parse_c(source, "local_minimum.c")


print("the trap (metric %d):" % metric(fresh()))
print(print_c(fresh()))

# Greedy search only ever takes a step that strictly lowers the metric.
# Here every single rewrite keeps the score flat or raises it, so the
# program is declared final untouched.
final, records = run_derivation(fresh(), rules, GreedyOracle())
print("greedy applied %d rules, metric %d" % (len(records), metric(final)))

# Depth-2 lookahead scores the best program reachable within two rule
# applications.  That lets it pay for a flat step now (expanding the
# augmented assignment) because factoring becomes available after it.
final, records = run_derivation(fresh(), rules, LookaheadOracle(depth=2))
print("lookahead applied %d rules, metric %d:"
      % (len(records), metric(final)))
for r in records:
    print("  %s" % r.rule)
print(print_c(final))
