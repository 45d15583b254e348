"""
Mining complexity-to-fairness rules
===================================

"""

from complexfair.rules import mine_rules, rules_table

# each transaction lists the large CMD items and the unfair learner items of one dataset
transactions = [
    {"C2", "N1", "SP_LR", "SP_DT"},
    {"C2", "SP_LR", "SP_DT", "SP_KN"},
    {"C2", "SP_DT"},
    {"N1"},
    {"SP_KN"},
    set(),
]

rules = mine_rules(transactions, min_support=0.3, min_lift=1.0)
for row in rules_table(rules):
    print(" | ".join(str(c) for c in row))
