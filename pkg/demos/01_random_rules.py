"""Sample random Born/Stay rule sets and look at what comes out.

Each candidate neighbor count flips a fair coin for membership in the
born set and the stay set, so the rule space grows like 2^(2*max_count+1):
512 possible 3x3 rules, ~10^48 possible 9x9 rules.
"""

import numpy as np

from calab import format_notation, moore_max_count, parse_notation, sample_rules

# the classic rule, in both accepted spellings
gol = parse_notation("B3/S23")
assert gol == parse_notation("B3/S2,3 n=3")
print("Game of Life:", format_notation(gol), "| compact:", format_notation(gol, compact=True))

for radius in (1, 2, 4):
    side = 2 * radius + 1
    ruleset = sample_rules(5, radius, rng_seed=7)
    print(f"\n{side}x{side} neighborhood (max count {moore_max_count(radius)}):")
    for rule in ruleset:
        print("  ", rule.notation)

# the coin-per-count sampler keeps roughly half the counts in each set
ruleset = sample_rules(2000, 1, rng_seed=1)
born_sizes = np.array([len(r.born) for r in ruleset])
stay_sizes = np.array([len(r.stay) for r in ruleset])
print(f"\nover 2000 sampled 3x3 rules: mean |born| = {born_sizes.mean():.2f} (of 8), "
      f"mean |stay| = {stay_sizes.mean():.2f} (of 9)")
print("duplicates are rejected, so all notations are distinct:",
      len(set(ruleset.notations())) == len(ruleset))
