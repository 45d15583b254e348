"""
The synthetic scenario catalog
==============================

"""

from collections import Counter

from complexfair import enumerate_catalog, generate

# 73 scenario configurations, each with its own derived seed
specs = enumerate_catalog(n=2000, base_seed=42)
print(len(specs), dict(Counter(s.scenario_id for s in specs)))

# historical bias on Y lowers the favorable rate of A = 0 as the shift grows
for spec in [s for s in specs if s.scenario_id == "S3A"][::4]:
    ds = generate(spec)
    rate = {g: ds.target[ds.protected == g].mean() for g in (0, 1)}
    print(f"{spec.label:6s} l_y={spec.parameter_value:<4} P(Y=1|A=0)={rate[0]:.3f} "
          f"P(Y=1|A=1)={rate[1]:.3f}")
