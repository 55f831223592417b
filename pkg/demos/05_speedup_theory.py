"""
Wall-time speedup models and their simulation check
===================================================

Three closed forms predict the speedup over target-only decoding from
the acceptance rate alpha, draft length gamma, and the draft/target cost
ratio: the single-draft form, the batched-candidates form, and the
serial-candidates form. A discrete-event simulation with constant phase
costs reproduces each one.
"""

from specmer import (
    Rng,
    SpeedupParams,
    expected_speedup,
    expected_speedup_batch,
    expected_speedup_serial,
    simulate_speedup,
)
from specmer.analysis import batch_acceptance, cost_coefficient

# cost coefficient from raw throughputs: draft 74.11 tok/s, target 31.48 tok/s
ce = cost_coefficient("vanilla", m_p=1 / 74.11, m_q=1 / 31.48)
print(f"cost coefficient from throughputs: {ce:.4f}")

print(f"\n{'alpha':>6} {'gamma':>6} {'single':>8} {'batch':>8} {'serial':>8}")
for alpha in (0.6, 0.8, 0.9):
    for gamma in (5, 10):
        params = SpeedupParams(alpha=alpha, gamma=gamma, cost_coeff=ce,
                               candidates=5, batch_cost=1.25)
        print(f"{alpha:>6} {gamma:>6} "
              f"{expected_speedup(params):>8.3f} "
              f"{expected_speedup_batch(params):>8.3f} "
              f"{expected_speedup_serial(params):>8.3f}")

# the simulation draws per-token accepts at rate alpha and pays constant
# draft/verify costs; it lands on the formulas up to Monte Carlo noise
params = SpeedupParams(alpha=0.8, gamma=5, cost_coeff=ce, candidates=5,
                       batch_cost=1.25)
rng = Rng(0)
print("\nformula vs simulation at 1e5 iterations:")
for mode, formula in (("vanilla", expected_speedup),
                      ("batch", expected_speedup_batch),
                      ("serial", expected_speedup_serial)):
    sim = simulate_speedup(params, mode, 100_000, rng.split(mode))
    print(f"  {mode:>8}: {formula(params):.4f} vs {sim:.4f}")

# batching more candidates lifts acceptance by the batch-and-select law
print("\nexpected acceptance 1-(1-alpha)^m - eps at alpha=0.6, eps=0.02:")
for m in (1, 2, 3, 5):
    print(f"  m={m}: {batch_acceptance(0.6, m, 0.02):.4f}")
