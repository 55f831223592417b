"""
Maximal coupling: accept, reject, correct
=========================================

A token drafted from p is accepted with probability min(1, q/p); on
rejection the replacement comes from the residual distribution, the
normalized excess of q over min(p, q). The marginal of the whole
procedure is exactly q - verified here two ways, by enumerating the
branch probabilities and by Monte Carlo.
"""

import numpy as np

from specmer import Rng, acceptance_probability, couple, residual, sample
from specmer.coupling import empirical_marginal, exact_marginal

p = np.array([0.9, 0.1])
q = np.array([0.6, 0.4])

print("overlap (acceptance probability):", acceptance_probability(p, q))
print("residual distribution:", residual(p, q))

# enumerated output marginal reproduces q to rounding error
marginal = exact_marginal(p, q)
print("enumerated marginal:", marginal, "| max dev from q:",
      float(np.abs(marginal - q).max()))

# watch a few individual decisions
rng = Rng(7)
for _ in range(5):
    x = sample(p, rng)
    out = couple(x, p, q, rng)
    verdict = "accept" if out.accepted else f"correct -> {out.token}"
    print(f"  drafted {x}, eta={out.eta:.3f}: {verdict}")

# empirical frequencies converge on q with binomial noise
n = 100_000
emp = empirical_marginal(p, q, n, Rng(8))
sigma = np.sqrt(q * (1 - q) / n)
print(f"empirical marginal at {n} draws:", np.round(emp, 4),
      "| max dev:", round(float((np.abs(emp - q) / sigma).max()), 2), "sigma")
