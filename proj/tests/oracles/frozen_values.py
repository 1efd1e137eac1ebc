"""Independent oracles for values frozen into the C++ unit tests.

Run with `python3 tests/oracles/frozen_values.py`; the printed numbers are
pasted into tests/test_glm.cpp and tests/test_glmm_marginal.cpp. Nothing here
shares code with the library.
"""
import numpy as np
from scipy import stats
from scipy.special import gammaln

# Bernoulli-logit cluster, n = 20, p = 2
X1 = np.array([-1.9, -1.6, -1.3, -1.1, -0.9, -0.7, -0.5, -0.35, -0.2, -0.05,
               0.05, 0.2, 0.35, 0.5, 0.7, 0.9, 1.1, 1.3, 1.6, 1.9])
Y = np.array([0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 1, 1])


def bernoulli_grid():
    grid = np.round(np.arange(-5.0, 5.0 + 5e-4, 1e-3), 3)
    best = (-np.inf, None, None)
    for b0 in grid:
        eta = b0 + np.outer(grid, X1)             # rows: b1 values
        ll = (Y * eta - np.logaddexp(0.0, eta)).sum(axis=1)
        k = int(np.argmax(ll))
        if ll[k] > best[0]:
            best = (ll[k], b0, grid[k])
    return best


# Poisson cluster for the direct density-sum oracle
PX = np.array([0.1, 0.4, -0.3, 0.8, 1.2, -0.7, 0.0, 0.5])
PY = np.array([1, 2, 0, 3, 4, 0, 1, 2])
PBETA = np.array([0.25, 0.6])

# Gaussian cluster for the direct density-sum oracle (variance profiled at beta)
GX = np.array([0.3, -1.2, 0.8, 1.5, -0.4, 0.0])
GY = np.array([1.1, -0.9, 1.7, 2.8, 0.2, 0.6])
GBETA = np.array([0.4, 1.1])


def main():
    ll, b0, b1 = bernoulli_grid()
    print(f"bernoulli grid argmax: beta0={b0:.3f} beta1={b1:.3f} loglik={ll:.12f}")

    mu = np.exp(PBETA[0] + PBETA[1] * PX)
    print(f"poisson direct loglik: {stats.poisson.logpmf(PY, mu).sum():.15f}")

    mu_g = GBETA[0] + GBETA[1] * GX
    s2 = np.mean((GY - mu_g) ** 2)
    print(f"gaussian direct loglik: {stats.norm.logpdf(GY, mu_g, np.sqrt(s2)).sum():.15f}")

    y = np.array([1, 2, 3])
    print(f"poisson intercept-only max loglik: {(y * np.log(2) - 2 - gammaln(y + 1)).sum():.15f}")


if __name__ == "__main__":
    main()
