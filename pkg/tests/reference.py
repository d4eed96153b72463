"""Plain Euclidean implementations of one optimizer step, used as oracles.

They consume random numbers in the same order as the manifold versions so a
shared seed produces the same candidates, but all update algebra is written
out here from the textbook formulas.
"""
import math

import numpy as np


def draw_ball(rng, C, sigma, radius, n):
    """Rejection draws, one candidate per unfilled slot per round."""
    L = np.linalg.cholesky(C)
    d = C.shape[0]
    out = [None] * n
    pending = list(range(n))
    for _ in range(100 * d):
        if not pending:
            break
        z = rng.standard_normal((len(pending), d))
        still = []
        for slot, zi in zip(pending, z):
            c = sigma * (L @ zi)
            if math.sqrt(c @ c) <= radius:
                out[slot] = c
            else:
                still.append(slot)
        pending = still
    assert not pending, "reference sampler expects no fallback"
    return np.array(out)


def weights(m2):
    raw = [math.log((m2 + 1) / i) for i in range(1, m2 + 1)]
    s = sum(raw)
    return np.array([w / s for w in raw])


def rsdfo_reference(mean, C, sigma, f, m1, m2, rng, radius):
    ys = draw_ball(rng, C, sigma, radius, m1)
    vals = [f(mean + y) for y in ys]
    order = sorted(range(m1), key=lambda i: vals[i])
    best = ys[order[:m2]]
    w = weights(m2)
    step = sum(wi * b for wi, b in zip(w, best))
    newC = sum(wi * np.outer(b - step, b - step) for wi, b in zip(w, best)) / sigma ** 2
    return mean + step, newC


def cma_constants(N, m2):
    w = weights(m2)
    mu_eff = 1 / sum(w ** 2)
    cs = (mu_eff + 2) / (N + mu_eff + 3)
    cc = 4 / (N + 4)
    mu_cov = mu_eff
    ccov = 2 / (mu_cov * (N + math.sqrt(2)) ** 2) + (1 - 1 / mu_cov) * min(
        1, (2 * mu_cov - 1) / ((N + 2) ** 2 + mu_cov))
    ds = 1 + 2 * max(0, math.sqrt((mu_eff - 1) / (N + 1))) + cs
    chi = math.sqrt(N) * (1 - 1 / (4 * N) + 1 / (21 * N ** 2))
    return w, mu_eff, cs, cc, mu_cov, ccov, ds, chi


def cma_reference(mean, C, sigma, ps, pc, f, m1, m2, rng, radius):
    N = len(mean)
    w, mu_eff, cs, cc, mu_cov, ccov, ds, chi = cma_constants(N, m2)
    ys = draw_ball(rng, C, sigma, radius, m1)
    vals = [f(mean + y) for y in ys]
    order = sorted(range(m1), key=lambda i: vals[i])
    best = ys[order[:m2]]
    step = sum(wi * b for wi, b in zip(w, best))
    ev, V = np.linalg.eigh(C)
    C_inv_half = V @ np.diag(ev ** -0.5) @ V.T
    ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mu_eff) * C_inv_half @ (step / sigma)
    pc = (1 - cc) * pc + math.sqrt(cc * (2 - cc) * mu_eff) * (step / sigma)
    rank = sum(wi * np.outer(b, b) for wi, b in zip(w, best)) / sigma ** 2
    C = (1 - ccov) * C + ccov / mu_cov * np.outer(pc, pc) + ccov * (1 - 1 / mu_cov) * rank
    sigma = sigma * math.exp(cs / ds * (np.linalg.norm(ps) / chi - 1))
    return mean + step, C, sigma, ps, pc


def pso_reference(xs, vs, pbest, gbest, w, c, s, rng, limit):
    new_x, new_v = [], []
    for x, v, p in zip(xs, vs, pbest):
        a, b = rng.uniform(size=2)
        nv = w * v + c * a * (p - x) + s * b * (gbest - x)
        n = np.linalg.norm(nv)
        if n > limit:
            nv = nv * limit / n
        new_x.append(x + nv)
        new_v.append(nv)
    return new_x, new_v
