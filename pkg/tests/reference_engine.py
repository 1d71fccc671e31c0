"""Plain-Python trade engine used as a lockstep oracle.

Written without numpy or numba on purpose: integer xoshiro256**, list-based
wealth, and a full sort for the poorest set.
"""
import math

MASK = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK


class Xoshiro:
    def __init__(self, words):
        self.s = [int(w) for w in words]

    def next_u64(self):
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self):
        return (self.next_u64() >> 11) * 2.0 ** -53

    def index(self, n):
        return int(self.uniform() * n)


def splitmix64(seed, count):
    out = []
    z = seed & MASK
    for _ in range(count):
        z = (z + 0x9E3779B97F4A7C15) & MASK
        x = z
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(x ^ (x >> 31))
    return out


class ReferenceEconomy:
    def __init__(self, wealth, rng_words, tax_rate, n_beneficiaries):
        self.w = [float(x) for x in wealth]
        self.rng = Xoshiro(rng_words)
        self.f = tax_rate
        self.k = n_beneficiaries

    def step(self):
        n = len(self.w)
        i = self.rng.index(n)
        j = self.rng.index(n - 1)
        if j >= i:
            j += 1
        eps = self.rng.uniform()
        total = self.w[i] + self.w[j]
        self.w[i] = (1.0 - self.f) * eps * total
        self.w[j] = (1.0 - self.f) * (1.0 - eps) * total
        pool = self.f * total
        if self.k >= n:
            chosen = range(n)
        else:
            chosen = sorted(range(n), key=lambda r: (self.w[r], r))[:self.k]
        if pool > 0:
            share = pool / len(chosen)
            for r in chosen:
                self.w[r] += share
        return i, j, eps, pool

    def total(self):
        return math.fsum(self.w)
