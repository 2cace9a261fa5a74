"""Prime sieves and factorization helpers."""

from functools import lru_cache

import numpy as np

from .errors import ValidationError

SIEVE_LIMIT = 10**7


@lru_cache(maxsize=8)
def _sieve(n):
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    primes = np.flatnonzero(is_prime)
    primes.flags.writeable = False
    return primes


def primes_up_to(n):
    """Sorted int64 array of primes <= n."""
    n = int(n)
    if n < 2:
        return np.array([], dtype=np.int64)
    # sieve to the next power of two so nearby requests share the cache
    size = max(1024, 1 << (n - 1).bit_length())
    primes = _sieve(size)
    return primes[: np.searchsorted(primes, n, side="right")]


def prime_pi(x):
    """Prime counting function; refuses beyond the sieve limit."""
    if x > SIEVE_LIMIT:
        raise ValidationError(f"prime_pi limited to x <= {SIEVE_LIMIT:.0e}, got {x}")
    return len(primes_up_to(int(x)))


def nth_prime(n):
    """The n-th prime (1-based)."""
    if n < 1:
        raise ValidationError("prime index is 1-based")
    bound = 16
    while True:
        primes = primes_up_to(bound)
        if len(primes) >= n:
            return int(primes[n - 1])
        bound *= 2


@lru_cache(maxsize=8)
def smallest_prime_factor(n):
    """Array spf with spf[k] the least prime factor of k (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        block = spf[p::p]
        block[block == 0] = p
    spf.flags.writeable = False
    return spf


def factorize(n):
    """Prime factorization of a positive integer as ``{p: exponent}``."""
    n = int(n)
    if n < 1:
        raise ValidationError(f"cannot factor {n}")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def valuation(values, p):
    """Exponent of ``p`` in each entry of an integer array."""
    values = np.asarray(values, dtype=np.int64)
    out = np.zeros(values.shape, dtype=np.int64)
    rest = values.copy()
    mask = (rest % p == 0) & (rest != 0)
    while mask.any():
        out[mask] += 1
        rest[mask] //= p
        mask = (rest % p == 0) & (rest != 0)
    return out
