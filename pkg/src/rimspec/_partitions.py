"""Set partitions of small index sets, cached for the cumulant algebra."""

from __future__ import annotations

from functools import lru_cache
from math import factorial


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple:
    """All partitions of {0, ..., n-1} as tuples of sorted blocks."""
    if n == 0:
        return ((),)
    if n == 1:
        return (((0,),),)
    out = []
    # place element n-1 into each block of each partition of n-1, or alone
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            blocks = list(part)
            blocks[i] = blocks[i] + (n - 1,)
            out.append(tuple(blocks))
        out.append(part + ((n - 1,),))
    return tuple(out)


def mobius_coefficient(n_blocks: int) -> int:
    """Coefficient (-1)^(k-1) (k-1)! of a k-block partition in the moment->cumulant inversion."""
    return (-1) ** (n_blocks - 1) * factorial(n_blocks - 1)
