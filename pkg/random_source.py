"""
Random Source Module
Seedable random streams built on numpy's SeedSequence / SFC64 generators
"""

from typing import List, Sequence, TypeVar

from numpy.random import Generator, SeedSequence, SFC64

T = TypeVar("T")

# numpy's integers() is limited to int64 bounds
_INT64_BOUND = 2 ** 63


class RandomSource:
    """
    Reproducible random stream

    Child streams are independent of each other and of the parent, so
    components can draw in any order without disturbing one another.
    """

    def __init__(self, seed: int = 0, spawn_key: Sequence[int] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        self._gen = Generator(SFC64(SeedSequence(self.seed, spawn_key=self.spawn_key)))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, spawn_key={self.spawn_key})"

    def child(self, *key: int) -> "RandomSource":
        """Derive an independent stream identified by key"""
        return RandomSource(self.seed, self.spawn_key + tuple(key))

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)"""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        if bound < _INT64_BOUND:
            return int(self._gen.integers(0, bound))
        # Rejection sampling for big moduli
        nbytes = (bound.bit_length() + 7) // 8
        mask = (1 << bound.bit_length()) - 1
        while True:
            value = int.from_bytes(self._gen.bytes(nbytes), "big") & mask
            if value < bound:
                return value

    def between(self, low: int, high: int) -> int:
        """Uniform integer in [low, high]"""
        return low + self.below(high - low + 1)

    def token(self, nbytes: int) -> str:
        """Random hex token"""
        return self._gen.bytes(nbytes).hex()

    def shuffled(self, items: Sequence[T]) -> List[T]:
        """Return a permuted copy of items"""
        order = self._gen.permutation(len(items))
        return [items[int(i)] for i in order]

    def sample(self, items: Sequence[T], k: int) -> List[T]:
        """Choose k distinct items, keeping draw order"""
        if k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        picks = self._gen.choice(len(items), size=k, replace=False)
        return [items[int(i)] for i in picks]
