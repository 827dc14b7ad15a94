"""Value types and the deterministic random source.

The generator is xoshiro256** seeded through SplitMix64. The same algorithm is
compiled into the Cython kernels; both sides share the generator state through
the four public state words, so a run produces one continuous, engine-agnostic
draw sequence. See the README for the exact draw conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from lexidiag.errors import ContractViolationError, InvalidConfigError, InvalidInputError

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(x: int) -> int:
    """SplitMix64 output function: advance by the golden gamma, then finalize."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit seed for a work unit, e.g. (treatment, replicate).

    seed = mix64(master); then for each index i: seed = mix64(seed ^ mix64(i)).
    """
    s = mix64(master_seed & _MASK64)
    for ix in indices:
        s = mix64(s ^ mix64(ix & _MASK64))
    return s


class RandomSource:
    """Seeded xoshiro256** generator; every draw is a pure function of the seed.

    State lives in the four integers s0..s3 so the compiled kernels can pick up
    the stream mid-run and hand it back bit-exactly.
    """

    __slots__ = ("seed", "s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        # State words come from the SplitMix64 stream started at the seed.
        x = self.seed
        out = []
        for _ in range(4):
            out.append(mix64(x))
            x = (x + _GOLDEN) & _MASK64
        self.s0, self.s1, self.s2, self.s3 = out
        if self.s0 == self.s1 == self.s2 == self.s3 == 0:
            self.s0 = _GOLDEN  # xoshiro forbids the all-zero state

    def _next64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s1 * 5) & _MASK64
        result = ((x << 7 | x >> 57) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << 45 | s3 >> 19) & _MASK64
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform float64 in [0.0, 1.0), 53 significant bits."""
        return (self._next64() >> 11) * _INV_2_53

    def uniform(self, a: float, b: float) -> float:
        """Uniform float64 in [a, b)."""
        return a + (b - a) * self.random()

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection; n == 1 draws nothing."""
        if n <= 0:
            raise InvalidInputError(f"randbelow needs n >= 1, got {n}")
        if n == 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            r = self._next64() & mask
            if r < n:
                return r

    def gauss(self, mean: float = 0.0, sd: float = 1.0) -> float:
        """Gaussian draw via Box-Muller; consumes exactly two uniforms."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(6.283185307179586 * u2)
        return mean + sd * z

    def shuffle(self, seq) -> None:
        """In-place Fisher-Yates shuffle (descending), n - 1 randbelow draws."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    @property
    def state(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)


def random_genotype(dim: int, rng: RandomSource) -> np.ndarray:
    """Fresh genotype with every gene uniform in [0.0, 1.0)."""
    if dim < 1:
        raise InvalidConfigError(f"genotype dimensionality must be >= 1, got {dim}")
    return np.array([rng.random() for _ in range(dim)], dtype=np.float64)


@dataclass
class Individual:
    """One solution: a genotype plus, after evaluation, its phenotype.

    activation_gene is set only under the contradictory-objectives transform.
    """

    genotype: np.ndarray
    phenotype: np.ndarray | None = None
    activation_gene: int | None = None


class Population:
    """Fixed-size ordered collection of individuals, stored as row matrices.

    genes (and, once evaluated, traits) are N x D float64 arrays; activations
    is an N-vector of trait indices or None outside the contradictory
    diagnostic. Rows materialize as Individual views on demand.
    """

    def __init__(
        self,
        genes: np.ndarray,
        traits: np.ndarray | None = None,
        activations: np.ndarray | None = None,
    ):
        genes = np.ascontiguousarray(genes, dtype=np.float64)
        if genes.ndim != 2 or genes.shape[0] < 1:
            raise InvalidConfigError("population needs a nonempty N x D gene matrix")
        if traits is not None:
            traits = np.ascontiguousarray(traits, dtype=np.float64)
            if traits.shape != genes.shape:
                raise ContractViolationError("traits shape must match genes shape")
        if activations is not None:
            activations = np.ascontiguousarray(activations, dtype=np.intp)
            if activations.shape != (genes.shape[0],):
                raise ContractViolationError("activations must be one index per member")
        self.genes = genes
        self.traits = traits
        self.activations = activations

    @classmethod
    def from_individuals(cls, members: list[Individual]) -> "Population":
        genes = np.stack([m.genotype for m in members])
        traits = None
        if all(m.phenotype is not None for m in members):
            traits = np.stack([m.phenotype for m in members])
        acts = None
        if all(m.activation_gene is not None for m in members):
            acts = np.array([m.activation_gene for m in members], dtype=np.intp)
        return cls(genes, traits, acts)

    @property
    def size(self) -> int:
        return self.genes.shape[0]

    @property
    def dim(self) -> int:
        return self.genes.shape[1]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> Individual:
        return Individual(
            genotype=self.genes[i],
            phenotype=None if self.traits is None else self.traits[i],
            activation_gene=None if self.activations is None else int(self.activations[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(self.size))
