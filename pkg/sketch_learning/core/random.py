"""
Seeded random streams.

All randomness in the package comes from :func:`stream`, a Philox
counter-based generator keyed by ``SeedSequence(seed, spawn_key=(stream_id,))``.
Each consumer owns a named stream, so drawing from one (say, privacy noise)
never shifts the draws of another (say, the frequency operator), and a given
``(seed, name)`` pair reproduces the same numbers in any process.

Documented draw orders:

- ``operator`` (dense): ``m * d`` standard normals, row-major, scaled by sigma_w.
- ``operator`` (structured): per block, ``d_pad * d_pad`` standard normals whose
  row norms form the chi diagonal, then ``3 * d_pad`` Rademacher signs
  (D1, D2, D3 in that order).
- ``dither``: ``m`` uniforms on [0, 1).
- ``privacy``: one Laplace/Gaussian draw per real coordinate, real and imaginary
  parts interleaved for complex sketches.
"""

import numpy as np

STREAMS: dict[str, int] = {
    "operator": 0,
    "dither": 1,
    "privacy": 2,
    "solver": 3,
    "reservoir": 4,
    "synthetic": 5,
    "baseline": 6,
}


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for the named stream of ``seed``."""
    try:
        stream_id = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown random stream {name!r}") from None
    seq = np.random.SeedSequence(int(seed), spawn_key=(stream_id,))
    return np.random.Generator(np.random.Philox(seq))
