"""Counter-based random streams.

Every random draw in the package comes from a Philox-4x64 counter-based
generator keyed through ``numpy.random.SeedSequence``. Substreams are
addressed by an integer namespace plus integer coordinates, so any stream
can be reconstructed independently of execution order:

==================  ==========================================
namespace           coordinates
==================  ==========================================
NS_POPULATION       (k,)        population k of generate_dataset(seed)
NS_BOOTSTRAP        ()          one stream per run_bootstrap(seed); replicate
                                b consumes row b of the block draws, i.e. a
                                fixed counter range of the stream
NS_MC_DATA          (g, r)      dataset of replicate r at grid point g
NS_MC_BOOT          (g, r, s)   bootstrap draws for scheme index s inside
                                replicate r at grid point g
==================  ==========================================

Seeds may be any Python int; they are reduced modulo 2**64 so negative
64-bit values are accepted.
"""

import numpy as np

NS_POPULATION = 1
NS_BOOTSTRAP = 2
NS_MC_DATA = 3
NS_MC_BOOT = 4

_U64 = (1 << 64) - 1


def substream(seed, namespace, *coords):
    """Return a Generator for the (namespace, *coords) substream of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & _U64,
                                spawn_key=(namespace, *map(int, coords)))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, namespace, *coords):
    """Derive a fresh 64-bit integer seed from (seed, namespace, *coords)."""
    ss = np.random.SeedSequence(entropy=int(seed) & _U64,
                                spawn_key=(namespace, *map(int, coords)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
