"""Counter-based random streams for reproducible, order-independent sampling.

Every draw is a pure function of (seed, individual id, stream tag), so datasets
are identical no matter how generation is scheduled or parallelised. The mixing
function is SplitMix64 (Steele, Lea & Flood 2014), applied as a keyed hash over
the (seed, id, stream) triple.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# Named substreams. One individual consumes at most one draw per stream.
STREAM_STRATUM = 0
STREAM_EVENT_PRIMARY = 1    # T(0) draw; shared draw under comonotone coupling
STREAM_EVENT_SECONDARY = 2  # T(1) draw under independent coupling
STREAM_CENSORING = 3
STREAM_REPLICATE = 4        # replicate seed derivation, ids = replicate index


def _mix64(z):
    """SplitMix64 finalizer, vectorised over uint64 arrays."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _validate_seed(seed):
    if not (0 <= int(seed) < 2**64):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.uint64(seed)


def substream_uniforms(seed, ids, stream):
    """Uniforms in the open interval (0, 1), one per id, for a named substream.

    The value at a given (seed, id, stream) never depends on which other ids
    are being generated alongside it.
    """
    key = _validate_seed(seed)
    ids = np.asarray(ids, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64(key + _GAMMA * np.uint64(stream + 1))
        bits = _mix64((ids + np.uint64(1)) * _GAMMA + z)
    # 53 high bits, offset by half an ulp: strictly inside (0, 1)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def substream_exponentials(seed, ids, stream, rate):
    """Exponential(rate) draws by inversion; `rate` may be scalar or per-id."""
    u = substream_uniforms(seed, ids, stream)
    return -np.log(u) / rate


def derive_seed(seed, index):
    """Deterministic child seed for replicate `index` of a parent seed."""
    key = _validate_seed(seed)
    with np.errstate(over="ignore"):
        z = _mix64(key + _GAMMA * np.uint64(STREAM_REPLICATE + 1))
        child = _mix64((np.uint64(index) + np.uint64(1)) * _GAMMA + z)
    return int(child)
