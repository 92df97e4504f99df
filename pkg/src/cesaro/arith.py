"""Tables of the Euler totient and divisor-sum functions.

Tables up to ``LINEAR_LIMIT`` come from a linear (smallest-prime-factor)
sieve; larger ones are built segment by segment from the primes below
``sqrt(n_max)`` so the auxiliary memory stays bounded.  Both paths give the
same flat, read-only ``values`` array indexed ``1..n_max`` (slot 0 holds 0).

Cache file layout, all integers little-endian::

    offset  size        field
    0       8           magic b"CRSIEVE1" (the trailing digit is the version)
    8       1           func_id (1 = phi, 2 = sigma)
    9       7           reserved, must be zero
    16      8           n_max (uint64)
    24      8*n_max     values[1..n_max] (uint64)
    ...     8           checksum

The checksum is BLAKE2b with an 8-byte digest over every preceding byte of
the file, stored verbatim.
"""

from __future__ import annotations

import enum
import hashlib
import io
import math
import os
import struct
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .errors import CesaroError, InvalidArgument

MAX_N = 10**8
LINEAR_LIMIT = 1 << 25
SEGMENT_SIZE = 1 << 18
BRUTE_FORCE_MAX = 10**6

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

MAGIC = b"CRSIEVE1"
_MAGIC_STEM = MAGIC[:7]
_HEADER = struct.Struct("<8sB7sQ")


class FormatError(CesaroError):
    """A cache file is malformed; ``field`` names what failed."""

    module = "arith"

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ResourceError(CesaroError, MemoryError):
    module = "arith"


class FuncId(enum.IntEnum):
    PHI = 1
    SIGMA = 2

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise InvalidArgument(
                f"unknown arithmetic function {name!r} (expected phi or sigma)",
                module="arith",
            ) from None


@dataclass(frozen=True, eq=False)
class SieveTable:
    func_id: FuncId
    n_max: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.dtype != np.uint64 or self.values.shape != (self.n_max + 1,):
            raise InvalidArgument(
                "values must be a uint64 array of length n_max + 1", module="arith"
            )
        self.values.flags.writeable = False

    def __eq__(self, other):
        if not isinstance(other, SieveTable):
            return NotImplemented
        return (
            self.func_id == other.func_id
            and self.n_max == other.n_max
            and np.array_equal(self.values, other.values)
        )

    def __len__(self):
        return self.n_max

    def summatory(self, n=None):
        """Exact ``sum(values[1..n])`` as a Python int."""
        n = self.n_max if n is None else n
        return int(self.values[1 : n + 1].sum(dtype=np.uint64))

    def prefix(self, n):
        if not 1 <= n <= self.n_max:
            raise InvalidArgument(f"prefix length {n} outside 1..{self.n_max}", module="arith")
        return SieveTable(self.func_id, n, self.values[: n + 1].copy())


def _prime_bound(n):
    if n < 17:
        return 8
    return int(1.25506 * n / math.log(n)) + 16


@njit(cache=True)
def _linear_phi(n, primes):
    phi = np.zeros(n + 1, np.uint64)
    phi[1] = 1
    count = 0
    for i in range(2, n + 1):
        if phi[i] == 0:
            phi[i] = i - 1
            primes[count] = i
            count += 1
        for j in range(count):
            p = primes[j]
            m = i * p
            if m > n:
                break
            if i % p == 0:
                phi[m] = phi[i] * p
                break
            phi[m] = phi[i] * (p - 1)
    return phi


@njit(cache=True)
def _linear_sigma(n, primes):
    sig = np.zeros(n + 1, np.uint64)
    # power of the smallest prime dividing i, and the divisor sum of that power
    ppow = np.zeros(n + 1, np.uint64)
    psum = np.zeros(n + 1, np.uint64)
    sig[1] = 1
    ppow[1] = 1
    psum[1] = 1
    count = 0
    for i in range(2, n + 1):
        if sig[i] == 0:
            sig[i] = i + 1
            ppow[i] = i
            psum[i] = i + 1
            primes[count] = i
            count += 1
        for j in range(count):
            p = primes[j]
            m = i * p
            if m > n:
                break
            if i % p == 0:
                ppow[m] = ppow[i] * p
                psum[m] = psum[i] + ppow[m]
                sig[m] = sig[i // ppow[i]] * psum[m]
                break
            ppow[m] = p
            psum[m] = p + 1
            sig[m] = sig[i] * (p + 1)
    return sig


@njit(cache=True, parallel=True)
def _segmented(is_sigma, n, primes, seg):
    out = np.zeros(n + 1, np.uint64)
    nseg = (n + seg - 1) // seg
    for s in prange(nseg):
        lo = 1 + s * seg
        hi = min(n, lo + seg - 1)
        size = hi - lo + 1
        rem = np.arange(lo, hi + 1).astype(np.int64)
        val = np.ones(size, np.uint64)
        for t in range(primes.shape[0]):
            p = primes[t]
            if p * p > hi:
                break
            start = ((lo + p - 1) // p) * p
            for m in range(start, hi + 1, p):
                idx = m - lo
                r = rem[idx]
                pe = 1
                while r % p == 0:
                    r //= p
                    pe *= p
                rem[idx] = r
                if is_sigma:
                    val[idx] *= np.uint64((pe * p - 1) // (p - 1))
                else:
                    val[idx] *= np.uint64(pe - pe // p)
        for idx in range(size):
            r = rem[idx]
            if r > 1:
                if is_sigma:
                    val[idx] *= np.uint64(r + 1)
                else:
                    val[idx] *= np.uint64(r - 1)
        out[lo : hi + 1] = val
    return out


def _small_primes(limit):
    if limit < 2:
        return np.zeros(0, np.int64)
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mark[p]:
            mark[p * p :: p] = False
    return np.flatnonzero(mark).astype(np.int64)


def sieve(func_id, n_max, *, linear_limit=None, segment_size=None):
    """Return the table of phi or sigma on ``1..n_max``.

    ``linear_limit`` and ``segment_size`` override the switch-over point and
    segment length; results do not depend on either.
    """
    func_id = FuncId.parse(func_id)
    if isinstance(n_max, bool) or not isinstance(n_max, (int, np.integer)):
        raise InvalidArgument(f"n_max must be an integer, got {n_max!r}", module="arith")
    n_max = int(n_max)
    if not 1 <= n_max <= MAX_N:
        raise InvalidArgument(f"n_max={n_max} outside 1..{MAX_N}", module="arith")
    linear_limit = LINEAR_LIMIT if linear_limit is None else linear_limit
    segment_size = SEGMENT_SIZE if segment_size is None else segment_size
    try:
        if n_max <= linear_limit:
            primes = np.zeros(_prime_bound(n_max), np.int64)
            kernel = _linear_sigma if func_id is FuncId.SIGMA else _linear_phi
            values = kernel(n_max, primes)
        else:
            primes = _small_primes(math.isqrt(n_max))
            values = _segmented(func_id is FuncId.SIGMA, n_max, primes, int(segment_size))
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate table for n_max={n_max}", module="arith") from exc
    return SieveTable(func_id, n_max, values)


def brute_force_value(func_id, k):
    """phi(k) by counting coprime residues, or sigma(k) by trial division.

    Independent of :func:`sieve`; intended for ``k <= BRUTE_FORCE_MAX``.
    """
    func_id = FuncId.parse(func_id)
    k = int(k)
    if not 1 <= k <= BRUTE_FORCE_MAX:
        raise InvalidArgument(f"k={k} outside 1..{BRUTE_FORCE_MAX}", module="arith")
    if func_id is FuncId.PHI:
        return sum(1 for j in range(1, k + 1) if math.gcd(j, k) == 1)
    return sum(d for d in range(1, k + 1) if k % d == 0)


def _checksum(data):
    return hashlib.blake2b(data, digest_size=8).digest()


def dumps_table(table):
    header = _HEADER.pack(MAGIC, int(table.func_id), bytes(7), table.n_max)
    payload = table.values[1:].astype("<u8", copy=False).tobytes()
    body = header + payload
    return body + _checksum(body)


def loads_table(data):
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise FormatError("header", f"truncated: {len(data)} bytes, need {_HEADER.size}")
    magic, func, reserved, n_max = _HEADER.unpack_from(data)
    if magic != MAGIC:
        if magic[:7] == _MAGIC_STEM:
            raise FormatError("magic", f"unsupported format version {magic[7:]!r}")
        raise FormatError("magic", f"expected {MAGIC!r}, found {magic!r}")
    try:
        func_id = FuncId(func)
    except ValueError:
        raise FormatError("func_id", f"unknown function code {func}") from None
    if reserved != bytes(7):
        raise FormatError("reserved", "reserved bytes must be zero")
    if not 1 <= n_max <= MAX_N:
        raise FormatError("n_max", f"{n_max} outside 1..{MAX_N}")
    expected = _HEADER.size + 8 * n_max + 8
    if len(data) < expected:
        raise FormatError(
            "payload", f"declared n_max={n_max} needs {expected} bytes, file has {len(data)}"
        )
    if len(data) > expected:
        raise FormatError("payload", f"{len(data) - expected} trailing bytes after checksum")
    body = data[:-8]
    if _checksum(body) != data[-8:]:
        raise FormatError("checksum", "mismatch")
    values = np.zeros(n_max + 1, np.uint64)
    values[1:] = np.frombuffer(body, dtype="<u8", offset=_HEADER.size, count=n_max)
    return SieveTable(func_id, int(n_max), values)


def save_table(table, destination):
    """Write ``table`` to a path or a binary file object."""
    blob = dumps_table(table)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(blob)
    else:
        destination.write(blob)


def load_table(source):
    """Read a table from a path, a binary file object or raw bytes."""
    if isinstance(source, (bytes, bytearray, memoryview)):
        return loads_table(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return loads_table(fh.read())
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return loads_table(source.read())
    raise InvalidArgument(f"cannot read a table from {type(source).__name__}", module="arith")


def cached_sieve(func_id, n_max, cache_dir=None):
    """Like :func:`sieve` but reuses ``<cache_dir>/<func>_<n_max>.crsieve``.

    Any cached table of the same function that covers ``n_max`` is reused.
    """
    func_id = FuncId.parse(func_id)
    if cache_dir is None:
        return sieve(func_id, n_max)
    os.makedirs(cache_dir, exist_ok=True)
    prefix = f"{func_id.name.lower()}_"
    candidates = []
    for name in os.listdir(cache_dir):
        stem, ext = os.path.splitext(name)
        if ext == ".crsieve" and stem.startswith(prefix) and stem[len(prefix):].isdigit():
            size = int(stem[len(prefix):])
            if size >= n_max:
                candidates.append((size, name))
    if candidates:
        _, name = min(candidates)
        table = load_table(os.path.join(cache_dir, name))
        return table if table.n_max == n_max else table.prefix(n_max)
    table = sieve(func_id, n_max)
    path = os.path.join(cache_dir, f"{prefix}{n_max}.crsieve")
    tmp = path + ".tmp"
    save_table(table, tmp)
    os.replace(tmp, path)
    return table
