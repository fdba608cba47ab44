import hashlib
import json
import logging
import random
from fractions import Fraction

from enumerations.constructed import Denumeration, freeze
from enumerations.prescription import Prescription

logger = logging.getLogger(__name__)

CACHE_FORMAT = "saltus-denumeration-cache"
CACHE_VERSION = 1
DEFAULT_CACHE_SIZE = 2000
SPOT_CHECKS = 100


class CorruptCacheError(ValueError):
    pass


class FingerprintMismatch(CorruptCacheError):
    pass


def _records_digest(records: list[list[int]]) -> str:
    body = "\n".join(f"{n} {num} {den}" for n, num, den in records)
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def save_cache(denum: Denumeration, path: str, size: int = DEFAULT_CACHE_SIZE) -> None:
    records = [list(record) for record in denum.records(size)]
    payload = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "fingerprint": denum.prescription.fingerprint(),
        "params": denum.params.as_records(),
        "records_digest": _records_digest(records),
        "records": records,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    logger.info(f"Wrote {len(records)} cache records to {path}")


def load_cache(path: str, prescription: Prescription) -> Denumeration:
    """Rebuild phi for the prescription and check the cache file against it."""
    try:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptCacheError(f"{path} is not valid JSON: {e}") from e

    if payload.get("format") != CACHE_FORMAT or payload.get("version") != CACHE_VERSION:
        raise CorruptCacheError(f"{path}: unsupported cache format {payload.get('format')!r} v{payload.get('version')!r}")
    if payload.get("fingerprint") != prescription.fingerprint():
        raise FingerprintMismatch(f"{path} was built for a different prescription")

    records = payload.get("records", [])
    if _records_digest(records) != payload.get("records_digest"):
        raise CorruptCacheError(f"{path}: record digest mismatch")
    if [n for n, _, _ in records] != sorted({n for n, _, _ in records}):
        raise CorruptCacheError(f"{path}: records are not sorted by index")

    denum = freeze(prescription, validation_depth=0)
    if payload.get("params") != denum.params.as_records():
        raise CorruptCacheError(f"{path}: construction params differ from recomputation")

    rng = random.Random(payload["fingerprint"])
    sample = records if len(records) <= SPOT_CHECKS else rng.sample(records, SPOT_CHECKS)
    for n, num, den in sample:
        if denum.decode_index(n) != Fraction(num, den):
            raise CorruptCacheError(f"{path}: record for index {n} disagrees with recomputation")

    denum.seed_records([tuple(record) for record in records])
    logger.info(f"Loaded {len(records)} cache records from {path}")
    return denum


def cache_roundtrip(denum: Denumeration, path: str, size: int = DEFAULT_CACHE_SIZE) -> Denumeration:
    save_cache(denum, path, size)
    return load_cache(path, denum.prescription)
