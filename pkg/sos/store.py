"""On-disk cache of solved indicator certificates.

One JSON document per certificate. The filename is the sha256 of the
canonical JSON of (target, degree, solver profile), so the online step can
look a certificate up without solving anything.
"""

import asyncio
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import AsyncIterator, Dict, List, Optional

import aiofiles

from .errors import MissingCertificate
from .indicator import IndicatorCertificate, approximate_indicator, even_degree
from .intervals import IntervalSet
from .sdp import SolverConfig
from .validators import AuditTolerances

logger = logging.getLogger(__name__)


def certificate_key(target: IntervalSet, degree: int, cfg: Optional[SolverConfig] = None) -> str:
    """Content hash naming the cache file of a certificate."""
    cfg = cfg or SolverConfig()
    payload = {
        "target": [[float(a).hex(), float(b).hex()] for a, b in target],
        "degree": even_degree(degree),
        "solver": cfg.model_dump(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


class CertificateStore:
    """Async certificate cache rooted at ``cache_dir``."""

    def __init__(self, cache_dir: str = "./certificates"):
        self.cache_dir = Path(cache_dir)
        self._locks: Dict[str, asyncio.Lock] = {}
        self.hits = 0
        self.misses = 0

    async def initialize(self) -> None:
        """Create the cache directory if needed."""
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        logger.debug("certificate cache at %s", self.cache_dir)

    def path_for(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def contains(self, key: str) -> bool:
        return self.path_for(key).exists()

    async def load(self, key: str) -> IndicatorCertificate:
        path = self.path_for(key)
        if not path.exists():
            raise MissingCertificate(key)
        async with aiofiles.open(path, "r") as f:
            content = await f.read()
        return IndicatorCertificate.from_document(json.loads(content))

    async def save(self, cert: IndicatorCertificate, cfg: Optional[SolverConfig] = None) -> str:
        """Write ``cert`` atomically (temp file, then rename) and return its key."""
        await self.initialize()
        key = certificate_key(cert.target, cert.degree, cfg)
        path = self.path_for(key)
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        async with aiofiles.open(tmp, "w") as f:
            await f.write(json.dumps(cert.to_document(), indent=2, sort_keys=True))
        os.replace(tmp, path)
        logger.debug("stored certificate %s", key[:12])
        return key

    async def fetch_or_solve(
        self,
        target: IntervalSet,
        degree: int,
        cfg: Optional[SolverConfig] = None,
        audit: Optional[AuditTolerances] = None,
        solve_missing: bool = True,
    ) -> IndicatorCertificate:
        """Cached certificate for (target, degree, cfg), solving it on a miss."""
        cfg = cfg or SolverConfig()
        key = certificate_key(target, degree, cfg)
        lock = self._locks.setdefault(key, asyncio.Lock())
        async with lock:
            if self.contains(key):
                self.hits += 1
                logger.info("certificate cache hit for %s at d=%d", target, even_degree(degree))
                return await self.load(key)
            self.misses += 1
            if not solve_missing:
                raise MissingCertificate(key, f"{target} at d={even_degree(degree)}")
            logger.info("certificate cache miss for %s at d=%d, solving", target, even_degree(degree))
            cert = await asyncio.to_thread(approximate_indicator, target, degree, cfg, audit)
            await self.save(cert, cfg)
            return cert

    def keys(self) -> List[str]:
        if not self.cache_dir.exists():
            return []
        return sorted(p.stem for p in self.cache_dir.glob("*.json"))

    async def iter_certificates(self) -> AsyncIterator[IndicatorCertificate]:
        for key in self.keys():
            yield await self.load(key)
