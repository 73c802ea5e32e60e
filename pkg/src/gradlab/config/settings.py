"""Runtime settings read from the environment.

Settings affect how work is scheduled and logged, never what is
computed, so they are kept out of every written artifact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from ..core.errors import ConfigError

THREADS_ENV = "GRADLAB_THREADS"
LOG_FILE_ENV = "GRADLAB_LOG_FILE"


@dataclass(frozen=True)
class Settings:
    """Process-wide runtime preferences."""

    threads: int = 1
    log_file: Optional[Path] = None

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        env = os.environ if environ is None else environ
        raw = env.get(THREADS_ENV, "").strip()
        threads = 1
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
            if threads < 1:
                raise ConfigError(f"{THREADS_ENV} must be >= 1, got {threads}")
        log_file = env.get(LOG_FILE_ENV) or None
        return cls(threads=threads, log_file=Path(log_file) if log_file else None)
