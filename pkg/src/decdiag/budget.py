"""Cooperative deadlines shared by the search procedures."""

from __future__ import annotations

import time
from typing import Optional


class Timeout(Exception):
    pass


class Deadline:
    """Raises :class:`Timeout` from :meth:`check` once ``seconds`` have passed."""

    def __init__(self, seconds: Optional[float] = None):
        self.expires = None if seconds is None else time.monotonic() + seconds

    def check(self):
        if self.expires is not None and time.monotonic() > self.expires:
            raise Timeout()

    @property
    def expired(self) -> bool:
        return self.expires is not None and time.monotonic() > self.expires


NO_DEADLINE = Deadline(None)
