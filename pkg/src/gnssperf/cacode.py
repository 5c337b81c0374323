"""GPS L1 C/A spreading code generation.

Classic two-register Gold code construction: G1 with taps 3,10 and G2
with taps 2,3,6,8,9,10, both 10 stages, all-ones start state. Each PRN
selects two G2 stages whose XOR delays G2 against G1. Chips come out as
+/-1 with binary 1 mapped to +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gnssperf.errors import InvalidInputError

CODE_LENGTH = 1023
CHIP_RATE_HZ = 1.023e6

# G2 phase-select stages per PRN 1..32 (1-indexed stages)
_G2_TAPS = {
    1: (2, 6), 2: (3, 7), 3: (4, 8), 4: (5, 9), 5: (1, 9), 6: (2, 10),
    7: (1, 8), 8: (2, 9), 9: (3, 10), 10: (2, 3), 11: (3, 4), 12: (5, 6),
    13: (6, 7), 14: (7, 8), 15: (8, 9), 16: (9, 10), 17: (1, 4), 18: (2, 5),
    19: (3, 6), 20: (4, 7), 21: (5, 8), 22: (6, 9), 23: (1, 3), 24: (4, 6),
    25: (5, 7), 26: (6, 8), 27: (7, 9), 28: (8, 10), 29: (1, 6), 30: (2, 7),
    31: (3, 8), 32: (4, 9),
}


@dataclass(frozen=True)
class CaCode:
    prn: int
    chips: np.ndarray  # 1023 values in {+1, -1}, int8, read-only

    def __len__(self):
        return CODE_LENGTH


@lru_cache(maxsize=None)
def generate_ca_code(prn: int) -> CaCode:
    """Deterministic 1023-chip C/A sequence for PRN 1..32."""
    if not isinstance(prn, int) or not 1 <= prn <= 32:
        raise InvalidInputError(f"prn must be an integer in 1..32, got {prn!r}")
    s1, s2 = _G2_TAPS[prn]
    g1 = [1] * 10
    g2 = [1] * 10
    chips = np.empty(CODE_LENGTH, dtype=np.int8)
    for i in range(CODE_LENGTH):
        bit = g1[9] ^ g2[s1 - 1] ^ g2[s2 - 1]
        chips[i] = 1 if bit else -1
        f1 = g1[2] ^ g1[9]
        f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9]
        g1 = [f1] + g1[:9]
        g2 = [f2] + g2[:9]
    chips.setflags(write=False)
    return CaCode(prn=prn, chips=chips)


def circular_autocorrelation(code: CaCode, lag: int) -> int:
    """Integer circular autocorrelation at one lag (1023 at lag 0)."""
    c = code.chips.astype(np.int32)
    return int(np.dot(c, np.roll(c, lag)))


def circular_crosscorrelation(a: CaCode, b: CaCode, lag: int) -> int:
    ca = a.chips.astype(np.int32)
    cb = np.roll(b.chips.astype(np.int32), lag)
    return int(np.dot(ca, cb))
