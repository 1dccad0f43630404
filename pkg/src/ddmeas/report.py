from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def _rounded(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return float(f"{v:.6e}")
    if isinstance(v, dict):
        return {k: _rounded(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_rounded(x) for x in v]
    return v


@dataclass(frozen=True)
class Check:
    """One numerical comparison.

    ``expect`` is ``"pass"`` for identities (ok iff error <= threshold),
    ``"fail"`` for negative controls (ok iff error > threshold) and ``"info"``
    for records that only carry measured values.
    """

    check_id: str
    equation: str
    error: float
    threshold: float
    params: dict = field(default_factory=dict)
    expect: str = "pass"
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        if self.expect == "pass":
            return bool(self.error <= self.threshold)
        if self.expect == "fail":
            return bool(self.error > self.threshold)
        return True

    def sort_key(self):
        return (self.check_id, json.dumps(self.params, sort_keys=True))

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "equation": self.equation,
            "params": _rounded(self.params),
            "max_abs_error": _rounded(float(self.error)),
            "threshold": float(self.threshold),
            "expect": self.expect,
            "ok": self.ok,
            **({"info": _rounded(self.info)} if self.info else {}),
        }

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = "" if self.expect == "pass" else f" ({self.expect})"
        return f"{status} {self.check_id} [{self.equation}] err={self.error:.3e} thr={self.threshold:.0e}{extra}"
