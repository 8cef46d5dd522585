"""Run-result container shared by the density-evolution engines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class DeRunResult:
    """Per-iteration error-probability traces of one DE run.

    pe        -- error probability of the noiseless VN output messages;
                 this is the quantity thresholds are measured on.
    pe_noisy  -- error probability after the deviation stage (quantized
                 engines only; equals pe when no deviation applies there).
    app_pe    -- error probability of the APP hard decision, the quantity
                 a BER simulation observes.
    schedule  -- realized per-iteration decoder parameters, when the run
                 selects them online (Gallager B thresholds).
    extras    -- engine-specific per-iteration columns, e.g. the two
                 conditional error components of Gallager B.
    """

    pe: np.ndarray
    app_pe: np.ndarray | None = None
    pe_noisy: np.ndarray | None = None
    schedule: list | None = None
    extras: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    final_pair: object = None

    @property
    def final_pe(self) -> float:
        return float(self.pe[-1])

    def iterations(self) -> np.ndarray:
        return np.arange(1, len(self.pe) + 1)

    def to_csv(self) -> str:
        cols = {"iteration": self.iterations(), "pe": self.pe}
        if self.pe_noisy is not None:
            cols["pe_noisy"] = self.pe_noisy
        if self.app_pe is not None:
            cols["app_pe"] = self.app_pe
        for name, col in self.extras.items():
            values = np.asarray(col)
            if values.ndim == 1 and values.dtype != object and len(values) == len(self.pe):
                cols[name] = values
        header = ",".join(cols)
        rows = zip(*cols.values())
        body = "\n".join(
            ",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                     for v in row)
            for row in rows
        )
        return header + "\n" + body + "\n"

    def to_json(self) -> str:
        doc = {
            "pe": list(map(float, self.pe)),
            "meta": self.meta,
        }
        if self.pe_noisy is not None:
            doc["pe_noisy"] = list(map(float, self.pe_noisy))
        if self.app_pe is not None:
            doc["app_pe"] = list(map(float, self.app_pe))
        if self.schedule is not None:
            doc["schedule"] = [list(s) if s is not None else None for s in self.schedule]
        for name, col in self.extras.items():
            values = np.asarray(col)
            if values.ndim == 1 and values.dtype != object:
                doc[name] = list(map(float, values))
        return json.dumps(doc)
