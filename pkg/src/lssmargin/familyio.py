"""JSON family files.

Layout::

    {
      "dim": 2,
      "matrices": [{"label": "A0", "rows": [[1.0, 2.0], [0.0, -1.0]]}, ...],
      "blocks": {"d1": 1, "d2": 1},     # optional
      "alpha": "pi*sqrt2"               # optional
    }

With ``blocks`` the matrices must be block upper-triangular and the file
describes a :class:`BlockFamily` (couplings are the top-right blocks). A file
with ``alpha`` and no ``matrices`` stands for the generated 3x3 pair. Floats are
written with ``repr`` precision, so a written file re-reads to identical
entries.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .classifier import BlockFamily
from .errors import InvalidInput
from .growth import MatrixFamily
from .sublinear import build_pair


@dataclass(frozen=True)
class FamilyFile:
    family: MatrixFamily
    d1: Optional[int] = None
    alpha: Optional[Union[str, float]] = None

    @property
    def blocks(self) -> BlockFamily:
        if self.d1 is None:
            raise InvalidInput("family file declares no block structure")
        return BlockFamily.from_family(self.family, self.d1)


def parse_family(data: dict) -> FamilyFile:
    if not isinstance(data, dict):
        raise InvalidInput("family file must be a JSON object")
    alpha = data.get("alpha")
    if "matrices" not in data:
        if alpha is None:
            raise InvalidInput("family file needs 'matrices' or 'alpha'")
        return FamilyFile(build_pair(alpha).family, data.get("blocks", {}).get("d1"), alpha)
    dim = data.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise InvalidInput("'dim' must be a positive integer")
    mats, labels = [], []
    for i, entry in enumerate(data["matrices"]):
        if isinstance(entry, dict):
            rows, label = entry.get("rows"), entry.get("label", f"A{i}")
        else:
            rows, label = entry, f"A{i}"
        if not isinstance(rows, list) or len(rows) != dim:
            raise InvalidInput(f"matrix {i}: expected {dim} rows")
        for j, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != dim:
                raise InvalidInput(f"matrix {i}: row {j} must have {dim} entries (ragged rows)")
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
                raise InvalidInput(f"matrix {i}: row {j} has non-numeric entries")
        mats.append(np.array(rows, dtype=float))
        labels.append(str(label))
    fam = MatrixFamily(mats, labels)
    d1 = None
    if "blocks" in data:
        b = data["blocks"]
        d1, d2 = b.get("d1"), b.get("d2")
        if not isinstance(d1, int) or (d2 is not None and d1 + d2 != dim):
            raise InvalidInput("'blocks' needs integer d1 (and d2) summing to dim")
        BlockFamily.from_family(fam, d1)  # validates the zero block
    return FamilyFile(fam, d1, alpha)


def load_family(path: Union[str, Path]) -> FamilyFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read family file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"family file is not valid JSON: {exc}") from None
    return parse_family(data)


def family_to_dict(fam: MatrixFamily, d1: Optional[int] = None, alpha=None) -> dict:
    out = {
        "dim": fam.dim,
        "matrices": [{"label": lab, "rows": m.tolist()} for lab, m in zip(fam.labels, fam)],
    }
    if d1 is not None:
        out["blocks"] = {"d1": d1, "d2": fam.dim - d1}
    if alpha is not None:
        out["alpha"] = alpha
    return out


def dump_family(fam: MatrixFamily, d1: Optional[int] = None, alpha=None) -> str:
    if any(not math.isfinite(v) for m in fam for v in m.ravel()):
        raise InvalidInput("cannot serialise non-finite entries")
    return json.dumps(family_to_dict(fam, d1, alpha), indent=2) + "\n"


def save_family(path: Union[str, Path], fam: MatrixFamily, d1: Optional[int] = None, alpha=None) -> None:
    Path(path).write_text(dump_family(fam, d1, alpha))
