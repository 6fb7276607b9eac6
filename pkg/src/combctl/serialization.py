"""JSON formats for matrices, channels, controlled channels and combs.

Matrices are ``{"rows", "cols", "re", "im"}`` with row-major entries;
vectors are stored as single-column matrices.
"""
import json

import numpy as np

from .channels import ChoiMatrix, KrausSet, choi, kraus_set, kraus_to_choi
from .combs import CombChoi, CombKraus, CombShape
from .controlled import ControlledChannel, coherence_operator, control_block
from .errors import CombctlError


class ParseError(CombctlError, ValueError):
    pass


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m[:, None]
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.reshape(-1)],
        "im": [float(x) for x in m.imag.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * len(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ParseError(f"matrix entries do not match {rows}x{cols}")
    m = (re + 1j * im).reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise ParseError("matrix has non-finite entries")
    return m


def channel_to_json(ch) -> dict:
    if isinstance(ch, KrausSet):
        return {"d_in": ch.d_in, "d_out": ch.d_out, "kraus": [matrix_to_json(k) for k in ch.operators]}
    return {"d_in": ch.d_in, "d_out": ch.d_out, "choi": matrix_to_json(ch.matrix)}


def channel_from_json(obj) -> ChoiMatrix:
    try:
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"channel needs d_in and d_out: {exc}") from exc
    try:
        if "kraus" in obj:
            ks = kraus_set([matrix_from_json(k) for k in obj["kraus"]])
            if (ks.d_in, ks.d_out) != (d_in, d_out):
                raise ParseError("Kraus shapes disagree with d_in/d_out")
            return kraus_to_choi(ks)
        if "choi" in obj:
            return choi(matrix_from_json(obj["choi"]), d_in, d_out)
    except CombctlError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    raise ParseError("channel needs a 'kraus' or 'choi' entry")


def controlled_to_json(cc: ControlledChannel) -> dict:
    out = channel_to_json(cc.choi)
    out["coherence_k"] = matrix_to_json(cc.k.k)
    out["theta"] = float(cc.theta)
    return out


def controlled_from_json(obj) -> ControlledChannel:
    j = channel_from_json(obj)
    try:
        k = matrix_from_json(obj["coherence_k"])
        theta = float(obj.get("theta", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"controlled channel needs coherence_k: {exc}") from exc
    target = ChoiMatrix(control_block(j, (1, 1), (1, 1)), j.d_in // 2, j.d_out // 2)
    return ControlledChannel(j, coherence_operator(target, k), theta)


def comb_to_json(comb) -> dict:
    out = {"dims": list(comb.shape.dims)}
    if isinstance(comb, CombKraus):
        out["kraus"] = [matrix_to_json(s) for s in comb.operators]
    else:
        out["choi"] = matrix_to_json(comb.matrix)
    return out


def comb_from_json(obj):
    try:
        shape = CombShape(tuple(obj["dims"]))
        if "kraus" in obj:
            return CombKraus.from_operators([matrix_from_json(s) for s in obj["kraus"]], shape)
        if "choi" in obj:
            return CombChoi(matrix_from_json(obj["choi"]), shape)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad comb object: {exc}") from exc
    raise ParseError("comb needs a 'kraus' or 'choi' entry")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
