"""Flat key-value instance files.

Grammar (one ``key=value`` pair per line; blank lines and ``#`` comments
ignored; keys are case-sensitive):

    kind=finite
    means=[0.999, 0.5, 0.001]

    kind=reservoir
    law=discrete
    means=[0.9, 0.1]
    probs=[0.2, 0.8]

    kind=reservoir
    law=uniform
    low=0
    high=1

    kind=reservoir
    law=piecewise
    seg_low=[0, 0.8]
    seg_high=[0.5, 1]
    seg_weight=[0.4, 0.6]

Lists are comma-separated decimals in brackets. All floats are written with
17 significant digits, so serialization round-trips float64 exactly.
"""

from __future__ import annotations

from .core import (ContinuousReservoir, DiscreteReservoir, FiniteBandit,
                   PiecewiseUniformLaw, UniformMeanLaw, UsageError)

_FLOAT_FMT = "{:.17g}"


def _fmt_list(values) -> str:
    return "[" + ", ".join(_FLOAT_FMT.format(v) for v in values) + "]"


def _parse_list(text: str, key: str) -> list[float]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise UsageError(f"field {key!r} must be a bracketed list")
    body = text[1:-1].strip()
    if not body:
        return []
    try:
        return [float(x) for x in body.split(",")]
    except ValueError as exc:
        raise UsageError(f"field {key!r} has a non-numeric entry") from exc


def dumps_instance(instance) -> str:
    """Serialize a finite instance or reservoir to the flat text format."""
    if isinstance(instance, FiniteBandit):
        return f"kind=finite\nmeans={_fmt_list(instance.means)}\n"
    if isinstance(instance, DiscreteReservoir):
        return ("kind=reservoir\nlaw=discrete\n"
                f"means={_fmt_list(instance.means)}\n"
                f"probs={_fmt_list(instance.probs)}\n")
    if isinstance(instance, ContinuousReservoir):
        law = instance.law
        if isinstance(law, UniformMeanLaw):
            return ("kind=reservoir\nlaw=uniform\n"
                    f"low={_FLOAT_FMT.format(law.low)}\n"
                    f"high={_FLOAT_FMT.format(law.high)}\n")
        if isinstance(law, PiecewiseUniformLaw):
            los, his, ws = zip(*law.segments)
            return ("kind=reservoir\nlaw=piecewise\n"
                    f"seg_low={_fmt_list(los)}\n"
                    f"seg_high={_fmt_list(his)}\n"
                    f"seg_weight={_fmt_list(ws)}\n")
        raise UsageError(f"cannot serialize mean law {type(law).__name__}")
    raise UsageError(f"cannot serialize {type(instance).__name__}")


def loads_instance(text: str):
    """Parse the flat text format; inverse of :func:`dumps_instance`."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in fields:
            raise UsageError(f"line {lineno}: duplicate field {key!r}")
        fields[key] = value.strip()

    kind = fields.get("kind")
    if kind == "finite":
        return FiniteBandit.from_means(_parse_list(_require(fields, "means"), "means"))
    if kind == "reservoir":
        law = fields.get("law")
        if law == "discrete":
            means = _parse_list(_require(fields, "means"), "means")
            probs = _parse_list(_require(fields, "probs"), "probs")
            return DiscreteReservoir(means, probs)
        if law == "uniform":
            low = float(fields.get("low", "0"))
            high = float(fields.get("high", "1"))
            return ContinuousReservoir(UniformMeanLaw(low, high))
        if law == "piecewise":
            los = _parse_list(_require(fields, "seg_low"), "seg_low")
            his = _parse_list(_require(fields, "seg_high"), "seg_high")
            ws = _parse_list(_require(fields, "seg_weight"), "seg_weight")
            if not len(los) == len(his) == len(ws):
                raise UsageError("piecewise segment lists must have equal length")
            return ContinuousReservoir(PiecewiseUniformLaw(zip(los, his, ws)))
        raise UsageError(f"unknown reservoir law {law!r}")
    raise UsageError(f"instance file needs kind=finite|reservoir, got {kind!r}")


def _require(fields: dict[str, str], key: str) -> str:
    if key not in fields:
        raise UsageError(f"missing required field {key!r}")
    return fields[key]


def save_instance(instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_instance(instance))


def load_instance(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_instance(fh.read())
