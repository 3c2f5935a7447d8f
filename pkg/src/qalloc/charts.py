"""Dependency-free SVG charts for sweeps and policy comparisons.

All geometry is computed with exact rationals and floored to integer pixel
coordinates, so the same data always renders byte-identical markup.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .model import format_exact

WIDTH = 960
HEIGHT = 540
LEFT = 84
RIGHT = 24
TOP = 52
BOTTOM = 72
PLOT_W = WIDTH - LEFT - RIGHT
PLOT_H = HEIGHT - TOP - BOTTOM

SWEEP_SERIES = (
    ("deployment", "#4878a8"),
    ("compute", "#e49444"),
    ("Bell pairs", "#d1605e"),
    ("on-demand", "#6a9f58"),
)

STRUCTURE_SERIES = (
    ("first stage", "#4878a8"),
    ("second stage", "#e49444"),
)

COMPARISON_SERIES = (
    ("proposed", "#4878a8"),
    ("expected-value", "#d1605e"),
    ("random mean", "#6a9f58"),
)

AXIS_CAPTIONS = {
    "demand_qubits": "task demand (qubits)",
    "power": "scenario power (qubits)",
    "fidelity": "scenario fidelity",
    "ondemand_cost": "on-demand unit cost",
    "probability": "demand probability",
    "ondemand_cost_comparison": "on-demand cost multiplier",
}


def _nice_ceiling(value: Fraction) -> Fraction:
    """Smallest round number (1/1.5/2/2.5/3/4/5/6/8 times a power of ten)
    at or above ``value``; keeps tick labels short."""
    if value <= 0:
        return Fraction(1)
    digits = len(str(value.numerator // value.denominator)) if value >= 1 else 1
    base = Fraction(10) ** (digits - 1)
    for mult in (1, Fraction(3, 2), 2, Fraction(5, 2), 3, 4, 5, 6, 8, 10):
        cand = base * mult
        if cand >= value:
            return cand
    return base * 10


def _px(value, scale: Fraction, span: int) -> int:
    return int(Fraction(value) * span / scale)


def _text(x: int, y: int, s: str, anchor: str = "middle", size: int = 14) -> str:
    return (
        f'<text x="{x}" y="{y}" text-anchor="{anchor}" '
        f'font-family="Helvetica, Arial, sans-serif" font-size="{size}" '
        f'fill="#222222">{s}</text>'
    )


def _rect(x: int, y: int, w: int, h: int, fill: str) -> str:
    return f'<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{fill}"/>'


def _frame(title: str, scale: Fraction, caption: str) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        _rect(0, 0, WIDTH, HEIGHT, "#ffffff"),
        _text(WIDTH // 2, 28, title, size=17),
        _text(WIDTH // 2, HEIGHT - 16, caption),
    ]
    for i in range(5):
        y = TOP + PLOT_H - _px(scale * i / 4, scale, PLOT_H)
        parts.append(_rect(LEFT, y, PLOT_W, 1, "#dddddd" if i else "#555555"))
        parts.append(_text(LEFT - 8, y + 5, format_exact(scale * i / 4), anchor="end", size=12))
    return parts


def _legend(parts: list[str], series) -> None:
    x = LEFT + 8
    y = TOP + 6
    for name, color in series:
        parts.append(_rect(x, y, 14, 14, color))
        parts.append(_text(x + 20, y + 12, name, anchor="start", size=12))
        x += 20 + 9 * len(name) + 28


def _stacked(
    title: str,
    caption: str,
    labels: Sequence[str],
    stacks: Sequence[Sequence | None],
    series,
) -> str:
    totals = [sum(s, Fraction(0)) for s in stacks if s is not None]
    scale = _nice_ceiling(max(totals, default=Fraction(0)))
    parts = _frame(title, scale, caption)
    slots = max(len(labels), 1)
    slot = Fraction(PLOT_W, slots)
    bar = int(slot * 3 / 5)
    for idx, (label, stack) in enumerate(zip(labels, stacks)):
        x = LEFT + int(slot * idx + slot / 5)
        parts.append(_text(x + bar // 2, TOP + PLOT_H + 20, label, size=12))
        if stack is None:
            parts.append(_text(x + bar // 2, TOP + PLOT_H - 8, "infeasible", size=11))
            continue
        cum = Fraction(0)
        base = _px(cum, scale, PLOT_H)
        for value, (_, color) in zip(stack, series):
            cum += value
            top = _px(cum, scale, PLOT_H)
            if top > base:
                parts.append(_rect(x, TOP + PLOT_H - top, bar, top - base, color))
            base = top
    _legend(parts, series)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _grouped(
    title: str,
    caption: str,
    labels: Sequence[str],
    groups: Sequence[Sequence],
    series,
) -> str:
    flat = [v for group in groups for v in group if v is not None]
    scale = _nice_ceiling(max(flat, default=Fraction(0)))
    parts = _frame(title, scale, caption)
    slots = max(len(labels), 1)
    lanes = max(len(series), 1)
    slot = Fraction(PLOT_W, slots)
    lane = slot * 3 / (4 * lanes)
    bar = int(lane * 4 / 5)
    for idx, (label, group) in enumerate(zip(labels, groups)):
        x0 = LEFT + int(slot * idx + slot / 8)
        parts.append(_text(LEFT + int(slot * idx + slot / 2), TOP + PLOT_H + 20, label, size=12))
        for lane_idx, (value, (_, color)) in enumerate(zip(group, series)):
            x = x0 + int(lane * lane_idx)
            if value is None:
                parts.append(_text(x + bar // 2, TOP + PLOT_H - 8, "x", size=11))
                continue
            h = _px(value, scale, PLOT_H)
            parts.append(_rect(x, TOP + PLOT_H - h, bar, max(h, 1), color))
    _legend(parts, series)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sweep_chart(rows) -> str:
    """Stacked cost components across one swept axis."""
    axis = rows[0].axis if rows else "axis"
    labels = [format_exact(r.axis_value) for r in rows]
    stacks = [
        None
        if r.total is None
        else (
            Fraction(r.deployment_cost),
            r.expected_compute,
            r.expected_bell,
            r.expected_ondemand,
        )
        for r in rows
    ]
    return _stacked(
        f"optimal expected cost vs {axis}",
        AXIS_CAPTIONS.get(axis, axis),
        labels,
        stacks,
        SWEEP_SERIES,
    )


def structure_chart(rows) -> str:
    """First-stage vs second-stage split of the optimum across one axis."""
    axis = rows[0].axis if rows else "axis"
    labels = [format_exact(r.axis_value) for r in rows]
    stacks = [
        None
        if r.total is None
        else (Fraction(r.deployment_cost), r.total - r.deployment_cost)
        for r in rows
    ]
    return _stacked(
        f"cost structure vs {axis}",
        AXIS_CAPTIONS.get(axis, axis),
        labels,
        stacks,
        STRUCTURE_SERIES,
    )


def comparison_chart(rows) -> str:
    """Proposed vs expected-value vs mean-random totals per multiplier."""
    order: list[Fraction] = []
    by_mult: dict[Fraction, dict[str, Fraction | None]] = {}
    for row in rows:
        if row.multiplier not in by_mult:
            order.append(row.multiplier)
            by_mult[row.multiplier] = {}
        if row.seed is None and row.model in ("proposed", "evf", "random_mean"):
            by_mult[row.multiplier][row.model] = row.total_cost if row.feasible else None
    labels = [format_exact(m) for m in order]
    have_random = any("random_mean" in d for d in by_mult.values())
    series = COMPARISON_SERIES if have_random else COMPARISON_SERIES[:2]
    groups = [
        tuple(by_mult[m].get(name) for name in ("proposed", "evf", "random_mean"))[
            : len(series)
        ]
        for m in order
    ]
    return _grouped(
        "policy comparison across on-demand pricing",
        AXIS_CAPTIONS["ondemand_cost_comparison"],
        labels,
        groups,
        series,
    )
