"""Shared fixtures: random geometry helpers and the acceptance summary."""

import re

import numpy as np


def random_polygon(rng, n_min=3, n_max=8, scale=1.0, center_span=1.0):
    """Random star-shaped CCW polygon around a random center.

    Angular gaps are bounded below so no edge degenerates and above by
    pi so the center stays interior, which makes the traversal CCW.
    """
    m = int(rng.integers(n_min, n_max + 1))

    def gaps(a):
        return np.diff(np.append(a, a[0] + 2.0 * np.pi))

    ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    while np.min(gaps(ang)) < 0.2 or np.max(gaps(ang)) > np.pi - 0.1:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    rad = rng.uniform(0.4, 1.0, m) * scale
    center = rng.uniform(-center_span, center_span, 2)
    return center + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def oscillatory_segment_rule(a, b, v_max):
    """Composite Gauss rule resolving a phase of |v_max| . (b - a) radians.

    Brute-force oracle quadrature: subdivides so each piece sees at most
    40 radians and uses 48 Gauss points there.
    """
    from trefftzvem.quadrature import segment_rule

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    phase = float(v_max) * float(np.hypot(*(b - a)))
    pieces = max(1, int(np.ceil(phase / 40.0)))
    pts, wts = [], []
    for i in range(pieces):
        lo = a + (b - a) * (i / pieces)
        hi = a + (b - a) * ((i + 1) / pieces)
        p, w = segment_rule(lo, hi, 48)
        pts.append(p)
        wts.append(w)
    return np.vstack(pts), np.concatenate(wts)


_ACCEPT_RE = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per numbered acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_acceptance.py" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1]
            m = _ACCEPT_RE.search(name)
            if not m:
                continue
            label = name[m.end():].lstrip("_")
            rows.append((int(m.group(1)), label, outcome))
    if not rows:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for num, label, outcome in sorted(rows):
        word = "PASS" if outcome == "passed" else "FAIL"
        tw.write_line(f"criterion {num:2d} {word}  {label.replace('_', ' ')}")
