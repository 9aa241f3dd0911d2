"""Collects one verdict line per acceptance criterion for the terminal summary."""

RESULTS = {}


def record(number, passed, detail):
    RESULTS[number] = (bool(passed), detail)
    return passed


def lines():
    out = []
    for number in sorted(RESULTS):
        passed, detail = RESULTS[number]
        out.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
    return out
