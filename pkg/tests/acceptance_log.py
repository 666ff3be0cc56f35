"""One summary line per acceptance criterion, filled in as the suite runs."""

ACCEPTANCE = {}


def record(n: int, ok: bool, summary: str) -> str:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {summary}"
    ACCEPTANCE[n] = line
    print(line)
    return line
