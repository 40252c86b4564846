"""Collects one result line per acceptance criterion for the terminal summary."""

RESULTS: dict[str, tuple[bool, str]] = {}


def record(name: str, ok: bool, detail: str) -> None:
    RESULTS[name] = (ok, detail)


def lines() -> list[str]:
    return [f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}" for name, (ok, detail) in sorted(RESULTS.items())]
