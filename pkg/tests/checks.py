"""Independent solution checks that do not reuse any solver code."""
from __future__ import annotations

from typing import List

# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE: List[str] = []


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b) -> bool:
        """Join two sets; False when ``a`` and ``b`` were already joined (a cycle)."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def radiality_violations(instance, operation) -> List[str]:
    """Closed lines (used and not switched open) that close a loop."""
    ends = {e.id: e.endpoints for e in instance.edges}
    uf = UnionFind()
    bad = []
    for eid in sorted(ends, key=str):
        if operation.line_used.get(eid) and not operation.switch_open.get(eid):
            if not uf.union(*ends[eid]):
                bad.append(f"scenario {operation.scenario_id}: {eid} closes a loop")
    return bad


def phase_band_violations(instance, operation, tol: float = 1e-6) -> List[str]:
    """Multi-phase edges whose per-phase flows leave the (1 +- beta) band around their mean."""
    bad = []
    for e in instance.edges:
        if len(e.phases) < 2:
            continue
        flows = [operation.flow.get((e.id, k), 0.0) for k in e.phases]
        if all(abs(f) <= tol for f in flows):
            continue
        sign = 1.0 if sum(flows) >= 0 else -1.0
        f = [sign * v for v in flows]
        avg = sum(f) / len(f)
        for k, v in zip(e.phases, f):
            if v < (1 - e.beta) * avg - tol or v > (1 + e.beta) * avg + tol:
                bad.append(f"scenario {operation.scenario_id}: {e.id} phase {k} flow {v} vs mean {avg}")
    return bad
