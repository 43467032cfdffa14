"""Breadth-first search for a minimal-CNOT CCZ on the chain a - b - c.

CCZ is the phase polynomial exp(i*pi/4 * sum_p sign(p) * p(x)) over the seven
non-zero parities p of (a, b, c), sign +1 for odd weight and -1 for even
weight. A CNOT circuit realizes it when every parity appears on some wire at
some point (a T or Tdg is placed there) and the final linear map is identity.
Only nearest-neighbour CNOTs (a,b), (b,a), (b,c), (c,b) are allowed.

Prints the gate sequence in the form used by ``gates._LINEAR_CCZ``.
"""

from collections import deque

WIRES = "abc"
MOVES = [(0, 1), (1, 0), (1, 2), (2, 1)]
IDENTITY = (0b100, 0b010, 0b001)


def phase_gate(parity: int) -> str:
    return "T" if bin(parity).count("1") % 2 else "Tdg"


def search():
    start = (IDENTITY, frozenset(IDENTITY))
    queue = deque([(start, [])])
    seen = {start}
    while queue:
        (rows, visited), path = queue.popleft()
        if len(visited) == 7 and rows == IDENTITY:
            return path
        for ctrl, tgt in MOVES:
            new = list(rows)
            new[tgt] ^= new[ctrl]
            new = tuple(new)
            state = (new, visited | {new[tgt]})
            if state not in seen:
                seen.add(state)
                queue.append((state, path + [(ctrl, tgt)]))
    return None


def render(path):
    rows = list(IDENTITY)
    done = set()
    out = []
    for w in range(3):
        out.append((phase_gate(rows[w]), WIRES[w]))
        done.add(rows[w])
    for ctrl, tgt in path:
        out.append(("CNOT", WIRES[ctrl] + WIRES[tgt]))
        rows[tgt] ^= rows[ctrl]
        if rows[tgt] not in done:
            done.add(rows[tgt])
            out.append((phase_gate(rows[tgt]), WIRES[tgt]))
    return out


if __name__ == "__main__":
    path = search()
    print(f"{len(path)} CNOTs")
    for kind, spec in render(path):
        print(f'    ("{kind}", "{spec}"),')
