"""OpenQASM 2.0 emission and re-ingestion for decomposed circuits.

Only two gate kinds are ever written: `u3` and `cx`.  A Z-Y-Z rotation with
angles (phi, theta, lam) maps onto `u3(theta, phi, lam)`, which equals
RZ(phi) RY(theta) RZ(lam) up to an unobservable global phase.  Angles are
serialized with `repr`, which round-trips doubles exactly, so a parsed file
rebuilds the same matrices bit for bit.
"""

from __future__ import annotations

import re

from .ansatz import Gate

_U3_LINE = re.compile(
    r"u3\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s+q\[(\d+)\]\s*;"
)
_CX_LINE = re.compile(r"cx\s+q\[(\d+)\]\s*,\s*q\[(\d+)\]\s*;")
_QREG_LINE = re.compile(r"qreg\s+q\[(\d+)\]\s*;")


class QasmError(ValueError):
    pass


def format_gate(gate: Gate) -> str:
    if gate.kind == "rot":
        # repr of a Python float round-trips exactly; numpy scalars would not
        phi, theta, lam = (float(x) for x in gate.params)
        return f"u3({theta!r},{phi!r},{lam!r}) q[{int(gate.qubits[0])}];"
    if gate.kind == "cx":
        control, target = (int(q) for q in gate.qubits)
        return f"cx q[{control}],q[{target}];"
    raise QasmError(f"cannot serialize gate kind {gate.kind!r}")


def write_qasm(gates, num_qubits: int, comments=None) -> str:
    """Render a gate list as OpenQASM 2.0 text.

    `comments` optionally maps gate indices to comment lines inserted before
    that gate (used to mark block boundaries in exported circuits).
    """
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{num_qubits}];",
    ]
    comments = comments or {}
    for i, gate in enumerate(gates):
        if i in comments:
            lines.append(f"// {comments[i]}")
        lines.append(format_gate(gate))
    return "\n".join(lines) + "\n"


def parse_qasm(text: str):
    """Parse text produced by write_qasm back into (num_qubits, gates).

    Handles exactly the emitted subset: one qreg named q, u3 and cx lines,
    and // comments.
    """
    num_qubits = None
    gates = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = _QREG_LINE.fullmatch(line)
        if m:
            if num_qubits is not None:
                raise QasmError("multiple qreg declarations")
            num_qubits = int(m.group(1))
            continue
        m = _U3_LINE.fullmatch(line)
        if m:
            theta, phi, lam = (float(m.group(k)) for k in (1, 2, 3))
            gates.append(Gate("rot", (int(m.group(4)),), (phi, theta, lam)))
            continue
        m = _CX_LINE.fullmatch(line)
        if m:
            gates.append(Gate("cx", (int(m.group(1)), int(m.group(2)))))
            continue
        raise QasmError(f"unsupported line: {raw!r}")
    if num_qubits is None:
        raise QasmError("missing qreg declaration")
    for gate in gates:
        if any(q >= num_qubits for q in gate.qubits):
            raise QasmError(f"gate touches qubit outside the register: {gate}")
    return num_qubits, tuple(gates)
