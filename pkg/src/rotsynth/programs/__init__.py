"""Bundled rotation programs for the standard magic-state circuits.

  * ccz: 8 rotations on 4 qubits preparing a CCZ state on qubits 0-2 with a
    detection flag on qubit 3 (measure it in X and accept on +).
  * cs:  12 rotations on 4 qubits applying CS to qubits 0-1 with detection
    flags on qubits 2-3.
  * t15: 15 rotations on 5 qubits distilling one T state onto qubit 4 with
    detection flags on qubits 0-3.
"""

from importlib import resources

from ..ir import RotationProgram, parse_rotation_program

NAMES = ("ccz", "cs", "t15")

# (output qubits, detection qubits) for each bundled program
DESIGNATIONS = {
    "ccz": ((0, 1, 2), (3,)),
    "cs": ((0, 1), (2, 3)),
    "t15": ((4,), (0, 1, 2, 3)),
}


def program_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown bundled program {name!r}; have {NAMES}")
    return resources.files(__package__).joinpath(f"{name}.json").read_text()


def load(name: str) -> RotationProgram:
    return parse_rotation_program(program_text(name))
