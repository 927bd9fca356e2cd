import pytest

from dime import parse_program

# Canonical 6-instruction program: a loop whose exit is a nondeterministic branch.
P1 = """\
image main 1000
L0: op 1
    op 1
    ndbr L5 0.5
    op 1
    jmp L0
L5: halt
"""

# Deterministic twin: the exit branch follows a cyclic pattern instead
# (two full loop iterations, then taken on the third pass).
P1_DET = """\
image main 1000
L0: op 1
    op 1
    br L5 NNT
    op 1
    jmp L0
L5: halt
"""

CALLS = """\
image main 100
    op 1
    call F
    op 1
    call G
    halt
F:  op 2
    ret
G:  op 1
    call F
    ret
"""


@pytest.fixture
def p1():
    return parse_program(P1)


@pytest.fixture
def p1_det():
    return parse_program(P1_DET)


@pytest.fixture
def calls_program():
    return parse_program(CALLS)
